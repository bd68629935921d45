"""First-order Magnus wave packet and its comparison with exact propagation."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from utils.config import SMALL_THETA12

from .errors import DomainError
from .field import FieldConfig, ThetaPair, theta_integrals
from .observables import (
    PopulationPhaseReport,
    max_orientation_over_revival,
    population_phase_report,
    wrap_phase,
)
from .propagator import StepControl, WavePacket, propagate_exact
from .rotor import RotorModel

logger = logging.getLogger(__name__)


def _sinc(x: float) -> float:
    if x < SMALL_THETA12:
        x2 = x * x
        return 1 - x2 / 6 + x2 * x2 / 120
    return math.sin(x) / x


def _versine_ratio(x: float) -> float:
    """(1 − cos x)/x² with its series near zero."""
    if x < SMALL_THETA12:
        x2 = x * x
        return 0.5 - x2 / 24 + x2 * x2 / 720
    return (1 - math.cos(x)) / (x * x)


def first_order_wavepacket(
    thetas: ThetaPair, reference_time: float = 0.0, n_states: int = 3
) -> WavePacket:
    """Wave packet generated from |00⟩ by the first Magnus term.

    States above J = 2 are never reached at this order and are padded with
    zeros when n_states > 3.
    """
    t1, t2 = complex(thetas.theta1), complex(thetas.theta2)
    if not (np.isfinite(t1) and np.isfinite(t2)):
        raise DomainError("θ values must be finite")
    if n_states < 3:
        raise DomainError(f"need at least three states, got {n_states}")
    x = thetas.theta12
    versine = _versine_ratio(x)
    coeffs = np.zeros(n_states, dtype=complex)
    coeffs[0] = 1 - abs(t1) ** 2 * versine
    coeffs[1] = 1j * t1 * _sinc(x)
    coeffs[2] = -t1 * t2 * versine
    return WavePacket(coeffs, reference_time)


@dataclass(frozen=True, eq=False)
class MagnusComparison:
    thetas: ThetaPair
    exact: PopulationPhaseReport
    analytic: PopulationPhaseReport
    exact_orientation: float
    analytic_orientation: float
    norm_drift: float

    @property
    def population_diff(self) -> np.ndarray:
        return self.exact.populations - self.analytic.populations

    @property
    def phase_diff(self) -> np.ndarray:
        return wrap_phase(self.exact.phases - self.analytic.phases)

    @property
    def max_population_diff(self) -> float:
        return float(np.max(np.abs(self.population_diff)))

    @property
    def max_phase_diff(self) -> float:
        return float(np.max(np.abs(self.phase_diff)))


def magnus_vs_exact_report(
    config: FieldConfig,
    model: RotorModel,
    step_control: StepControl | None = None,
) -> MagnusComparison:
    if model.m != 0:
        raise DomainError("the first-order packet assumes M = 0")
    exact = propagate_exact(
        WavePacket.ground(model, config.t_start), config, model, step_control
    )
    thetas = theta_integrals(config, model)
    analytic = first_order_wavepacket(thetas, config.t_end, model.n_states)
    comparison = MagnusComparison(
        thetas=thetas,
        exact=population_phase_report(exact.final),
        analytic=population_phase_report(analytic),
        exact_orientation=max_orientation_over_revival(exact.final, model)[0],
        analytic_orientation=max_orientation_over_revival(analytic, model)[0],
        norm_drift=exact.norm_drift,
    )
    logger.info(
        "exact vs first order: max |Δp| = %.3e, max |Δφ| = %.3e",
        comparison.max_population_diff,
        comparison.max_phase_diff,
    )
    return comparison
