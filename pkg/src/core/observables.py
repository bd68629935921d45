"""Degree of orientation ⟨cosθ⟩(t) after the pulse and per-state reports."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from utils.config import (
    PHASE_POPULATION_THRESHOLD,
    REVIVAL_GRID_POINTS,
    REVIVAL_TIME_TOLERANCE,
)

from .errors import DomainError
from .propagator import WavePacket
from .rotor import RotorModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OrientationTrace:
    times: np.ndarray
    values: np.ndarray
    max_value: float
    argmax_time: float

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.values.tolist()))


@dataclass(frozen=True, eq=False)
class PopulationPhaseReport:
    populations: np.ndarray
    phases: np.ndarray
    reference_time: float = 0.0

    def rows(self) -> list[tuple[int, float, float]]:
        return [
            (J, float(p), float(phi))
            for J, (p, phi) in enumerate(zip(self.populations, self.phases))
        ]


def _coherences(packet: WavePacket, model: RotorModel) -> np.ndarray:
    if packet.n_states != model.n_states:
        raise DomainError(
            f"packet has {packet.n_states} states, model {model.n_states}"
        )
    c = packet.coeffs
    return 2 * model.cos_elements() * np.conj(c[:-1]) * c[1:]


def orientation_at(packet: WavePacket, model: RotorModel, t):
    """⟨cosθ⟩ at lab time t (scalar or array) under free evolution.

    Sums 2·M_{J+1,J}·|c_J||c_{J+1}|·cos(ω_J t − φ_J) over adjacent pairs.
    """
    terms = _coherences(packet, model)
    t = np.asarray(t, dtype=float)
    phase = np.exp(-1j * np.multiply.outer(t, model.transition_frequencies()))
    value = np.real(phase @ terms)
    return float(value) if value.ndim == 0 else value


def orientation_trace(
    packet: WavePacket,
    model: RotorModel,
    t_start: float,
    t_end: float,
    n: int = REVIVAL_GRID_POINTS,
) -> OrientationTrace:
    if n < 2:
        raise DomainError("a trace needs at least two samples")
    if not t_end > t_start:
        raise DomainError(f"empty trace interval [{t_start}, {t_end}]")
    times = np.linspace(t_start, t_end, n)
    values = orientation_at(packet, model, times)
    best = int(np.argmax(np.abs(values)))
    return OrientationTrace(
        times, values, float(abs(values[best])), float(times[best])
    )


def max_orientation_over_revival(
    packet: WavePacket,
    model: RotorModel,
    grid_points: int = REVIVAL_GRID_POINTS,
    t_start: float | None = None,
) -> tuple[float, float]:
    """Largest |⟨cosθ⟩| over one revival period starting at t_start.

    t_start defaults to the packet's reference time. A uniform scan picks
    the best sample, golden-section search then refines it.
    """
    t0 = packet.reference_time if t_start is None else float(t_start)
    period = model.revival_period
    times = t0 + period * np.arange(grid_points) / grid_points
    values = np.abs(orientation_at(packet, model, times))
    best = int(np.argmax(values))
    peak, t_peak = float(values[best]), float(times[best])
    if peak == 0.0:
        return 0.0, t0

    h = period / grid_points
    xtol = REVIVAL_TIME_TOLERANCE / (2 * max(abs(t_peak), 1.0))
    try:
        found = minimize_scalar(
            lambda t: -abs(orientation_at(packet, model, t)),
            bracket=(t_peak - h, t_peak, t_peak + h),
            method="golden",
            options={"xtol": xtol},
        )
    except ValueError:
        # flat neighbourhood, the grid sample already is the maximum
        logger.debug("revival refinement skipped at t = %.6g", t_peak)
        return peak, t_peak
    if -found.fun > peak:
        peak, t_peak = float(-found.fun), float(found.x)
    return peak, t_peak


def population_phase_report(
    packet: WavePacket, threshold: float = PHASE_POPULATION_THRESHOLD
) -> PopulationPhaseReport:
    """Populations |c_J|² and arg c_J, phases zeroed below threshold."""
    populations = packet.populations()
    phases = np.where(populations < threshold, 0.0, packet.phases())
    return PopulationPhaseReport(populations, phases, packet.reference_time)


def wrap_phase(angle):
    """Map angles onto (-π, π]."""
    wrapped = math.pi - np.remainder(math.pi - np.asarray(angle), 2 * math.pi)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped
