"""Gaussian terahertz pulses, their spectra and the θ overlap integrals.

Time domain: each pulse is
    √(2/π)·A·Δω·exp(-(t-τ)²Δω²/2)·cos(ω(t-τ) + φ)
so that its positive-frequency spectrum, with the e^{-iωt} convention, is
    A·exp(-(ω-ω₀)²/(2Δω²))·e^{iφ}·e^{-iωτ}.
The θ integrals use the opposite sign,
    θ_k = μ_k ∫ 𝓔(t) e^{+iω_k t} dt,
hence θ_k*(t_f) = μ_k E(ω_k) for a real field.
"""

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import trapezoid

from utils.config import (
    OVERLAP_THRESHOLD,
    QUADRATURE_MAX_REFINEMENTS,
    QUADRATURE_POINTS_PER_PERIOD,
    QUADRATURE_RTOL,
    SPECTRAL_AGREEMENT_RTOL,
    WINDOW_EDGE_TOLERANCE,
    WINDOW_N_SIGMA,
)

from .errors import DomainError, QuadratureError
from .rotor import RotorModel

logger = logging.getLogger(__name__)

SQRT_2_OVER_PI = math.sqrt(2 / math.pi)


@dataclass(frozen=True)
class PulseSpec:
    amplitude: float
    center_freq: float
    bandwidth: float
    phase: float = 0.0
    center_time: float = 0.0

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise DomainError(f"negative pulse amplitude {self.amplitude}")
        if not self.bandwidth > 0:
            raise DomainError(f"bandwidth must be positive: {self.bandwidth}")
        if not self.center_freq > 0:
            raise DomainError(
                f"center frequency must be positive: {self.center_freq}"
            )

    @property
    def duration(self) -> float:
        return 1.0 / self.bandwidth

    @property
    def peak(self) -> float:
        """Envelope peak √(2/π)·A/τ."""
        return SQRT_2_OVER_PI * self.amplitude * self.bandwidth

    def envelope(self, t):
        s = (np.asarray(t, dtype=float) - self.center_time) * self.bandwidth
        return self.peak * np.exp(-0.5 * s**2)

    def field(self, t):
        s = np.asarray(t, dtype=float) - self.center_time
        return self.envelope(t) * np.cos(self.center_freq * s + self.phase)

    def spectrum(self, omega):
        omega = np.asarray(omega, dtype=float)
        detuning = (omega - self.center_freq) / self.bandwidth
        lobe = np.exp(-0.5 * detuning**2)
        return (
            self.amplitude
            * lobe
            * np.exp(1j * (self.phase - omega * self.center_time))
        )


@dataclass(frozen=True)
class FieldConfig:
    """Ordered pulses plus the window [t_start, t_end] the field lives on."""

    pulses: tuple[PulseSpec, ...]
    t_start: float
    t_end: float
    overlap_warning: bool = False

    def __post_init__(self):
        if not self.pulses:
            raise DomainError("a field needs at least one pulse")
        if not self.t_end > self.t_start:
            raise DomainError(
                f"empty field window [{self.t_start}, {self.t_end}]"
            )

    @classmethod
    def from_pulses(
        cls,
        pulses,
        n_sigma: float = WINDOW_N_SIGMA,
        overlap_warning: bool = False,
    ) -> "FieldConfig":
        pulses = tuple(pulses)
        t_start = min(p.center_time - n_sigma * p.duration for p in pulses)
        t_end = max(p.center_time + n_sigma * p.duration for p in pulses)
        config = cls(pulses, t_start, t_end, overlap_warning)
        ratio = config.edge_ratio()
        if ratio > WINDOW_EDGE_TOLERANCE:
            logger.warning(
                "field at the window edge is %.2e of its peak; "
                "increase n_sigma (now %g)",
                ratio,
                n_sigma,
            )
        return config

    @property
    def peak(self) -> float:
        return max(p.peak for p in self.pulses)

    def edge_ratio(self) -> float:
        """Largest envelope at t_start or t_end relative to the peak."""
        if self.peak == 0:
            return 0.0
        edges = np.array([self.t_start, self.t_end])
        return float(
            max(np.max(p.envelope(edges)) for p in self.pulses) / self.peak
        )

    def to_dict(self) -> dict:
        return {
            "pulses": [asdict(p) for p in self.pulses],
            "t_start": self.t_start,
            "t_end": self.t_end,
            "overlap_warning": self.overlap_warning,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FieldConfig":
        return cls(
            tuple(PulseSpec(**p) for p in data["pulses"]),
            float(data["t_start"]),
            float(data["t_end"]),
            bool(data.get("overlap_warning", False)),
        )


@dataclass(frozen=True)
class ThetaPair:
    theta1: complex
    theta2: complex

    @property
    def theta12(self) -> float:
        return math.hypot(abs(self.theta1), abs(self.theta2))

    @property
    def ratio_defined(self) -> bool:
        return abs(self.theta1) > 0

    @property
    def ratio(self) -> float | None:
        """s = |θ₂|/|θ₁|, None when θ₁ vanishes."""
        if not self.ratio_defined:
            return None
        return abs(self.theta2) / abs(self.theta1)

    def scaled(self, factor: float) -> "ThetaPair":
        return ThetaPair(self.theta1 * factor, self.theta2 * factor)

    def as_array(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2], dtype=complex)


def field_time(config: FieldConfig, t):
    """𝓔(t); zero outside the configured window."""
    t = np.asarray(t, dtype=float)
    value = sum(p.field(t) for p in config.pulses)
    inside = (t >= config.t_start) & (t <= config.t_end)
    result = np.where(inside, value, 0.0)
    return float(result) if result.ndim == 0 else result


def spectral_field(config: FieldConfig, omega):
    """E(ω) from the Gaussian spectral lobes (positive frequencies)."""
    value = sum(p.spectrum(omega) for p in config.pulses)
    return complex(value) if np.ndim(value) == 0 else value


def spectral_overlap(pulses, model: RotorModel) -> float:
    """Relative height of each lobe at the other pulse's transition."""
    first, second = pulses[0], pulses[1]
    lobe1 = math.exp(
        -0.5 * ((model.omega12 - first.center_freq) / first.bandwidth) ** 2
    )
    lobe2 = math.exp(
        -0.5 * ((model.omega01 - second.center_freq) / second.bandwidth) ** 2
    )
    return max(lobe1, lobe2)


def _quadrature_thetas(
    config: FieldConfig, model: RotorModel, t_end: float, n: int
) -> np.ndarray:
    times = np.linspace(config.t_start, t_end, n + 1)
    omegas = model.transition_frequencies()[:2]
    integrand = field_time(config, times)[:, None] * np.exp(
        1j * times[:, None] * omegas
    )
    return model.couplings()[:2] * trapezoid(integrand, times, axis=0)


def spectral_thetas(config: FieldConfig, model: RotorModel) -> ThetaPair:
    """θ_k(t_f) through θ_k* = μ_k·E(ω_k)."""
    omegas = model.transition_frequencies()[:2]
    values = np.conj(model.couplings()[:2] * spectral_field(config, omegas))
    return ThetaPair(complex(values[0]), complex(values[1]))


def theta_integrals(
    config: FieldConfig,
    model: RotorModel,
    t: float | None = None,
    max_step: float | None = None,
    rtol: float = QUADRATURE_RTOL,
) -> ThetaPair:
    """Running θ₁(t), θ₂(t) by trapezoid quadrature with a Richardson check.

    t defaults to t_end. At t_end the result is cross-checked against the
    conjugate-spectrum identity.
    """
    t_end = config.t_end if t is None else min(float(t), config.t_end)
    if t_end < config.t_start:
        raise DomainError(f"t = {t} precedes the field window")
    if t_end == config.t_start:
        return ThetaPair(0j, 0j)

    step_limit = 2 * math.pi / model.omega12 / QUADRATURE_POINTS_PER_PERIOD
    if max_step is None or max_step > step_limit:
        if max_step is not None:
            logger.debug(
                "quadrature step %.3g refined to %.3g", max_step, step_limit
            )
        max_step = step_limit
    n = max(2, math.ceil((t_end - config.t_start) / max_step - 1e-9))

    coarse = _quadrature_thetas(config, model, t_end, n)
    for _ in range(QUADRATURE_MAX_REFINEMENTS):
        fine = _quadrature_thetas(config, model, t_end, 2 * n)
        scale = np.max(np.abs(fine))
        if np.all(np.abs(fine - coarse) <= rtol * scale):
            break
        logger.debug("θ quadrature not converged at n = %d, refining", n)
        coarse, n = fine, 2 * n
    else:
        raise QuadratureError(
            f"θ quadrature did not converge to rtol {rtol} with {n} points"
        )

    thetas = ThetaPair(complex(fine[0]), complex(fine[1]))
    if t_end == config.t_end:
        _check_spectral_identity(config, model, thetas)
    return thetas


def spectral_mismatch(
    config: FieldConfig, model: RotorModel, thetas: ThetaPair
) -> float:
    """Relative gap between final θ and the conjugate-spectrum values."""
    spectral = spectral_thetas(config, model).as_array()
    scale = np.max(np.abs(spectral))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(spectral - thetas.as_array())) / scale)


def _check_spectral_identity(
    config: FieldConfig, model: RotorModel, thetas: ThetaPair
) -> None:
    mismatch = spectral_mismatch(config, model, thetas)
    if mismatch > SPECTRAL_AGREEMENT_RTOL:
        logger.warning(
            "quadrature and spectral θ differ by %.2e (relative)", mismatch
        )
    else:
        logger.debug("spectral θ identity holds to %.2e", mismatch)


def pulses_from_targets(
    theta_targets: ThetaPair,
    model: RotorModel,
    detuning: float,
    bandwidth: float,
    delay: float = 0.0,
    phase1: float = 0.0,
    phase2: float = 0.0,
    n_sigma: float = WINDOW_N_SIGMA,
    overlap_threshold: float = OVERLAP_THRESHOLD,
) -> FieldConfig:
    """Two-pulse field realising the θ magnitudes at detuning Δ.

    A₁ = |θ₁|/μ₁₀ at ω01 + Δ centred at t = 0, A₂ = |θ₂|/μ₂₁ at twice that
    frequency centred at t = delay.
    """
    if not bandwidth > 0:
        raise DomainError(f"bandwidth must be positive: {bandwidth}")
    if not abs(detuning) < model.omega01:
        raise DomainError(
            f"|detuning| = {abs(detuning)} must stay below ω01"
        )
    targets = theta_targets.as_array()
    if not np.all(np.isfinite(targets)):
        raise DomainError("θ targets must be finite")

    mu10, mu21 = model.couplings()[:2]
    center = model.omega01 + detuning
    pulses = (
        PulseSpec(abs(targets[0]) / mu10, center, bandwidth, phase1, 0.0),
        PulseSpec(
            abs(targets[1]) / mu21, 2 * center, bandwidth, phase2, delay
        ),
    )
    overlap = spectral_overlap(pulses, model)
    flagged = overlap > overlap_threshold
    if flagged:
        logger.debug(
            "spectral lobes overlap (%.2e > %.0e); the optimum degrades",
            overlap,
            overlap_threshold,
        )
    return FieldConfig.from_pulses(pulses, n_sigma, overlap_warning=flagged)
