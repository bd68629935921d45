"""Maximum orientation of the three-state rotor and the field conditions
that reach it.
"""

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import ConsistencyError, DomainError
from .field import ThetaPair
from .rotor import RotorModel

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

# Σ a_ℓ s^ℓ = 0 for the amplitude ratio s = |θ₂|/|θ₁|, lowest order first
RATIO_QUARTIC = (
    2 / 9,
    -2 * SQRT2 / 3,
    17 / 18,
    -2 * SQRT2 / 3,
    13 / 18,
)
QUARTIC_SEARCH_INTERVAL = (0.0, 2.0)
QUARTIC_SCAN_POINTS = 2001
QUARTIC_RESIDUAL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class LagrangeSolution:
    lambda_max: float
    coeff_magnitudes: tuple[float, float, float]
    populations: tuple[float, float, float]
    m10: float
    m21: float

    def orientation(self) -> float:
        """f = 2M₁₀|c₀||c₁| + 2M₂₁|c₁||c₂| on the solution."""
        c0, c1, c2 = self.coeff_magnitudes
        return 2 * self.m10 * c0 * c1 + 2 * self.m21 * c1 * c2

    def stationarity_residual(self) -> float:
        """Largest residual of the three stationarity equations."""
        c0, c1, c2 = self.coeff_magnitudes
        lam = self.lambda_max
        return max(
            abs(self.m10 * c1 - lam * c0),
            abs(self.m10 * c0 + self.m21 * c2 - lam * c1),
            abs(self.m21 * c1 - lam * c2),
        )


def lagrange_optimum(m10: float, m21: float) -> LagrangeSolution:
    """Maximise f over normalized magnitudes (|c₀|, |c₁|, |c₂|)."""
    if not m10 > 0:
        raise DomainError(f"m10 must be positive, got {m10}")
    if not m21 >= 0:
        raise DomainError(f"m21 must be non-negative, got {m21}")
    lam = math.hypot(m10, m21)
    c1 = 1 / SQRT2
    c0 = m10 / (lam * SQRT2)
    c2 = m21 / (lam * SQRT2)
    return LagrangeSolution(
        lambda_max=lam,
        coeff_magnitudes=(c0, c1, c2),
        populations=(c0**2, c1**2, c2**2),
        m10=m10,
        m21=m21,
    )


def truncated_orientation_bound(model: RotorModel) -> float:
    """Largest eigenvalue of cosθ in the model's truncated basis.

    For j_max = 2 this is lagrange_optimum(M₁₀, M₂₁).lambda_max.
    """
    eigenvalues = eigh_tridiagonal(
        np.zeros(model.n_states), model.cos_elements(), eigvals_only=True
    )
    return float(eigenvalues[-1])


def _quartic(s):
    return np.polynomial.polynomial.polyval(s, RATIO_QUARTIC)


def solve_ratio_quartic() -> tuple[float, float]:
    """Real roots (s₁, s₂), s₁ > s₂, of the amplitude-ratio quartic."""
    lo, hi = QUARTIC_SEARCH_INTERVAL
    grid = np.linspace(lo, hi, QUARTIC_SCAN_POINTS)
    values = _quartic(grid)
    brackets = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)
    if brackets.size != 2:
        raise ConsistencyError(
            f"expected two real ratio roots in [{lo}, {hi}], "
            f"found {brackets.size}"
        )

    roots = []
    for i in brackets:
        root = brentq(_quartic, grid[i], grid[i + 1], xtol=1e-15)
        residual = abs(float(_quartic(root)))
        if residual > QUARTIC_RESIDUAL_TOLERANCE:
            raise ConsistencyError(
                f"ratio root {root:.15f} has residual {residual:.2e}"
            )
        roots.append(float(root))
    s2, s1 = sorted(roots)
    logger.debug("ratio quartic roots s1 = %.10f, s2 = %.10f", s1, s2)
    return s1, s2


def _cos_theta12(s: float) -> float:
    return 1 - SQRT2 / (3 * s) - SQRT2 * s / 3


@dataclass(frozen=True)
class OptimalCondition:
    """Amplitude branch and winding plus the phase target for θ₁, θ₂.

    The phase relation is 2·arg θ₁ − arg θ₂ = (k + sign/2)·π.
    """

    branch: int
    winding: int
    ratio: float
    theta1_mag: float
    theta2_mag: float
    k: int = 0
    sign: int = 1

    @property
    def theta12(self) -> float:
        return math.hypot(self.theta1_mag, self.theta2_mag)

    @property
    def phase_target(self) -> float:
        return (self.k + 0.5 * self.sign) * math.pi

    @property
    def phase_relation(self) -> str:
        half = "+" if self.sign > 0 else "-"
        return f"2 arg θ1 - arg θ2 = ({self.k} {half} 1/2)π"

    def in_units_of_pi(self) -> tuple[float, float]:
        return self.theta1_mag / math.pi, self.theta2_mag / math.pi

    def theta_pair(
        self, arg_theta1: float = math.pi / 2, scale: float = 1.0
    ) -> ThetaPair:
        """Complex θ targets meeting the phase relation."""
        arg_theta2 = 2 * arg_theta1 - self.phase_target
        return ThetaPair(
            cmath.rect(scale * self.theta1_mag, arg_theta1),
            cmath.rect(scale * self.theta2_mag, arg_theta2),
        )


def condition_amplitudes(branch: int, j: int = 0) -> OptimalCondition:
    if branch not in (1, 2):
        raise DomainError(f"branch must be 1 or 2, got {branch}")
    if int(j) != j or j < 0:
        raise DomainError(f"winding must be a non-negative integer, got {j}")
    s = solve_ratio_quartic()[branch - 1]
    cos12 = _cos_theta12(s)
    if not -1.0 <= cos12 <= 1.0:
        raise ConsistencyError(f"cos θ12 = {cos12} outside [-1, 1]")
    theta12 = math.acos(cos12) + 2 * j * math.pi
    theta1 = theta12 / math.sqrt(1 + s**2)
    return OptimalCondition(
        branch=branch,
        winding=int(j),
        ratio=s,
        theta1_mag=theta1,
        theta2_mag=s * theta1,
    )


def phase_residual(theta: ThetaPair) -> float:
    """Distance of 2·arg θ₁ − arg θ₂ from the nearest (k ± 1/2)π.

    Lies in [0, π/2] and vanishes when the phase condition holds.
    """
    if theta.theta1 == 0 or theta.theta2 == 0:
        raise DomainError("phase residual is undefined for a vanishing θ")
    x = 2 * np.angle(theta.theta1) - np.angle(theta.theta2)
    m = float(np.remainder(x - math.pi / 2, math.pi))
    return min(m, math.pi - m)


def optimal_delays(
    phase1: float,
    phase2: float,
    model: RotorModel,
    max_delay: float,
) -> list[float]:
    """Delays in [0, max_delay] meeting the phase condition at zero detuning.

    arg θ₁ = −φ₁ and arg θ₂ = ω12·τ₀ − φ₂, so the condition holds where
    φ₂ − 2φ₁ − ω12·τ₀ is a half-odd multiple of π.
    """
    if max_delay < 0:
        raise DomainError(f"max_delay must be non-negative, got {max_delay}")
    omega12 = model.omega12
    offset = phase2 - 2 * phase1
    # τ₀ = (offset − (n + 1/2)π)/ω12, n runs downward as τ₀ grows
    n_hi = math.floor(offset / math.pi - 0.5)
    n_lo = math.ceil((offset - omega12 * max_delay) / math.pi - 0.5)
    delays = [
        (offset - (n + 0.5) * math.pi) / omega12
        for n in range(n_hi, n_lo - 1, -1)
    ]
    return [d for d in delays if 0 <= d <= max_delay]
