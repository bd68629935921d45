"""Rigid-rotor model: energies, dipole couplings and the unit system.

Internal units set ħ = 1. With the defaults B = 1 and mu = 1 the ladder
frequencies are ω01 = 2 and ω12 = 4, τ′ = π/4 and the revival is π.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

from utils.config import HCN_DIPOLE_DEBYE, HCN_ROTATIONAL_CONSTANT_GHZ

from .errors import DomainError

DEBYE = 1e-21 / constants.c  # C·m


def cos_matrix_element(J: int, J_prime: int, M: int = 0) -> float:
    """Return ⟨J'M|cosθ|JM⟩."""
    if J < 0 or J_prime < 0:
        raise DomainError(
            f"negative rotational quantum number ({J}, {J_prime})"
        )
    if abs(M) > min(J, J_prime):
        raise DomainError(f"|M| = {abs(M)} exceeds min(J, J')")
    if abs(J - J_prime) != 1:
        return 0.0
    lower = min(J, J_prime)
    return math.sqrt(
        ((lower + 1) ** 2 - M**2) / ((2 * lower + 1) * (2 * lower + 3))
    )


@dataclass(frozen=True)
class RotorModel:
    B: float = 1.0
    mu: float = 1.0
    j_max: int = 2
    m: int = 0

    def __post_init__(self):
        if not self.B > 0:
            raise DomainError(
                f"rotational constant must be positive, got {self.B}"
            )
        if not self.mu > 0:
            raise DomainError(
                f"dipole moment must be positive, got {self.mu}"
            )
        if int(self.j_max) != self.j_max or self.j_max < 2:
            raise DomainError(
                f"j_max must be an integer >= 2, got {self.j_max}"
            )
        if abs(self.m) > self.j_max:
            raise DomainError(f"|m| = {abs(self.m)} exceeds j_max")

    @property
    def n_states(self) -> int:
        return self.j_max + 1

    @property
    def omega01(self) -> float:
        return float(self.transition_frequencies()[0])

    @property
    def omega12(self) -> float:
        return float(self.transition_frequencies()[1])

    @property
    def tau_prime(self) -> float:
        """Single-cycle time unit τ′ = π/(2ω01)."""
        return math.pi / (2 * self.omega01)

    @property
    def revival_period(self) -> float:
        return math.pi / self.B

    def energies(self) -> np.ndarray:
        J = np.arange(self.n_states, dtype=float)
        return self.B * J * (J + 1)

    def transition_frequencies(self) -> np.ndarray:
        """ω_{J,J+1} for J = 0 .. j_max-1."""
        return np.diff(self.energies())

    def cos_elements(self) -> np.ndarray:
        """⟨J+1 m|cosθ|J m⟩ for J = 0 .. j_max-1 (zero below |m|)."""
        return np.array(
            [
                (
                    cos_matrix_element(J, J + 1, self.m)
                    if J >= abs(self.m)
                    else 0.0
                )
                for J in range(self.j_max)
            ]
        )

    def couplings(self) -> np.ndarray:
        """Transition dipoles μ_{J+1,J} = μ⟨J+1|cosθ|J⟩."""
        return self.mu * self.cos_elements()

    def cos_matrix(self) -> np.ndarray:
        elements = self.cos_elements()
        return np.diag(elements, 1) + np.diag(elements, -1)


def rotor_energies(model: RotorModel) -> list[float]:
    return model.energies().tolist()


def interaction_blocks(
    model: RotorModel, field_values: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """Interaction-picture Hamiltonians for a grid of (field, time) samples.

    Returns an array of shape field_values.shape + (n, n).
    """
    field_values = np.asarray(field_values, dtype=float)
    times = np.broadcast_to(
        np.asarray(times, dtype=float), field_values.shape
    )
    n = model.n_states
    upper = (
        -model.couplings()
        * field_values[..., None]
        * np.exp(-1j * model.transition_frequencies() * times[..., None])
    )
    blocks = np.zeros(field_values.shape + (n, n), dtype=complex)
    idx = np.arange(n - 1)
    blocks[..., idx, idx + 1] = upper
    blocks[..., idx + 1, idx] = upper.conj()
    return blocks


def interaction_hamiltonian(
    model: RotorModel, field_value: float, t: float
) -> np.ndarray:
    """H_I(t) for one field sample, no rotating-wave approximation."""
    return interaction_blocks(model, np.float64(field_value), np.float64(t))


@dataclass(frozen=True)
class UnitSystem:
    """Maps internal units onto physical ones for reporting.

    energy_scale_ghz is the physical rotational constant B/h and
    dipole_scale_debye the permanent dipole moment; they correspond to the
    model's B and mu respectively.
    """

    energy_scale_ghz: float = HCN_ROTATIONAL_CONSTANT_GHZ
    dipole_scale_debye: float = HCN_DIPOLE_DEBYE

    def __post_init__(self):
        if not (self.energy_scale_ghz > 0 and self.dipole_scale_debye > 0):
            raise DomainError("unit scales must be positive")

    def energy_unit_joule(self, model: RotorModel) -> float:
        return constants.h * self.energy_scale_ghz * 1e9 / model.B

    def time_unit_ps(self, model: RotorModel) -> float:
        return constants.hbar / self.energy_unit_joule(model) * 1e12

    def field_unit_kv_per_cm(self, model: RotorModel) -> float:
        dipole_unit = self.dipole_scale_debye * DEBYE / model.mu
        return self.energy_unit_joule(model) / dipole_unit * 1e-5

    def tau_prime_ps(self, model: RotorModel) -> float:
        return model.tau_prime * self.time_unit_ps(model)

    def revival_period_ps(self, model: RotorModel) -> float:
        return model.revival_period * self.time_unit_ps(model)

    def time_from_ps(self, value_ps: float, model: RotorModel) -> float:
        return value_ps / self.time_unit_ps(model)

    def angular_frequency_from_thz(
        self, value_thz: float, model: RotorModel
    ) -> float:
        """Internal angular frequency for an ordinary frequency in THz."""
        return 2 * math.pi * value_thz * self.time_unit_ps(model)

    def describe(self, model: RotorModel) -> dict:
        return {
            "energy_scale_ghz": self.energy_scale_ghz,
            "dipole_scale_debye": self.dipole_scale_debye,
            "time_unit_ps": self.time_unit_ps(model),
            "tau_prime_ps": self.tau_prime_ps(model),
            "revival_period_ps": self.revival_period_ps(model),
            "field_unit_kv_per_cm": self.field_unit_kv_per_cm(model),
        }
