"""Fixed-step RK4 solution of i·dc/dt = H_I(t)·c in the interaction picture.

Several fields can be integrated together on one time grid; the batch is
carried as an array of shape (batch, n, 1) so each stage is a single
batched matrix product.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from utils.config import (
    NORM_TOLERANCE,
    PROPAGATION_BLOCK_SIZE,
    STEPS_PER_PERIOD,
)

from .errors import DomainError, PropagationError
from .field import FieldConfig, field_time
from .rotor import RotorModel, interaction_blocks

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WavePacket:
    """Interaction-picture coefficients c_J defined at reference_time."""

    coeffs: np.ndarray
    reference_time: float = 0.0
    norm_tolerance: float = field(default=NORM_TOLERANCE, compare=False)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.size < 2 or not np.all(np.isfinite(coeffs)):
            raise DomainError("a wave packet needs finite coefficients")
        drift = abs(1.0 - float(np.sum(np.abs(coeffs) ** 2)))
        if drift > self.norm_tolerance:
            raise DomainError(
                f"wave packet is not normalized (|1 - norm| = {drift:.2e})"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def ground(
        cls, model: RotorModel, reference_time: float = 0.0
    ) -> "WavePacket":
        coeffs = np.zeros(model.n_states, dtype=complex)
        coeffs[abs(model.m)] = 1.0
        return cls(coeffs, reference_time)

    @property
    def n_states(self) -> int:
        return self.coeffs.size

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def populations(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    def phases(self) -> np.ndarray:
        return np.angle(self.coeffs)

    def allclose(self, other: "WavePacket", atol: float = 1e-12) -> bool:
        return self.n_states == other.n_states and bool(
            np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol)
        )


@dataclass(frozen=True)
class StepControl:
    steps_per_period: int = STEPS_PER_PERIOD
    norm_tolerance: float = NORM_TOLERANCE
    block_size: int = PROPAGATION_BLOCK_SIZE
    trajectory_stride: int | None = None

    def __post_init__(self):
        if self.steps_per_period < 1:
            raise DomainError("steps_per_period must be at least 1")
        if not self.norm_tolerance > 0:
            raise DomainError("norm_tolerance must be positive")
        if self.block_size < 1:
            raise DomainError("block_size must be at least 1")
        if self.trajectory_stride is not None and self.trajectory_stride < 1:
            raise DomainError("trajectory_stride must be at least 1")

    def time_step(self, model: RotorModel) -> float:
        """Nominal dt: the fastest transition period over steps_per_period."""
        fastest = float(np.max(model.transition_frequencies()))
        return 2 * math.pi / fastest / self.steps_per_period

    def grid(self, model: RotorModel, span: float) -> tuple[int, float]:
        """Number of steps and the exact step covering span."""
        n_steps = max(1, math.ceil(span / self.time_step(model) - 1e-9))
        return n_steps, span / n_steps


@dataclass(frozen=True)
class PropagationResult:
    final: WavePacket
    norm_drift: float
    dt: float
    n_steps: int
    trajectory: tuple[tuple[float, WavePacket], ...] | None = None


def free_evolve(
    packet: WavePacket, model: RotorModel, t: float
) -> WavePacket:
    """Schrödinger-picture amplitudes c_J·e^{-iE_J t} at time t."""
    if packet.n_states != model.n_states:
        raise DomainError(
            f"packet has {packet.n_states} states, model {model.n_states}"
        )
    phases = np.exp(-1j * model.energies() * t)
    return WavePacket(
        packet.coeffs * phases, float(t), packet.norm_tolerance
    )


def _union_window(configs) -> tuple[float, float]:
    return (
        min(c.t_start for c in configs),
        max(c.t_end for c in configs),
    )


def _rk4_block(coeffs, generators, h, stride, first_step, samples, t0):
    """Advance coeffs through one block of precomputed -iH half-step samples.

    generators has shape (batch, 2m+1, n, n); sample 2i is the start of
    step i, 2i+1 its midpoint.
    """
    n_block = (generators.shape[1] - 1) // 2
    for i in range(n_block):
        g0 = generators[:, 2 * i]
        gh = generators[:, 2 * i + 1]
        g1 = generators[:, 2 * i + 2]
        k1 = g0 @ coeffs
        k2 = gh @ (coeffs + 0.5 * h * k1)
        k3 = gh @ (coeffs + 0.5 * h * k2)
        k4 = g1 @ (coeffs + h * k3)
        coeffs = coeffs + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        step = first_step + i + 1
        if stride is not None and step % stride == 0:
            samples.append((t0 + step * h, coeffs[0, :, 0].copy()))
    return coeffs


def _norm_drift(coeffs: np.ndarray) -> np.ndarray:
    return np.abs(1.0 - np.sum(np.abs(coeffs[..., 0]) ** 2, axis=-1))


def _integrate(
    start: np.ndarray,
    configs,
    model: RotorModel,
    t_from: float,
    t_to: float,
    control: StepControl,
    record: bool = False,
):
    """Core batched integrator; returns final coeffs, drifts, dt, steps."""
    n_steps, dt = control.grid(model, abs(t_to - t_from))
    h = math.copysign(dt, t_to - t_from)
    coeffs = np.array(start, dtype=complex)[:, :, None]
    drift = _norm_drift(coeffs)
    stride = control.trajectory_stride if record else None
    samples = [(t_from, coeffs[0, :, 0].copy())] if record else []

    logger.debug(
        "integrating %d field(s) over %d steps, dt = %.4e",
        len(configs),
        n_steps,
        dt,
    )
    done = 0
    while done < n_steps:
        m = min(control.block_size, n_steps - done)
        times = t_from + h * (done + 0.5 * np.arange(2 * m + 1))
        values = np.stack([field_time(c, times) for c in configs])
        generators = -1j * interaction_blocks(model, values, times)
        coeffs = _rk4_block(
            coeffs, generators, h, stride, done, samples, t_from
        )
        done += m
        drift = np.maximum(drift, _norm_drift(coeffs))

    return coeffs[:, :, 0], drift, dt, n_steps, samples


def _check_initial(initial: WavePacket, model: RotorModel) -> None:
    if initial.n_states != model.n_states:
        raise DomainError(
            f"initial packet has {initial.n_states} states, "
            f"model needs {model.n_states}"
        )


def propagate_batch(
    initial: WavePacket,
    configs,
    model: RotorModel,
    step_control: StepControl | None = None,
    direction: int = 1,
) -> list:
    """Propagate one initial packet under each field on a shared grid.

    Returns one PropagationResult or PropagationError per config, in input
    order. Zero fields return the initial packet unchanged.
    """
    control = step_control or StepControl()
    configs = list(configs)
    if not configs:
        return []
    if direction not in (1, -1):
        raise DomainError(f"direction must be +1 or -1, got {direction}")
    _check_initial(initial, model)

    t_start, t_end = _union_window(configs)
    t_from, t_to = (t_start, t_end) if direction > 0 else (t_end, t_start)
    n_steps, dt = control.grid(model, t_end - t_start)
    active = [i for i, c in enumerate(configs) if c.peak > 0]

    results: list = [
        PropagationResult(
            WavePacket(initial.coeffs, t_to, initial.norm_tolerance),
            0.0,
            dt,
            n_steps,
        )
        for _ in configs
    ]
    if not active:
        return results

    logger.info(
        "propagating %d field(s) over [%.4g, %.4g]",
        len(active),
        t_start,
        t_end,
    )
    start = np.repeat(initial.coeffs[None, :], len(active), axis=0)
    final, drift, dt, n_steps, _ = _integrate(
        start, [configs[i] for i in active], model, t_from, t_to, control
    )
    for row, index in enumerate(active):
        if drift[row] > control.norm_tolerance:
            results[index] = PropagationError(
                dt, float(drift[row]), control.norm_tolerance
            )
            continue
        packet = WavePacket(
            final[row], t_to, norm_tolerance=control.norm_tolerance
        )
        results[index] = PropagationResult(
            packet, float(drift[row]), dt, n_steps
        )
    logger.info("propagation of %d field(s) finished", len(active))
    return results


def propagate_exact(
    initial: WavePacket,
    config: FieldConfig,
    model: RotorModel,
    step_control: StepControl | None = None,
    direction: int = 1,
) -> PropagationResult:
    """Solve the interaction-picture equation across config's window.

    direction = -1 integrates from t_end back to t_start, undoing a forward
    run under the same field. Raises PropagationError when the norm drifts
    beyond the tolerance.
    """
    control = step_control or StepControl()
    if control.trajectory_stride is None:
        result = propagate_batch(initial, [config], model, control, direction)
        outcome = result[0]
        if isinstance(outcome, PropagationError):
            raise outcome
        return outcome

    if direction not in (1, -1):
        raise DomainError(f"direction must be +1 or -1, got {direction}")
    _check_initial(initial, model)
    t_from, t_to = (
        (config.t_start, config.t_end)
        if direction > 0
        else (config.t_end, config.t_start)
    )
    final, drift, dt, n_steps, samples = _integrate(
        initial.coeffs[None, :],
        [config],
        model,
        t_from,
        t_to,
        control,
        record=True,
    )
    if drift[0] > control.norm_tolerance:
        raise PropagationError(dt, float(drift[0]), control.norm_tolerance)
    # loose tolerance for intermediate samples, drift is reported separately
    trajectory = tuple(
        (float(t), WavePacket(c, float(t), norm_tolerance=1.0))
        for t, c in samples
    )
    packet = WavePacket(final[0], t_to, norm_tolerance=control.norm_tolerance)
    return PropagationResult(packet, float(drift[0]), dt, n_steps, trajectory)
