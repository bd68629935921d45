"""Parameter sweeps over bandwidth, detuning and delay.

Grid points are grouped into chunks of equal bandwidth. Each chunk runs on
a QThreadPool worker and shares one time grid, so its exact propagations
are batched. Records are gathered in point order, independent of
scheduling.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from PySide6.QtCore import QMutex, QMutexLocker, Qt, QThreadPool

from utils.config import (
    REVIVAL_GRID_POINTS,
    SWEEP_CHUNK_SIZE,
    SWEEP_MAX_WORKERS,
    WINDOW_N_SIGMA,
)
from utils.qt_utils import ensure_application

from .errors import (
    ConsistencyError,
    DomainError,
    PropagationError,
    QuadratureError,
)
from .field import FieldConfig, pulses_from_targets, theta_integrals
from .magnus import first_order_wavepacket
from .observables import max_orientation_over_revival, population_phase_report
from .optimum import OptimalCondition
from .propagator import StepControl, WavePacket, propagate_batch
from .rotor import RotorModel
from .workers import SweepChunkWorker

logger = logging.getLogger(__name__)

AXIS_NAMES = ("bandwidth", "detuning", "delay")
DETUNING_UNITS = ("tau_prime", "omega01", "absolute")

# failures confined to one grid point
POINT_ERRORS = (
    PropagationError,
    QuadratureError,
    DomainError,
    ConsistencyError,
)


def detuning_scale(model: RotorModel, detuning_unit: str) -> float:
    """Internal frequency per display unit of detuning.

    "absolute" detunings are already in internal units (B/ħ).
    """
    if detuning_unit not in DETUNING_UNITS:
        raise DomainError(f"unknown detuning unit {detuning_unit!r}")
    return {
        "tau_prime": 1.0 / model.tau_prime,
        "omega01": model.omega01,
        "absolute": 1.0,
    }[detuning_unit]


def display_to_internal(
    model: RotorModel,
    detuning_unit: str,
    bandwidth: float,
    detuning: float,
    delay: float,
) -> dict:
    """Convert bandwidth (1/τ′), detuning and delay (τ′) to internal units."""
    return {
        "bandwidth": bandwidth / model.tau_prime,
        "detuning": detuning * detuning_scale(model, detuning_unit),
        "delay": delay * model.tau_prime,
    }


class SweepMode(str, Enum):
    EXACT = "exact"
    ANALYTIC = "analytic"
    BOTH = "both"

    @property
    def evaluations(self) -> tuple[str, ...]:
        if self is SweepMode.BOTH:
            return (SweepMode.EXACT.value, SweepMode.ANALYTIC.value)
        return (self.value,)


@dataclass(frozen=True)
class SweepAxis:
    """name start stop n_points, in display units."""

    name: str
    start: float
    stop: float
    n_points: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise DomainError(
                f"unknown sweep axis {self.name!r}, expected one of "
                f"{', '.join(AXIS_NAMES)}"
            )
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise DomainError(
                f"axis {self.name} needs at least 2 points, "
                f"got {self.n_points}"
            )
        if self.name == "bandwidth" and not min(self.start, self.stop) > 0:
            raise DomainError("bandwidth axis must stay positive")

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        parts = text.split()
        if len(parts) != 4:
            raise DomainError(
                f"axis must read 'name start stop n', got {text!r}"
            )
        name, start, stop, n = parts
        try:
            bounds = float(start), float(stop), int(n)
        except ValueError as e:
            raise DomainError(f"non-numeric axis bounds in {text!r}") from e
        return cls(name, *bounds)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)

    def __str__(self) -> str:
        return f"{self.name} {self.start!r} {self.stop!r} {self.n_points}"


@dataclass(frozen=True)
class SweepConfig:
    condition: OptimalCondition
    axis1: SweepAxis
    axis2: SweepAxis | None = None
    mode: SweepMode = SweepMode.BOTH
    bandwidth: float = 0.02
    detuning: float = 0.0
    delay: float = 0.0
    phase1: float = -math.pi / 2
    phase2: float = -math.pi / 2
    amplitude_scale: float = 1.0
    detuning_unit: str = "tau_prime"
    n_sigma: float = WINDOW_N_SIGMA
    step_control: StepControl = field(default_factory=StepControl)
    revival_grid: int = REVIVAL_GRID_POINTS
    workers: int = SWEEP_MAX_WORKERS
    chunk_size: int = SWEEP_CHUNK_SIZE

    def __post_init__(self):
        object.__setattr__(self, "mode", SweepMode(self.mode))
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise DomainError(f"axis {self.axis1.name} is swept twice")
        if self.detuning_unit not in DETUNING_UNITS:
            raise DomainError(
                f"detuning_unit must be one of {', '.join(DETUNING_UNITS)}"
            )
        if not self.bandwidth > 0:
            raise DomainError(f"bandwidth must be positive: {self.bandwidth}")
        if not self.amplitude_scale >= 0:
            raise DomainError("amplitude_scale must be non-negative")
        if self.workers < 1 or self.chunk_size < 1:
            raise DomainError("workers and chunk_size must be at least 1")

    @property
    def axes(self) -> tuple[SweepAxis, ...]:
        if self.axis2 is None:
            return (self.axis1,)
        return (self.axis1, self.axis2)

    @property
    def shape(self) -> tuple[int, ...]:
        """Grid shape, slowest axis first: (n2, n1) or (n1,)."""
        return tuple(a.n_points for a in reversed(self.axes))

    def grid_points(self) -> list[tuple[float, float | None]]:
        """(axis1, axis2) display values, axis1 varying fastest."""
        values1 = self.axis1.values().tolist()
        if self.axis2 is None:
            return [(v, None) for v in values1]
        return [(v1, v2) for v2 in self.axis2.values() for v1 in values1]

    def parameters(self, model: RotorModel, point) -> dict:
        """Internal bandwidth, detuning and delay for one grid point."""
        display = {
            "bandwidth": self.bandwidth,
            "detuning": self.detuning,
            "delay": self.delay,
        }
        for axis, value in zip(self.axes, point):
            display[axis.name] = float(value)
        return display_to_internal(model, self.detuning_unit, **display)

    def build_field(self, model: RotorModel, point) -> FieldConfig:
        params = self.parameters(model, point)
        return pulses_from_targets(
            self.condition.theta_pair(scale=self.amplitude_scale),
            model,
            detuning=params["detuning"],
            bandwidth=params["bandwidth"],
            delay=params["delay"],
            phase1=self.phase1,
            phase2=self.phase2,
            n_sigma=self.n_sigma,
        )


@dataclass(frozen=True)
class SweepRecord:
    index: int
    axis1: float
    axis2: float | None
    mode: str
    max_orientation: float
    populations: tuple[float, ...]
    phases: tuple[float, ...]
    overlap_warning: bool = False
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    records: tuple[SweepRecord, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.config.shape

    def for_mode(self, mode: str) -> list[SweepRecord]:
        return [r for r in self.records if r.mode == mode]

    def failures(self) -> list[SweepRecord]:
        return [r for r in self.records if not r.ok]

    def grid(self, mode: str, quantity: str = "max_orientation"):
        """Values of one quantity arranged on the sweep grid."""
        records = self.for_mode(mode)
        if not records:
            raise DomainError(f"sweep has no {mode!r} records")
        values = np.array([getattr(r, quantity) for r in records], float)
        return values.reshape(self.shape)


@dataclass(frozen=True)
class _Chunk:
    indices: tuple[int, ...]
    fields: tuple[FieldConfig, ...]


def _failed(index, point, mode, n_states, message, overlap=False):
    nan = tuple([math.nan] * n_states)
    return SweepRecord(
        index, point[0], point[1], mode, math.nan, nan, nan, overlap, message
    )


def _record(index, point, mode, packet, model, config, overlap):
    peak, _ = max_orientation_over_revival(packet, model, config.revival_grid)
    report = population_phase_report(packet)
    return SweepRecord(
        index,
        point[0],
        point[1],
        mode,
        peak,
        tuple(report.populations.tolist()),
        tuple(report.phases.tolist()),
        overlap,
    )


def _evaluate_chunk(chunk: _Chunk, points, config, model) -> list:
    records = []
    modes = config.mode.evaluations
    exact = {}
    if SweepMode.EXACT.value in modes:
        ground = WavePacket.ground(model)
        outcomes = propagate_batch(
            ground, chunk.fields, model, config.step_control
        )
        exact = dict(zip(chunk.indices, outcomes))

    for index, fld in zip(chunk.indices, chunk.fields):
        point = points[index]
        for mode in modes:
            try:
                if mode == SweepMode.EXACT.value:
                    outcome = exact[index]
                    if isinstance(outcome, PropagationError):
                        raise outcome
                    packet = outcome.final
                else:
                    thetas = theta_integrals(fld, model)
                    packet = first_order_wavepacket(
                        thetas, fld.t_end, model.n_states
                    )
                record = _record(
                    index,
                    point,
                    mode,
                    packet,
                    model,
                    config,
                    fld.overlap_warning,
                )
            except POINT_ERRORS as e:
                logger.warning(
                    "sweep point %d (%s) failed: %s", index, mode, e
                )
                message = (
                    str(e)
                    if isinstance(e, PropagationError)
                    else f"{type(e).__name__}: {e}"
                )
                record = _failed(
                    index,
                    point,
                    mode,
                    model.n_states,
                    message,
                    fld.overlap_warning,
                )
            records.append(record)
    return records


def _make_chunks(
    indices: list[int], fields: dict, chunk_size: int
) -> list[_Chunk]:
    by_bandwidth: dict[float, list[int]] = {}
    for index in indices:
        key = fields[index].pulses[0].bandwidth
        by_bandwidth.setdefault(key, []).append(index)
    chunks = []
    for group in by_bandwidth.values():
        for start in range(0, len(group), chunk_size):
            members = tuple(group[start : start + chunk_size])
            chunks.append(_Chunk(members, tuple(fields[i] for i in members)))
    return chunks


class _Collector:
    """Receives worker signals on pool threads."""

    def __init__(self, n_chunks: int):
        self.mutex = QMutex()
        self.results: dict[int, list] = {}
        self.errors: dict[int, str] = {}
        self.n_chunks = n_chunks

    def on_finished(self, chunk_id: int, records):
        with QMutexLocker(self.mutex):
            self.results[chunk_id] = records
            done = len(self.results) + len(self.errors)
        logger.info(
            "sweep chunk %d done (%d/%d)", chunk_id, done, self.n_chunks
        )

    def on_error(self, chunk_id: int, message: str):
        with QMutexLocker(self.mutex):
            self.errors[chunk_id] = message
        logger.warning("sweep chunk %d failed: %s", chunk_id, message)


def run_sweep(config: SweepConfig, model: RotorModel) -> SweepResult:
    """Evaluate every grid point; failures are recorded per point."""
    ensure_application()
    points = config.grid_points()
    modes = config.mode.evaluations
    logger.info(
        "sweep over %s: %d point(s), mode %s",
        " x ".join(a.name for a in config.axes),
        len(points),
        config.mode.value,
    )

    fields: dict[int, FieldConfig] = {}
    by_index: dict[int, list[SweepRecord]] = {}
    for index, point in enumerate(points):
        try:
            fields[index] = config.build_field(model, point)
        except DomainError as e:
            logger.warning("sweep point %d rejected: %s", index, e)
            by_index[index] = [
                _failed(index, point, mode, model.n_states, str(e))
                for mode in modes
            ]

    overlapping = sum(f.overlap_warning for f in fields.values())
    if overlapping:
        logger.warning(
            "%d of %d sweep point(s) have overlapping pulse spectra",
            overlapping,
            len(points),
        )

    chunks = _make_chunks(sorted(fields), fields, config.chunk_size)
    collector = _Collector(len(chunks))
    pool = QThreadPool()
    pool.setMaxThreadCount(config.workers)
    workers = []
    for chunk_id, chunk in enumerate(chunks):
        worker = SweepChunkWorker(
            chunk_id,
            lambda chunk=chunk: _evaluate_chunk(chunk, points, config, model),
        )
        worker.signals.finished.connect(
            collector.on_finished, Qt.DirectConnection
        )
        worker.signals.error.connect(collector.on_error, Qt.DirectConnection)
        workers.append(worker)
        pool.start(worker)
    pool.waitForDone()

    for chunk_id, chunk in enumerate(chunks):
        if chunk_id in collector.results:
            for record in collector.results[chunk_id]:
                by_index.setdefault(record.index, []).append(record)
            continue
        message = collector.errors.get(chunk_id, "chunk produced no result")
        for index in chunk.indices:
            by_index[index] = [
                _failed(
                    index,
                    points[index],
                    mode,
                    model.n_states,
                    message,
                    fields[index].overlap_warning,
                )
                for mode in modes
            ]

    records = tuple(r for index in range(len(points)) for r in by_index[index])
    failed = sum(not r.ok for r in records)
    if failed:
        logger.warning("%d of %d sweep record(s) failed", failed, len(records))
    logger.info("sweep finished with %d record(s)", len(records))
    return SweepResult(config, records)
