"""INI run configuration: parsing, validation and resolved snapshots.

Physical inputs are given in internal units; bandwidth in 1/τ′, delay in
τ′ and detuning in 1/τ′ (or ω01 with detuning_unit = omega01, or B/ħ
with detuning_unit = absolute). The optional delay_ps, detuning_thz and
bandwidth_thz keys override them through the [units] section.
"""

import configparser
import logging
import math
import os
import re
from dataclasses import dataclass, field

from core.errors import DomainError
from core.field import FieldConfig, PulseSpec, pulses_from_targets
from core.optimum import OptimalCondition, condition_amplitudes
from core.propagator import StepControl
from core.rotor import RotorModel, UnitSystem
from core.sweep import (
    DETUNING_UNITS,
    SweepAxis,
    SweepConfig,
    SweepMode,
    detuning_scale,
    display_to_internal,
)
from utils.config import (
    NORM_TOLERANCE,
    PROPAGATION_BLOCK_SIZE,
    RECIPES_DIR,
    REVIVAL_GRID_POINTS,
    STEPS_PER_PERIOD,
    SWEEP_CHUNK_SIZE,
    SWEEP_MAX_WORKERS,
    WINDOW_N_SIGMA,
)

logger = logging.getLogger(__name__)

TRACE_POINTS = 2001
COMPARE_BANDWIDTHS = (0.5, 0.2, 0.1, 0.05, 0.02)

_PI_MULTIPLE = re.compile(
    r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi"
    r"(?:\s*/\s*(\d+(?:\.\d*)?))?\s*$"
)


class ConfigError(ValueError):
    """Invalid run configuration, located by file and line."""

    def __init__(self, message: str, path: str | None = None, line=None):
        location = path or "<config>"
        if line is not None:
            location = f"{location}:{line}"
        super().__init__(f"{location}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class FieldSettings:
    branch: int = 1
    winding: int = 0
    amplitude_scale: float = 1.0
    bandwidth: float = 0.02
    detuning: float = 0.0
    delay: float = 0.0
    phase1: float = -math.pi / 2
    phase2: float = -math.pi / 2
    n_sigma: float = WINDOW_N_SIGMA
    pulses: tuple[PulseSpec, ...] | None = None


@dataclass(frozen=True)
class ObservableSettings:
    revival_grid: int = REVIVAL_GRID_POINTS
    trace_points: int = TRACE_POINTS
    trace_periods: float = 1.0


@dataclass(frozen=True)
class SweepSettings:
    axis1: SweepAxis
    axis2: SweepAxis | None = None
    mode: SweepMode = SweepMode.BOTH
    workers: int = SWEEP_MAX_WORKERS
    chunk_size: int = SWEEP_CHUNK_SIZE


@dataclass(frozen=True)
class CompareSettings:
    axis: str = "bandwidth"
    values: tuple[float, ...] = COMPARE_BANDWIDTHS


@dataclass(frozen=True)
class RunSettings:
    model: RotorModel = field(default_factory=RotorModel)
    units: UnitSystem = field(default_factory=UnitSystem)
    field_settings: FieldSettings = field(default_factory=FieldSettings)
    propagation: StepControl = field(default_factory=StepControl)
    observables: ObservableSettings = field(
        default_factory=ObservableSettings
    )
    detuning_unit: str = "tau_prime"
    sweep: SweepSettings | None = None
    compare: CompareSettings | None = None
    source: str | None = None

    def condition(self) -> OptimalCondition:
        fs = self.field_settings
        return condition_amplitudes(fs.branch, fs.winding)

    def internal_parameters(self, **overrides) -> dict:
        values = {
            "bandwidth": self.field_settings.bandwidth,
            "detuning": self.field_settings.detuning,
            "delay": self.field_settings.delay,
        }
        values.update(overrides)
        return display_to_internal(self.model, self.detuning_unit, **values)

    def build_field(self, **overrides) -> FieldConfig:
        """Two-pulse field from the condition design or explicit pulses.

        overrides replace bandwidth, detuning or delay (display units).
        """
        fs = self.field_settings
        if fs.pulses is not None:
            return FieldConfig.from_pulses(fs.pulses, fs.n_sigma)
        params = self.internal_parameters(**overrides)
        return pulses_from_targets(
            self.condition().theta_pair(scale=fs.amplitude_scale),
            self.model,
            detuning=params["detuning"],
            bandwidth=params["bandwidth"],
            delay=params["delay"],
            phase1=fs.phase1,
            phase2=fs.phase2,
            n_sigma=fs.n_sigma,
        )

    def sweep_config(self, mode: str | None = None) -> SweepConfig:
        if self.sweep is None:
            raise ConfigError("no [sweep] section", self.source)
        fs = self.field_settings
        return SweepConfig(
            condition=self.condition(),
            axis1=self.sweep.axis1,
            axis2=self.sweep.axis2,
            mode=SweepMode(mode) if mode else self.sweep.mode,
            bandwidth=fs.bandwidth,
            detuning=fs.detuning,
            delay=fs.delay,
            phase1=fs.phase1,
            phase2=fs.phase2,
            amplitude_scale=fs.amplitude_scale,
            detuning_unit=self.detuning_unit,
            n_sigma=fs.n_sigma,
            step_control=self.propagation,
            revival_grid=self.observables.revival_grid,
            workers=self.sweep.workers,
            chunk_size=self.sweep.chunk_size,
        )

    def to_parser(self) -> configparser.ConfigParser:
        """Fully resolved configuration, physical overrides folded in."""
        parser = configparser.ConfigParser()
        m, u, fs = self.model, self.units, self.field_settings
        parser["rotor"] = {
            "B": repr(m.B),
            "mu": repr(m.mu),
            "j_max": str(m.j_max),
            "m": str(m.m),
        }
        parser["units"] = {
            "energy_scale_ghz": repr(u.energy_scale_ghz),
            "dipole_scale_debye": repr(u.dipole_scale_debye),
        }
        parser["field"] = {
            "branch": str(fs.branch),
            "winding": str(fs.winding),
            "amplitude_scale": repr(fs.amplitude_scale),
            "bandwidth": repr(fs.bandwidth),
            "detuning": repr(fs.detuning),
            "delay": repr(fs.delay),
            "phase1": repr(fs.phase1),
            "phase2": repr(fs.phase2),
            "n_sigma": repr(fs.n_sigma),
            "detuning_unit": self.detuning_unit,
        }
        for k, pulse in enumerate(fs.pulses or (), start=1):
            parser[f"pulse{k}"] = {
                "amplitude": repr(pulse.amplitude),
                "center_freq": repr(pulse.center_freq),
                "bandwidth": repr(pulse.bandwidth),
                "phase": repr(pulse.phase),
                "center_time": repr(pulse.center_time),
            }
        p = self.propagation
        parser["propagation"] = {
            "steps_per_period": str(p.steps_per_period),
            "norm_tolerance": repr(p.norm_tolerance),
            "block_size": str(p.block_size),
            "trajectory_stride": str(p.trajectory_stride or 0),
        }
        o = self.observables
        parser["observables"] = {
            "revival_grid": str(o.revival_grid),
            "trace_points": str(o.trace_points),
            "trace_periods": repr(o.trace_periods),
        }
        if self.sweep is not None:
            s = self.sweep
            parser["sweep"] = {
                "mode": s.mode.value,
                "axis1": str(s.axis1),
                "workers": str(s.workers),
                "chunk_size": str(s.chunk_size),
            }
            if s.axis2 is not None:
                parser["sweep"]["axis2"] = str(s.axis2)
        if self.compare is not None:
            parser["compare"] = {
                "axis": self.compare.axis,
                "values": " ".join(repr(v) for v in self.compare.values),
            }
        return parser

    def write_snapshot(self, path: str) -> str:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            self.to_parser().write(f)
        logger.info("wrote %s", path)
        return path


def resolve_config_path(name: str) -> str:
    """A path as given, else a shipped recipe by name."""
    if os.path.isfile(name):
        return name
    candidates = [
        os.path.join(RECIPES_DIR, name),
        os.path.join(RECIPES_DIR, f"{name}.cfg"),
    ]
    for candidate in candidates:
        if os.path.isfile(candidate):
            return candidate
    raise ConfigError("configuration file not found", name)


def _key_line(path: str | None, section: str, key: str) -> int | None:
    """Line number of key inside section, for diagnostics."""
    if path is None or not os.path.isfile(path):
        return None
    current = None
    with open(path, encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.strip()
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
            elif current == section and re.match(
                rf"{re.escape(key)}\s*[=:]", line, re.IGNORECASE
            ):
                return number
    return None


def parse_angle(text: str) -> float:
    """Float, or a multiple of pi such as '-pi/2' or '0.5*pi'."""
    match = _PI_MULTIPLE.match(text)
    if match is None:
        return float(text)
    factor, divisor = match.group(1), match.group(2)
    if factor in ("", "+"):
        scale = 1.0
    elif factor == "-":
        scale = -1.0
    else:
        scale = float(factor)
    return scale * math.pi / (float(divisor) if divisor else 1.0)


class _Reader:
    """Typed access to one parsed file with located errors."""

    def __init__(self, parser: configparser.ConfigParser, path: str | None):
        self.parser = parser
        self.path = path

    def error(self, section: str, key: str, message: str) -> ConfigError:
        return ConfigError(
            f"[{section}] {key}: {message}",
            self.path,
            _key_line(self.path, section, key),
        )

    def has(self, section: str, key: str | None = None) -> bool:
        if key is None:
            return self.parser.has_section(section)
        return self.parser.has_option(section, key)

    def get(self, section: str, key: str, convert, default):
        if not self.has(section, key):
            return default
        raw = self.parser.get(section, key)
        try:
            return convert(raw)
        except (TypeError, ValueError) as e:
            raise self.error(section, key, f"invalid value {raw!r}") from e

    def check_keys(self, section: str, allowed) -> None:
        if not self.has(section):
            return
        for key in self.parser.options(section):
            if key not in allowed:
                raise self.error(section, key, "unknown key")


PULSE_KEYS = (
    "amplitude",
    "center_freq",
    "bandwidth",
    "phase",
    "center_time",
)

_SECTIONS = {
    "rotor": ("b", "mu", "j_max", "m"),
    "units": ("energy_scale_ghz", "dipole_scale_debye"),
    "field": (
        "branch",
        "winding",
        "amplitude_scale",
        "bandwidth",
        "detuning",
        "delay",
        "phase1",
        "phase2",
        "n_sigma",
        "detuning_unit",
        "delay_ps",
        "detuning_thz",
        "bandwidth_thz",
    ),
    "pulse1": PULSE_KEYS,
    "pulse2": PULSE_KEYS,
    "propagation": (
        "steps_per_period",
        "norm_tolerance",
        "block_size",
        "trajectory_stride",
    ),
    "observables": ("revival_grid", "trace_points", "trace_periods"),
    "sweep": (
        "mode",
        "axis1",
        "axis2",
        "workers",
        "chunk_size",
        "detuning_unit",
    ),
    "compare": ("axis", "values"),
}


def _float_list(text: str) -> tuple[float, ...]:
    values = tuple(float(v) for v in text.replace(",", " ").split())
    if not values:
        raise ValueError("empty list")
    return values


def _read_rotor(r: _Reader) -> RotorModel:
    try:
        return RotorModel(
            B=r.get("rotor", "B", float, 1.0),
            mu=r.get("rotor", "mu", float, 1.0),
            j_max=r.get("rotor", "j_max", int, 2),
            m=r.get("rotor", "m", int, 0),
        )
    except DomainError as e:
        raise ConfigError(f"[rotor] {e}", r.path) from e


def _read_units(r: _Reader) -> UnitSystem:
    try:
        return UnitSystem(
            energy_scale_ghz=r.get(
                "units", "energy_scale_ghz", float, UnitSystem.energy_scale_ghz
            ),
            dipole_scale_debye=r.get(
                "units",
                "dipole_scale_debye",
                float,
                UnitSystem.dipole_scale_debye,
            ),
        )
    except DomainError as e:
        raise ConfigError(f"[units] {e}", r.path) from e


def _read_pulses(r: _Reader) -> tuple[PulseSpec, ...] | None:
    sections = [s for s in ("pulse1", "pulse2") if r.has(s)]
    if not sections:
        return None
    pulses = []
    for section in sections:
        try:
            pulses.append(
                PulseSpec(
                    amplitude=r.get(section, "amplitude", float, 0.0),
                    center_freq=r.get(section, "center_freq", float, 2.0),
                    bandwidth=r.get(section, "bandwidth", float, 0.05),
                    phase=r.get(section, "phase", parse_angle, 0.0),
                    center_time=r.get(section, "center_time", float, 0.0),
                )
            )
        except DomainError as e:
            raise ConfigError(f"[{section}] {e}", r.path) from e
    return tuple(pulses)


def _read_field(
    r: _Reader, model: RotorModel, units: UnitSystem, detuning_unit: str
) -> FieldSettings:
    s = "field"
    branch = r.get(s, "branch", int, 1)
    if branch not in (1, 2):
        raise r.error(s, "branch", f"must be 1 or 2, got {branch}")
    winding = r.get(s, "winding", int, 0)
    if winding < 0:
        raise r.error(s, "winding", "must be non-negative")
    bandwidth = r.get(s, "bandwidth", float, 0.02)
    detuning = r.get(s, "detuning", float, 0.0)
    delay = r.get(s, "delay", float, 0.0)

    tau_prime = model.tau_prime
    if r.has(s, "bandwidth_thz"):
        omega = units.angular_frequency_from_thz(
            r.get(s, "bandwidth_thz", float, None), model
        )
        bandwidth = omega * tau_prime
    if r.has(s, "detuning_thz"):
        omega = units.angular_frequency_from_thz(
            r.get(s, "detuning_thz", float, None), model
        )
        detuning = omega / detuning_scale(model, detuning_unit)
    if r.has(s, "delay_ps"):
        delay = units.time_from_ps(r.get(s, "delay_ps", float, None), model)
        delay /= tau_prime
    if not bandwidth > 0:
        raise r.error(s, "bandwidth", "must be positive")

    amplitude_scale = r.get(s, "amplitude_scale", float, 1.0)
    if not amplitude_scale >= 0:
        raise r.error(s, "amplitude_scale", "must be non-negative")
    return FieldSettings(
        branch=branch,
        winding=winding,
        amplitude_scale=amplitude_scale,
        bandwidth=bandwidth,
        detuning=detuning,
        delay=delay,
        phase1=r.get(s, "phase1", parse_angle, -math.pi / 2),
        phase2=r.get(s, "phase2", parse_angle, -math.pi / 2),
        n_sigma=r.get(s, "n_sigma", float, WINDOW_N_SIGMA),
        pulses=_read_pulses(r),
    )


def _read_propagation(r: _Reader) -> StepControl:
    s = "propagation"
    stride = r.get(s, "trajectory_stride", int, 0)
    try:
        return StepControl(
            steps_per_period=r.get(
                s, "steps_per_period", int, STEPS_PER_PERIOD
            ),
            norm_tolerance=r.get(s, "norm_tolerance", float, NORM_TOLERANCE),
            block_size=r.get(s, "block_size", int, PROPAGATION_BLOCK_SIZE),
            trajectory_stride=stride or None,
        )
    except DomainError as e:
        raise ConfigError(f"[{s}] {e}", r.path) from e


def _read_observables(r: _Reader) -> ObservableSettings:
    s = "observables"
    settings = ObservableSettings(
        revival_grid=r.get(s, "revival_grid", int, REVIVAL_GRID_POINTS),
        trace_points=r.get(s, "trace_points", int, TRACE_POINTS),
        trace_periods=r.get(s, "trace_periods", float, 1.0),
    )
    if settings.revival_grid < 2:
        raise r.error(s, "revival_grid", "needs at least 2 points")
    if settings.trace_points < 2:
        raise r.error(s, "trace_points", "needs at least 2 points")
    if not settings.trace_periods > 0:
        raise r.error(s, "trace_periods", "must be positive")
    return settings


def _read_axis(r: _Reader, key: str) -> SweepAxis | None:
    if not r.has("sweep", key):
        return None
    try:
        return SweepAxis.parse(r.parser.get("sweep", key))
    except DomainError as e:
        raise r.error("sweep", key, str(e)) from e


def _read_sweep(r: _Reader) -> SweepSettings | None:
    s = "sweep"
    if not r.has(s):
        return None
    axis1 = _read_axis(r, "axis1")
    if axis1 is None:
        raise ConfigError("[sweep] needs axis1", r.path)
    axis2 = _read_axis(r, "axis2")
    if axis2 is not None and axis2.name == axis1.name:
        raise r.error(s, "axis2", f"repeats axis {axis1.name}")
    mode = r.get(s, "mode", SweepMode, SweepMode.BOTH)
    workers = r.get(s, "workers", int, SWEEP_MAX_WORKERS)
    chunk_size = r.get(s, "chunk_size", int, SWEEP_CHUNK_SIZE)
    if workers < 1:
        raise r.error(s, "workers", "must be at least 1")
    if chunk_size < 1:
        raise r.error(s, "chunk_size", "must be at least 1")
    return SweepSettings(axis1, axis2, mode, workers, chunk_size)


def _read_compare(r: _Reader) -> CompareSettings | None:
    s = "compare"
    if not r.has(s):
        return None
    axis = r.get(s, "axis", str.strip, "bandwidth")
    if axis not in ("bandwidth", "detuning", "delay"):
        raise r.error(s, "axis", f"unknown axis {axis!r}")
    values = r.get(s, "values", _float_list, COMPARE_BANDWIDTHS)
    if axis == "bandwidth" and not min(values) > 0:
        raise r.error(s, "values", "bandwidths must be positive")
    return CompareSettings(axis, values)


def read_settings(
    parser: configparser.ConfigParser, path: str | None = None
) -> RunSettings:
    r = _Reader(parser, path)
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]", path)
        r.check_keys(section, _SECTIONS[section])

    detuning_unit = r.get(
        "sweep",
        "detuning_unit",
        str.strip,
        r.get("field", "detuning_unit", str.strip, "tau_prime"),
    )
    if detuning_unit not in DETUNING_UNITS:
        section = "sweep" if r.has("sweep", "detuning_unit") else "field"
        raise r.error(
            section,
            "detuning_unit",
            f"must be one of {', '.join(DETUNING_UNITS)}",
        )
    model = _read_rotor(r)
    units = _read_units(r)
    return RunSettings(
        model=model,
        units=units,
        field_settings=_read_field(r, model, units, detuning_unit),
        propagation=_read_propagation(r),
        observables=_read_observables(r),
        detuning_unit=detuning_unit,
        sweep=_read_sweep(r),
        compare=_read_compare(r),
        source=path,
    )


def load_settings(path: str) -> RunSettings:
    path = resolve_config_path(path)
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as f:
            parser.read_file(f)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("missing section header", path, e.lineno) from e
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError("malformed line", path, line) from e
    except configparser.DuplicateOptionError as e:
        raise ConfigError(
            f"duplicate key {e.option!r} in [{e.section}]", path, e.lineno
        ) from e
    except configparser.DuplicateSectionError as e:
        raise ConfigError(
            f"duplicate section [{e.section}]", path, e.lineno
        ) from e
    logger.debug("loaded configuration %s", path)
    return read_settings(parser, path)
