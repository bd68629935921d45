"""CSV writers for fields, trajectories, traces, reports and sweeps."""

import csv
import logging
import os

import numpy as np

from core.field import FieldConfig, field_time

logger = logging.getLogger(__name__)


def write_csv(path: str, header, rows) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    logger.info("wrote %s", path)
    return path


def _state_columns(prefix: str, n_states: int, suffix: str = ""):
    return [f"{prefix}{J}{suffix}" for J in range(n_states)]


def write_field_csv(path: str, config: FieldConfig, n_samples: int) -> str:
    times = np.linspace(config.t_start, config.t_end, n_samples)
    values = field_time(config, times)
    rows = zip(times.tolist(), values.tolist())
    return write_csv(path, ["t", "field"], rows)


def write_trajectory_csv(path: str, trajectory) -> str:
    n_states = trajectory[0][1].n_states
    header = ["t"]
    for J in range(n_states):
        header += [f"re_c{J}", f"im_c{J}"]
    header += _state_columns("p", n_states)
    rows = []
    for t, packet in trajectory:
        row = [t]
        for c in packet.coeffs:
            row += [c.real, c.imag]
        rows.append(row + packet.populations().tolist())
    return write_csv(path, header, rows)


def write_trace_csv(path: str, trace) -> str:
    return write_csv(path, ["t", "orientation"], trace.samples)


def write_report_csv(path: str, report) -> str:
    return write_csv(path, ["state", "population", "phase"], report.rows())


def write_sweep_csv(path: str, result) -> str:
    n_states = len(result.records[0].populations) if result.records else 3
    header = (
        ["axis1", "axis2", "mode", "max_orientation"]
        + _state_columns("p", n_states)
        + _state_columns("phase", n_states)
        + ["overlap_warning", "error"]
    )
    rows = (
        [
            r.axis1,
            "" if r.axis2 is None else r.axis2,
            r.mode,
            r.max_orientation,
            *r.populations,
            *r.phases,
            int(r.overlap_warning),
            r.error or "",
        ]
        for r in result.records
    )
    return write_csv(path, header, rows)


def write_comparison_csv(path: str, axis_name: str, comparisons) -> str:
    """comparisons is a sequence of (axis value, MagnusComparison)."""
    n_states = len(comparisons[0][1].exact.populations)
    header = (
        [axis_name]
        + _state_columns("p", n_states, "_exact")
        + _state_columns("p", n_states, "_analytic")
        + _state_columns("phase", n_states, "_exact")
        + _state_columns("phase", n_states, "_analytic")
        + ["orientation_exact", "orientation_analytic"]
    )
    rows = (
        [
            value,
            *c.exact.populations.tolist(),
            *c.analytic.populations.tolist(),
            *c.exact.phases.tolist(),
            *c.analytic.phases.tolist(),
            c.exact_orientation,
            c.analytic_orientation,
        ]
        for value, c in comparisons
    )
    return write_csv(path, header, rows)


def write_conditions_csv(path: str, conditions) -> str:
    header = [
        "branch",
        "j",
        "ratio",
        "theta1_over_pi",
        "theta2_over_pi",
        "phase_relation",
    ]
    rows = (
        [
            c.branch,
            c.winding,
            c.ratio,
            *c.in_units_of_pi(),
            c.phase_relation,
        ]
        for c in conditions
    )
    return write_csv(path, header, rows)
