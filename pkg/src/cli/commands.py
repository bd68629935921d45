"""Subcommands: conditions, simulate, sweep and compare.

Each command returns a process exit code; configuration problems surface
as ConfigError and are mapped to the usage code by main.
"""

import csv
import logging
import math
import os
import sys
from dataclasses import replace

from core.errors import PropagationError
from core.field import spectral_mismatch, theta_integrals
from core.magnus import magnus_vs_exact_report
from core.observables import (
    max_orientation_over_revival,
    orientation_trace,
    population_phase_report,
)
from core.optimum import condition_amplitudes, phase_residual
from core.propagator import WavePacket, propagate_exact
from core.sweep import SweepMode, run_sweep
from utils.config import DEFAULT_OUT_DIR
from utils.export import (
    write_comparison_csv,
    write_conditions_csv,
    write_field_csv,
    write_report_csv,
    write_sweep_csv,
    write_trace_csv,
    write_trajectory_csv,
)
from utils.plotting import render_heatmap_svg, render_line_svg

from .manifest import SNAPSHOT_NAME, RunManifest
from .settings import CompareSettings, ConfigError, load_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

FIELD_SAMPLES_PER_PERIOD = 20

CONDITION_COLUMNS = (
    "branch",
    "j",
    "|θ1|/π",
    "|θ2|/π",
    "s",
    "phase relation",
)


def _out_dir(args, subcommand: str, source: str | None = None) -> str:
    if getattr(args, "out_dir", None):
        return args.out_dir
    stem = os.path.splitext(os.path.basename(source or subcommand))[0]
    name = stem if stem == subcommand else f"{stem}_{subcommand}"
    return os.path.join(DEFAULT_OUT_DIR, name)


def _finish(manifest: RunManifest, settings, out_dir: str) -> None:
    if settings is not None:
        manifest.add_output(
            settings.write_snapshot(os.path.join(out_dir, SNAPSHOT_NAME))
        )
    manifest.write(out_dir)


def _axis_label(name: str, detuning_unit: str = "tau_prime") -> str:
    if name == "bandwidth":
        return "Δω [1/τ′]"
    if name == "delay":
        return "τ0 [τ′]"
    return {"omega01": "Δ [ω01]", "absolute": "Δ [B/ħ]"}.get(
        detuning_unit, "Δ [1/τ′]"
    )


def _condition_rows(conditions):
    for c in conditions:
        t1, t2 = c.in_units_of_pi()
        yield (
            c.branch,
            c.winding,
            f"{t1:.4f}",
            f"{t2:.4f}",
            f"{c.ratio:.4f}",
            c.phase_relation,
        )


def format_conditions(conditions) -> str:
    rows = [CONDITION_COLUMNS] + [
        tuple(str(v) for v in row) for row in _condition_rows(conditions)
    ]
    widths = [max(len(row[k]) for row in rows) for k in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in rows
    )


def cmd_conditions(args) -> int:
    branches = [args.branch] if args.branch else [1, 2]
    conditions = [
        condition_amplitudes(branch, j)
        for branch in branches
        for j in range(args.windings + 1)
    ]
    if args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(CONDITION_COLUMNS)
        writer.writerows(_condition_rows(conditions))
    else:
        print(format_conditions(conditions))

    if args.out_dir:
        manifest = RunManifest(
            "conditions",
            {"branches": branches, "windings": args.windings},
        )
        manifest.add_output(
            write_conditions_csv(
                os.path.join(args.out_dir, "conditions.csv"), conditions
            )
        )
        _finish(manifest, None, args.out_dir)
    return EXIT_OK


def cmd_simulate(args) -> int:
    settings = load_settings(args.config)
    out_dir = _out_dir(args, "simulate", settings.source)
    manifest = RunManifest.for_settings("simulate", settings)
    model = settings.model
    config = settings.build_field()

    span = config.t_end - config.t_start
    period = 2 * math.pi / model.omega12
    n_samples = math.ceil(span / period * FIELD_SAMPLES_PER_PERIOD) + 1
    manifest.add_output(
        write_field_csv(os.path.join(out_dir, "field.csv"), config, n_samples)
    )

    try:
        result = propagate_exact(
            WavePacket.ground(model, config.t_start),
            config,
            model,
            settings.propagation,
        )
    except PropagationError as e:
        logger.error("propagation failed: %s", e)
        manifest.summary = {
            "error": str(e),
            "dt": e.dt,
            "norm_drift": e.drift,
            "norm_tolerance": e.tolerance,
        }
        _finish(manifest, settings, out_dir)
        return EXIT_NUMERICAL

    final = result.final
    obs = settings.observables
    peak, t_star = max_orientation_over_revival(final, model, obs.revival_grid)
    trace = orientation_trace(
        final,
        model,
        config.t_end,
        config.t_end + obs.trace_periods * model.revival_period,
        obs.trace_points,
    )
    report = population_phase_report(final)
    thetas = theta_integrals(config, model)
    residual = (
        phase_residual(thetas)
        if thetas.theta1 != 0 and thetas.theta2 != 0
        else None
    )

    if result.trajectory is not None:
        manifest.add_output(
            write_trajectory_csv(
                os.path.join(out_dir, "trajectory.csv"), result.trajectory
            )
        )
    manifest.add_output(
        write_trace_csv(os.path.join(out_dir, "trace.csv"), trace)
    )
    manifest.add_output(
        write_report_csv(os.path.join(out_dir, "report.csv"), report)
    )
    if args.svg:
        manifest.add_output(
            render_line_svg(
                os.path.join(out_dir, "trace.svg"),
                trace.times,
                {"⟨cosθ⟩": trace.values},
                "t",
                "⟨cosθ⟩",
                "orientation after the pulses",
            )
        )

    manifest.summary = {
        "max_orientation": peak,
        "t_star": t_star,
        "norm_drift": result.norm_drift,
        "dt": result.dt,
        "n_steps": result.n_steps,
        "populations": report.populations.tolist(),
        "phases": report.phases.tolist(),
        "theta1_over_pi": abs(thetas.theta1) / math.pi,
        "theta2_over_pi": abs(thetas.theta2) / math.pi,
        "phase_residual": residual,
        "spectral_mismatch": spectral_mismatch(config, model, thetas),
        "overlap_warning": config.overlap_warning,
        "units": settings.units.describe(model),
        "peak_field_kv_per_cm": config.peak
        * settings.units.field_unit_kv_per_cm(model),
    }
    _finish(manifest, settings, out_dir)
    logger.info(
        "max |⟨cosθ⟩| = %.4f, populations %s",
        peak,
        ", ".join(f"{p:.4f}" for p in report.populations),
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    settings = load_settings(args.config)
    if settings.sweep is None:
        raise ConfigError("no [sweep] section", settings.source)
    if args.mode:
        # the snapshot must record the mode actually run
        sweep = replace(settings.sweep, mode=SweepMode(args.mode))
        settings = replace(settings, sweep=sweep)
    out_dir = _out_dir(args, "sweep", settings.source)
    sweep_config = settings.sweep_config()
    manifest = RunManifest.for_settings("sweep", settings)
    manifest.summary["mode"] = sweep_config.mode.value

    result = run_sweep(sweep_config, settings.model)
    manifest.add_output(
        write_sweep_csv(os.path.join(out_dir, "sweep.csv"), result)
    )

    modes = sweep_config.mode.evaluations
    axis1, axis2 = sweep_config.axis1, sweep_config.axis2
    unit = settings.detuning_unit
    if args.svg:
        if axis2 is None:
            manifest.add_output(
                render_line_svg(
                    os.path.join(out_dir, "sweep.svg"),
                    axis1.values(),
                    {mode: result.grid(mode) for mode in modes},
                    _axis_label(axis1.name, unit),
                    "|⟨cosθ⟩|max",
                    f"condition {sweep_config.condition.branch}",
                )
            )
        else:
            for mode in modes:
                manifest.add_output(
                    render_heatmap_svg(
                        os.path.join(out_dir, f"sweep_{mode}.svg"),
                        result.grid(mode),
                        axis1.values(),
                        axis2.values(),
                        _axis_label(axis1.name, unit),
                        _axis_label(axis2.name, unit),
                        f"|⟨cosθ⟩|max, {mode}",
                    )
                )

    failed = len(result.failures())
    manifest.summary.update(
        {
            "records": len(result.records),
            "failed": failed,
            "overlap_flagged": sum(r.overlap_warning for r in result.records),
        }
    )
    for mode in modes:
        values = [r.max_orientation for r in result.for_mode(mode) if r.ok]
        manifest.summary[f"best_{mode}"] = max(values) if values else None
    _finish(manifest, settings, out_dir)

    if result.records and failed == len(result.records):
        logger.error("every sweep point failed")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_compare(args) -> int:
    settings = load_settings(args.config)
    if settings.field_settings.pulses is not None:
        raise ConfigError(
            "compare needs a condition-designed field, not [pulse] sections",
            settings.source,
        )
    out_dir = _out_dir(args, "compare", settings.source)
    compare = settings.compare or CompareSettings()
    manifest = RunManifest.for_settings("compare", settings)
    model = settings.model

    comparisons = []
    for value in compare.values:
        config = settings.build_field(**{compare.axis: value})
        try:
            comparison = magnus_vs_exact_report(
                config, model, settings.propagation
            )
        except PropagationError as e:
            logger.error(
                "propagation failed at %s = %g: %s", compare.axis, value, e
            )
            manifest.summary = {"error": str(e), compare.axis: value}
            _finish(manifest, settings, out_dir)
            return EXIT_NUMERICAL
        comparisons.append((value, comparison))

    manifest.add_output(
        write_comparison_csv(
            os.path.join(out_dir, "comparison.csv"), compare.axis, comparisons
        )
    )
    if args.svg:
        manifest.add_output(
            render_line_svg(
                os.path.join(out_dir, "comparison.svg"),
                [v for v, _ in comparisons],
                {
                    "exact": [c.exact_orientation for _, c in comparisons],
                    "analytic": [
                        c.analytic_orientation for _, c in comparisons
                    ],
                },
                _axis_label(compare.axis, settings.detuning_unit),
                "|⟨cosθ⟩|max",
                "exact vs first-order Magnus",
            )
        )
    manifest.summary = {
        "axis": compare.axis,
        "max_population_diff": {
            repr(v): c.max_population_diff for v, c in comparisons
        },
    }
    _finish(manifest, settings, out_dir)
    return EXIT_OK


COMMANDS = {
    "conditions": cmd_conditions,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
}
