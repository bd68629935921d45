import csv
import io
import json
import math
import os
import textwrap

import numpy as np
import pytest

from cli.settings import ConfigError, load_settings, parse_angle
from core.rotor import UnitSystem
from main import main
from utils.config import NORM_TOLERANCE, RECIPES_DIR

RECIPES = sorted(f for f in os.listdir(RECIPES_DIR) if f.endswith(".cfg"))


def _write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text), encoding="utf-8")
    return str(path)


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def _manifest(out_dir):
    with open(os.path.join(out_dir, "manifest.json"), encoding="utf-8") as f:
        return json.load(f)


def _conditions_csv(capsys, *args):
    assert main(["conditions", "--format", "csv", *args]) == 0
    return list(csv.DictReader(io.StringIO(capsys.readouterr().out)))


def test_conditions_table(capsys):
    rows = _conditions_csv(capsys)
    assert [int(r["branch"]) for r in rows] == [1, 2]
    magnitudes = [(float(r["|θ1|/π"]), float(r["|θ2|/π"])) for r in rows]
    np.testing.assert_allclose(
        magnitudes, [(0.3412, 0.3401), (0.7021, 0.2167)], atol=1e-3
    )


def test_conditions_text_output(capsys):
    assert main(["conditions"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split()[0] == "branch"
    assert len(out) == 3
    assert "(0 + 1/2)π" in out[1]


def test_single_condition(capsys):
    assert len(_conditions_csv(capsys, "--branch", "1")) == 1


def test_condition_windings(capsys):
    rows = _conditions_csv(capsys, "--windings", "3")
    assert len(rows) == 8
    for branch in ("1", "2"):
        theta1 = [float(r["|θ1|/π"]) for r in rows if r["branch"] == branch]
        assert all(b > a for a, b in zip(theta1, theta1[1:]))


@pytest.mark.parametrize(
    "argv",
    [
        ["conditions", "--branch", "3"],
        ["conditions", "--windings", "-1"],
        ["simulate"],
        ["bogus"],
    ],
)
def test_usage_errors_exit_with_one(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1


def test_conditions_written_with_manifest(tmp_path, capsys):
    out_dir = str(tmp_path / "conditions")
    assert main(["conditions", "--out-dir", out_dir]) == 0
    rows = _read_csv(os.path.join(out_dir, "conditions.csv"))
    assert len(rows) == 2
    manifest = _manifest(out_dir)
    assert manifest["subcommand"] == "conditions"
    assert manifest["outputs"] == ["conditions.csv"]


def test_zero_amplitude_simulation(tmp_path):
    config = _write_config(
        tmp_path,
        """
        [field]
        amplitude_scale = 0
        bandwidth = 0.5

        [observables]
        revival_grid = 64
        trace_points = 11
        """,
    )
    out_dir = str(tmp_path / "out")
    assert main(["simulate", "--config", config, "--out-dir", out_dir]) == 0
    trace = _read_csv(os.path.join(out_dir, "trace.csv"))
    assert len(trace) == 11
    assert all(float(r["orientation"]) == 0.0 for r in trace)
    report = _read_csv(os.path.join(out_dir, "report.csv"))
    assert [float(r["population"]) for r in report] == [1.0, 0.0, 0.0]
    manifest = _manifest(out_dir)
    assert set(manifest["outputs"]) == {
        "field.csv",
        "trace.csv",
        "report.csv",
        "config.ini",
    }
    assert manifest["summary"]["max_orientation"] == 0.0
    assert manifest["summary"]["phase_residual"] is None
    assert manifest["summary"]["spectral_mismatch"] == 0.0


def test_simulation_outputs(tmp_path):
    config = _write_config(
        tmp_path,
        """
        [field]
        branch = 2
        bandwidth = 0.5
        delay = 0.25

        [propagation]
        trajectory_stride = 100

        [observables]
        revival_grid = 256
        trace_points = 51
        """,
    )
    out_dir = str(tmp_path / "out")
    argv = ["simulate", "--config", config, "--out-dir", out_dir, "--svg"]
    assert main(argv) == 0
    for name in ("field.csv", "trajectory.csv", "trace.svg", "config.ini"):
        assert os.path.isfile(os.path.join(out_dir, name))
    trajectory = _read_csv(os.path.join(out_dir, "trajectory.csv"))
    assert float(trajectory[0]["p0"]) == pytest.approx(1.0)
    summary = _manifest(out_dir)["summary"]
    assert summary["norm_drift"] <= NORM_TOLERANCE
    assert sum(summary["populations"]) == pytest.approx(1.0, abs=1e-10)
    assert summary["units"]["tau_prime_ps"] > 0
    assert summary["spectral_mismatch"] < 1e-5


def test_coarse_step_is_a_numerical_failure(tmp_path, caplog):
    config = _write_config(
        tmp_path,
        """
        [field]
        bandwidth = 0.5

        [propagation]
        steps_per_period = 4
        """,
    )
    out_dir = str(tmp_path / "out")
    argv = ["simulate", "--config", config, "--out-dir", out_dir]
    assert main(argv) == 2
    summary = _manifest(out_dir)["summary"]
    assert summary["norm_drift"] > summary["norm_tolerance"]
    assert "norm drift" in caplog.text


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[field]\nbranch = 1\ncolour = red\n", "run.cfg:3"),
        ("[field]\nbranch = 3\n", "run.cfg:2"),
        ("[field]\nbandwidth = wide\n", "run.cfg:2"),
        ("[lasers]\npower = 1\n", "unknown section"),
        ("branch = 1\n", "missing section header"),
        ("[field]\nbranch = 1\nbranch = 2\n", "duplicate key"),
        ("[sweep]\naxis1 = frequency 0 1 3\n", "run.cfg:2"),
        ("[rotor]\nB = -1\n", "[rotor]"),
    ],
)
def test_config_errors_exit_with_one(tmp_path, caplog, text, fragment):
    config = _write_config(tmp_path, text)
    argv = ["simulate", "--config", config, "--out-dir", str(tmp_path)]
    assert main(argv) == 1
    assert fragment in caplog.text


def test_missing_config(tmp_path):
    missing = str(tmp_path / "nope.cfg")
    assert main(["simulate", "--config", missing]) == 1


def test_sweep_requires_sweep_section(tmp_path):
    config = _write_config(tmp_path, "[field]\nbranch = 1\n")
    argv = ["sweep", "--config", config, "--out-dir", str(tmp_path)]
    assert main(argv) == 1


def test_smoke_sweep_recipe(tmp_path):
    out_dir = str(tmp_path / "smoke")
    argv = ["sweep", "--config", "smoke_2x2", "--out-dir", out_dir, "--svg"]
    assert main(argv) == 0
    rows = _read_csv(os.path.join(out_dir, "sweep.csv"))
    assert len(rows) == 4
    assert {r["mode"] for r in rows} == {"exact"}
    assert all(r["error"] == "" for r in rows)
    assert os.path.isfile(os.path.join(out_dir, "sweep_exact.svg"))
    summary = _manifest(out_dir)["summary"]
    assert summary["records"] == 4
    assert summary["failed"] == 0
    assert summary["best_exact"] < 0.7746


def test_snapshot_reproduces_sweep(tmp_path):
    first = str(tmp_path / "first")
    second = str(tmp_path / "second")
    assert main(["sweep", "--config", "smoke_2x2", "--out-dir", first]) == 0
    snapshot = os.path.join(first, "config.ini")
    assert main(["sweep", "--config", snapshot, "--out-dir", second]) == 0
    with open(os.path.join(first, "sweep.csv"), "rb") as a, open(
        os.path.join(second, "sweep.csv"), "rb"
    ) as b:
        assert a.read() == b.read()


def test_mode_override_is_recorded(tmp_path):
    out_dir = str(tmp_path / "analytic")
    argv = [
        "sweep",
        "--config",
        "smoke_2x2",
        "--out-dir",
        out_dir,
        "--mode",
        "analytic",
    ]
    assert main(argv) == 0
    rows = _read_csv(os.path.join(out_dir, "sweep.csv"))
    assert {r["mode"] for r in rows} == {"analytic"}
    snapshot = load_settings(os.path.join(out_dir, "config.ini"))
    assert snapshot.sweep.mode.value == "analytic"


def test_sweep_fails_when_every_point_fails(tmp_path):
    config = _write_config(
        tmp_path,
        """
        [propagation]
        steps_per_period = 4

        [sweep]
        mode = exact
        axis1 = bandwidth 0.4 0.5 2
        """,
    )
    argv = ["sweep", "--config", config, "--out-dir", str(tmp_path / "o")]
    assert main(argv) == 2


def test_compare_rejects_explicit_pulses(tmp_path):
    config = _write_config(
        tmp_path,
        """
        [pulse1]
        amplitude = 1.0
        center_freq = 2.0
        bandwidth = 0.5
        """,
    )
    argv = ["compare", "--config", config, "--out-dir", str(tmp_path)]
    assert main(argv) == 1


def test_compare_writes_table(tmp_path):
    config = _write_config(
        tmp_path,
        """
        [observables]
        revival_grid = 256

        [compare]
        axis = bandwidth
        values = 0.5, 0.4
        """,
    )
    out_dir = str(tmp_path / "out")
    argv = ["compare", "--config", config, "--out-dir", out_dir, "--svg"]
    assert main(argv) == 0
    rows = _read_csv(os.path.join(out_dir, "comparison.csv"))
    assert [float(r["bandwidth"]) for r in rows] == [0.5, 0.4]
    assert "orientation_exact" in rows[0]
    assert os.path.isfile(os.path.join(out_dir, "comparison.svg"))


@pytest.mark.parametrize("recipe", RECIPES)
def test_shipped_recipes_load(recipe):
    settings = load_settings(recipe)
    settings.build_field()
    if settings.sweep is not None:
        assert settings.sweep_config().axis1.n_points >= 2


@pytest.mark.parametrize(
    "text, value",
    [
        ("-pi/2", -math.pi / 2),
        ("pi", math.pi),
        ("0.5*pi", 0.5 * math.pi),
        ("2 pi / 3", 2 * math.pi / 3),
        ("0.25", 0.25),
    ],
)
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value)


def test_physical_overrides(tmp_path):
    units = UnitSystem()
    settings = load_settings(
        _write_config(
            tmp_path,
            """
            [field]
            delay_ps = 2.0
            bandwidth_thz = 0.01
            """,
        )
    )
    model = settings.model
    assert settings.field_settings.delay == pytest.approx(
        units.time_from_ps(2.0, model) / model.tau_prime
    )
    expected = units.angular_frequency_from_thz(0.01, model) * model.tau_prime
    assert settings.field_settings.bandwidth == pytest.approx(expected)


def test_absolute_detuning_unit(tmp_path):
    units = UnitSystem()
    settings = load_settings(
        _write_config(
            tmp_path,
            """
            [field]
            detuning_unit = absolute
            detuning_thz = 0.05
            """,
        )
    )
    expected = units.angular_frequency_from_thz(0.05, settings.model)
    assert settings.detuning_unit == "absolute"
    assert settings.field_settings.detuning == pytest.approx(expected)
    fld = settings.build_field()
    omega01 = settings.model.omega01
    assert fld.pulses[0].center_freq == pytest.approx(omega01 + expected)


def test_config_error_location():
    error = ConfigError("bad", "run.cfg", 4)
    assert str(error) == "run.cfg:4: bad"
    assert error.line == 4


@pytest.mark.slow
def test_narrowband_recipe_reaches_optimum(tmp_path):
    out_dir = str(tmp_path / "fig3")
    argv = ["simulate", "--config", "fig3_narrowband", "--out-dir", out_dir]
    assert main(argv) == 0
    report = _read_csv(os.path.join(out_dir, "report.csv"))
    np.testing.assert_allclose(
        [float(r["population"]) for r in report],
        (0.278, 0.5, 0.222),
        atol=0.01,
    )
    assert _manifest(out_dir)["summary"]["max_orientation"] >= 0.770


def test_quiet_flag(capsys):
    assert main(["-q", "conditions", "--branch", "2"]) == 0
    assert "0.70" in capsys.readouterr().out
