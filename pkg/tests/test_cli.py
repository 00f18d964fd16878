import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from cli import build_parser, main
from data_sources.csv_loader import load_csv
from data_sources.water_table import load_builtin_water
from report.writers import read_csv
from utils.errors import EXIT_CONFIG, EXIT_NUMERICAL_FLOOR, EXIT_OK

SHORT = ["--T", "20", "--n-steps", "400"]


def only_dir(root, prefix):
    dirs = sorted(root.glob(f"{prefix}-*"))
    assert len(dirs) == 1
    return dirs[0]


def snapshot(directory):
    return {path.name: path.read_bytes() for path in sorted(directory.iterdir())}


class TestParser:
    """Test cases for argument parsing."""

    def test_unset_flags_are_none(self):
        args = build_parser().parse_args(["run"])
        assert args.epsilon is None and args.property is None and args.standardize is None

    def test_flags(self):
        args = build_parser().parse_args(["run", "--property", "cp", "--theta0", "1", "2", "3",
                                          "--no-standardize", "-o", "out"])
        assert (args.property, args.theta0, args.standardize, args.output_dir) == ("cp", [1.0, 2.0, 3.0], False, "out")

    def test_no_command(self, capsys):
        assert main([]) == EXIT_CONFIG

    def test_system_info(self, capsys):
        assert main(["--system-info"]) == EXIT_OK
        assert "System Information" in capsys.readouterr().out


class TestRunCommand:
    """Test cases for 'weakflow run'."""

    def test_writes_outputs(self, output_dir):
        assert main(["run"]) == EXIT_OK
        run_dir = only_dir(output_dir, "run")
        assert sorted(p.name for p in run_dir.iterdir()) == ["manifest.json", "result.csv", "trajectory.csv"]

        manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
        assert run_dir.name == f"run-{manifest['config_hash'][:12]}"
        assert manifest["seeds"] == {"split_seed": 20240501, "noise_seed": 7}

        text = (run_dir / "result.csv").read_text(encoding="utf-8")
        assert text.startswith(f"# config_hash={manifest['config_hash']}\n")
        row = read_csv(run_dir / "result.csv").iloc[0]
        assert row["model"] == "density"
        assert row["theta_star_1"] == manifest["results"]["report_row"]["theta_star_1"]

        trajectory = read_csv(run_dir / "trajectory.csv")
        assert len(trajectory) == 2001

    def test_rerun_and_replay_are_byte_identical(self, output_dir):
        assert main(["run"] + SHORT) == EXIT_OK
        run_dir = only_dir(output_dir, "run")
        first = snapshot(run_dir)
        assert main(["run"] + SHORT) == EXIT_OK
        assert snapshot(run_dir) == first
        assert main(["run", "--replay", str(run_dir / "manifest.json")]) == EXIT_OK
        assert only_dir(output_dir, "run") == run_dir
        assert snapshot(run_dir) == first

    def test_config_file(self, output_dir, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"property": "conductivity", "T": 20.0, "n_steps": 400}), encoding="utf-8")
        assert main(["run", "--config", str(path), "--noise-level", "0.05"]) == EXIT_OK
        manifest = json.loads((only_dir(output_dir, "run") / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["config"]["property"] == "conductivity"
        assert manifest["config"]["noise_level"] == 0.05

    def test_epsilon_outside_regime(self, output_dir, capsys):
        assert main(["run", "--epsilon", "0.5"]) == EXIT_CONFIG
        assert "epsilon_max" in capsys.readouterr().out
        assert not output_dir.exists()

    def test_unknown_property(self, output_dir, capsys):
        assert main(["run", "--property", "viscosity"]) == EXIT_CONFIG

    def test_missing_csv(self, output_dir, tmp_path):
        assert main(["run", "--csv", str(tmp_path / "missing.csv")]) == EXIT_CONFIG

    def test_paper_literal(self, output_dir):
        assert main(["run", "--adjoint-mode", "paper_literal"] + SHORT) == EXIT_OK
        manifest = json.loads((only_dir(output_dir, "run") / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["decisions"]["adjoint_mode"] == "paper_literal"


class TestSweepCommand:
    """Test cases for 'weakflow sweep'."""

    def test_slope_in_envelope(self, output_dir):
        assert main(["sweep"]) == EXIT_OK
        sweep_dir = only_dir(output_dir, "sweep")
        frame = read_csv(sweep_dir / "sweep.csv")
        assert len(frame) == 5
        manifest = json.loads((sweep_dir / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["sweep"]["status"] == "ok"
        assert 1.8 <= manifest["sweep"]["slope"] <= 2.3

    def test_too_few_epsilons(self, output_dir, capsys):
        assert main(["sweep", "--epsilons", "1e-4", "1e-3", "1e-2"] + SHORT) == EXIT_CONFIG
        assert "epsilons" in capsys.readouterr().out

    def test_zero_control_is_at_floor(self, output_dir):
        assert main(["sweep", "--u-min", "0", "--u-max", "0"] + SHORT) == EXIT_NUMERICAL_FLOOR
        manifest = json.loads((only_dir(output_dir, "sweep") / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["sweep"]["status"] == "numerical_floor"


class TestTablesAndCurves:
    """Test cases for 'reproduce-tables' and 'loss-curves'."""

    def test_reproduce_tables(self, output_dir):
        assert main(["reproduce-tables", "--seeds", "1", "2", "--pdf"] + SHORT) == EXIT_OK
        tables_dir = only_dir(output_dir, "tables")
        names = sorted(p.name for p in tables_dir.iterdir())
        assert names == ["manifest.json", "runs.csv", "tables.csv", "tables.pdf", "tables.txt"]
        assert len(read_csv(tables_dir / "runs.csv")) == 12
        summary = read_csv(tables_dir / "tables.csv")
        assert len(summary) == 6
        assert set(summary["n_seeds"]) == {2}
        assert (tables_dir / "tables.pdf").read_bytes().startswith(b"%PDF")
        text = (tables_dir / "tables.txt").read_text(encoding="utf-8")
        assert "1% noise" in text and "5% noise" in text

    def test_reproduce_tables_refuses_csv(self, output_dir, tmp_path):
        assert main(["reproduce-tables", "--csv", str(tmp_path / "data.csv")]) == EXIT_CONFIG

    def test_loss_curves(self, output_dir):
        assert main(["loss-curves", "--plot"] + SHORT) == EXIT_OK
        curves_dir = only_dir(output_dir, "curves")
        frame = read_csv(curves_dir / "loss_curves.csv")
        assert sorted(frame["level"].unique()) == [0.0, 0.01, 0.05]
        flows = [frame[(frame["level"] == level) & (frame["kind"] == "flow")]["train_loss"].to_numpy()
                 for level in (0.0, 0.01, 0.05)]
        assert np.all(np.diff(flows[0]) <= 1e-9)
        assert_array_equal(flows[0], flows[1])
        assert_array_equal(flows[0], flows[2])
        assert (curves_dir / "loss_curves.png").read_bytes().startswith(b"\x89PNG")


class TestExportData:
    """Test cases for 'weakflow export-data'."""

    @pytest.mark.parametrize("prop", ["density", "cp", "k"])
    def test_round_trip(self, tmp_path, prop):
        path = tmp_path / f"{prop}.csv"
        assert main(["export-data", "--property", prop, "--output", str(path)]) == EXIT_OK
        loaded = load_csv(path, "T", "value")
        expected = load_builtin_water(prop)
        assert_array_equal(loaded.x, expected.x)
        assert_array_equal(loaded.y, expected.y)

    def test_unknown_property(self, tmp_path):
        assert main(["export-data", "--property", "viscosity", "--output", str(tmp_path / "x.csv")]) == EXIT_CONFIG
