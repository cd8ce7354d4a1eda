"""Tests for the CLI commands using typer.testing."""

from __future__ import annotations

import json
import sqlite3
from collections.abc import Callable
from pathlib import Path

import numpy as np
from typer.testing import CliRunner, Result

from sobolev.cli import app

runner = CliRunner()

SampleFile = Callable[[str, np.ndarray], Path]


def _invoke(*args: str, db: Path | None = None) -> Result:
    """Helper to invoke the CLI with a temp DB."""
    cmd = list(args)
    if db:
        cmd += ["--db", str(db)]
    result = runner.invoke(app, cmd)
    return result


def _bench(out: Path, *extra: str, db: Path | None = None) -> Result:
    return _invoke(
        "bench", "--experiment", "gauss1d_mean", "--grid", "10", "--trials", "1",
        "--out", str(out), *extra, db=db,
    )


class TestInit:
    def test_init_creates_db(self, tmp_path: Path) -> None:
        db = tmp_path / "test.db"
        result = _invoke("init", db=db)
        assert result.exit_code == 0
        assert "initialized" in result.output.lower() or "✓" in result.output

    def test_init_creates_tables(self, tmp_path: Path) -> None:
        db = tmp_path / "test.db"
        _invoke("init", db=db)
        conn = sqlite3.connect(str(db))
        tables = [r[0] for r in conn.execute("SELECT name FROM sqlite_master WHERE type='table'")]
        assert "alembic_version" in tables
        assert "bench_runs" in tables
        assert "bench_rows" in tables
        conn.close()

    def test_init_idempotent(self, tmp_path: Path) -> None:
        db = tmp_path / "test.db"
        r1 = _invoke("init", db=db)
        r2 = _invoke("init", db=db)
        assert r1.exit_code == 0
        assert r2.exit_code == 0


class TestVersion:
    def test_version_flag(self) -> None:
        result = runner.invoke(app, ["--version"])
        assert result.exit_code == 0
        assert "sobolev" in result.output
        assert "0.1.0" in result.output


class TestEstimate:
    def test_norm_of_point_mass(self, sample_file: SampleFile) -> None:
        path = sample_file("zeros.csv", np.zeros((2, 1)))
        result = _invoke("estimate", str(path), "--quantity", "norm", "--zn", "1")
        assert result.exit_code == 0
        data = json.loads(result.output)
        assert data["value"] == 3.0
        assert data["quantity"] == "squared_norm"
        assert data["schema"] == "sobolev-report/1"
        assert data["zn"] == 1

    def test_same_seed_same_output(
        self, sample_file: SampleFile, rng: np.random.Generator
    ) -> None:
        path = sample_file("x.csv", rng.uniform(-3, 3, size=(101, 2)))
        args = ("estimate", str(path), "-q", "norm", "--zn", "3", "--seed", "7")
        first = _invoke(*args)
        second = _invoke(*args)
        assert first.exit_code == 0
        assert first.output == second.output

    def test_distance_with_interval(
        self, sample_file: SampleFile, rng: np.random.Generator
    ) -> None:
        x = sample_file("x.csv", rng.uniform(-3, 0, size=(400, 1)))
        y = sample_file("y.csv", rng.uniform(0, 3, size=(400, 1)))
        result = _invoke("estimate", str(x), str(y), "-q", "distance", "--zn", "4", "--ci", "0.95")
        assert result.exit_code == 0
        data = json.loads(result.output)
        assert data["n"] == [400, 400]
        assert data["clamped_value"] == max(data["value"], 0.0)
        assert data["ci"]["lower"] <= data["value"] <= data["ci"]["upper"]
        assert abs(data["ci"]["level"] - 0.95) < 1e-12

    def test_inner_with_minmax_rescale(
        self, sample_file: SampleFile, rng: np.random.Generator
    ) -> None:
        x = sample_file("x.csv", rng.normal(10.0, 2.0, size=(200, 1)))
        y = sample_file("y.csv", rng.normal(11.0, 2.0, size=(200, 1)))
        result = _invoke(
            "estimate", str(x), str(y), "-q", "inner", "--theta", "0.4", "--rescale", "minmax"
        )
        assert result.exit_code == 0
        data = json.loads(result.output)
        assert data["quantity"] == "inner_product"
        assert data["rescale"]["mode"] == "minmax"
        assert data["zn"] == 8

    def test_out_of_box_samples_exit_2(self, sample_file: SampleFile) -> None:
        path = sample_file("far.csv", np.array([[0.0], [10.0], [1.0]]))
        result = _invoke("estimate", str(path), "-q", "norm", "--zn", "1")
        assert result.exit_code == 2

    def test_malformed_csv_exit_2(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.csv"
        path.write_text("1.0\nabc\n", encoding="utf-8")
        result = _invoke("estimate", str(path), "-q", "norm", "--zn", "1")
        assert result.exit_code == 2

    def test_single_row_exit_2(self, sample_file: SampleFile) -> None:
        path = sample_file("one.csv", np.zeros((1, 1)))
        result = _invoke("estimate", str(path), "-q", "norm")
        assert result.exit_code == 2
        assert "at least 2" in result.output

    def test_missing_file_exit_2(self, tmp_path: Path) -> None:
        result = _invoke("estimate", str(tmp_path / "missing.csv"), "-q", "norm")
        assert result.exit_code == 2

    def test_wrong_file_count_exit_3(self, sample_file: SampleFile) -> None:
        path = sample_file("zeros.csv", np.zeros((4, 1)))
        result = _invoke("estimate", str(path), "-q", "distance", "--zn", "1")
        assert result.exit_code == 3

    def test_conflicting_zn_flags_exit_3(self, sample_file: SampleFile) -> None:
        path = sample_file("zeros.csv", np.zeros((4, 1)))
        result = _invoke("estimate", str(path), "-q", "norm", "--zn", "1", "--theta", "0.5")
        assert result.exit_code == 3

    def test_unknown_quantity_exit_3(self, sample_file: SampleFile) -> None:
        path = sample_file("zeros.csv", np.zeros((4, 1)))
        result = _invoke("estimate", str(path), "-q", "entropy")
        assert result.exit_code == 3

    def test_unknown_option_exit_3(self, sample_file: SampleFile) -> None:
        path = sample_file("zeros.csv", np.zeros((4, 1)))
        result = _invoke("estimate", str(path), "-q", "norm", "--bogus")
        assert result.exit_code == 3

    def test_bad_rescale_exit_3(self, sample_file: SampleFile) -> None:
        path = sample_file("zeros.csv", np.zeros((4, 1)))
        result = _invoke("estimate", str(path), "-q", "norm", "--rescale", "box:3,1")
        assert result.exit_code == 3


class TestTwoSampleTest:
    def test_identical_files_accept(
        self, sample_file: SampleFile, rng: np.random.Generator
    ) -> None:
        data = rng.uniform(-3, 3, size=(50, 1))
        x = sample_file("x.csv", data)
        y = sample_file("y.csv", data)
        result = _invoke("test", str(x), str(y), "--zn", "2")
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["statistic"] == 0.0
        assert report["p_value"] == 1.0
        assert report["dof"] == 4
        assert report["reject"] is False

    def test_shifted_samples_reject(
        self, sample_file: SampleFile, rng: np.random.Generator
    ) -> None:
        x = sample_file("x.csv", rng.normal(0.0, 1.0, size=(500, 1)))
        y = sample_file("y.csv", rng.normal(1.0, 1.0, size=(500, 1)))
        result = _invoke("test", str(x), str(y), "--zn", "3", "--rescale", "minmax")
        assert result.exit_code == 1
        report = json.loads(result.output)
        assert report["reject"] is True
        assert report["p_value"] < 0.05

    def test_zero_radius_exit_3(self, sample_file: SampleFile) -> None:
        x = sample_file("x.csv", np.zeros((10, 1)))
        result = _invoke("test", str(x), str(x), "--zn", "0")
        assert result.exit_code == 3

    def test_overflowing_order_exit_3(
        self, sample_file: SampleFile, rng: np.random.Generator
    ) -> None:
        x = sample_file("x.csv", rng.uniform(-3, 3, size=(50, 1)))
        y = sample_file("y.csv", rng.uniform(-3, 3, size=(50, 1)))
        result = _invoke("test", str(x), str(y), "--order", "200", "--zn", "10")
        assert result.exit_code == 3
        assert "overflow" in result.output

    def test_invalid_alpha_exit_3(
        self, sample_file: SampleFile, rng: np.random.Generator
    ) -> None:
        x = sample_file("x.csv", rng.uniform(-3, 3, size=(50, 1)))
        result = _invoke("test", str(x), str(x), "--zn", "2", "--alpha", "1.5")
        assert result.exit_code == 3


class TestBench:
    def test_single_cell_table(self, tmp_path: Path) -> None:
        out = tmp_path / "bench"
        result = _bench(out)
        assert result.exit_code == 0
        lines = (out / "results.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "n,trial,estimate,ci_lo,ci_hi,truth,abs_err"
        assert len(lines) == 2
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["experiment"] == "gauss1d_mean"
        assert summary["per_size"][0]["n"] == 10

    def test_same_seed_same_table(self, tmp_path: Path) -> None:
        _bench(tmp_path / "a", "--seed", "4")
        _bench(tmp_path / "b", "--seed", "4", "--workers", "3")
        first = (tmp_path / "a" / "results.csv").read_bytes()
        assert first == (tmp_path / "b" / "results.csv").read_bytes()

    def test_unknown_experiment_exit_3(self, tmp_path: Path) -> None:
        result = _invoke("bench", "--experiment", "nope", "--out", str(tmp_path))
        assert result.exit_code == 3

    def test_decreasing_grid_exit_3(self, tmp_path: Path) -> None:
        result = _invoke("bench", "-e", "norm_h0", "--grid", "100,10", "--out", str(tmp_path))
        assert result.exit_code == 3

    def test_malformed_grid_exit_3(self, tmp_path: Path) -> None:
        result = _invoke("bench", "-e", "norm_h0", "--grid", "10,x", "--out", str(tmp_path))
        assert result.exit_code == 3


class TestRuns:
    def test_list_empty(self, tmp_path: Path) -> None:
        result = _invoke("runs", "list", "--json", db=tmp_path / "test.db")
        assert result.exit_code == 0
        assert json.loads(result.output) == []

    def test_record_list_show_export_delete(self, tmp_path: Path) -> None:
        db = tmp_path / "test.db"
        assert _bench(tmp_path / "out", "--record", db=db).exit_code == 0

        listed = _invoke("runs", "list", "--json", db=db)
        assert listed.exit_code == 0
        runs = json.loads(listed.output)
        assert len(runs) == 1
        run_id = str(runs[0]["id"])
        assert runs[0]["experiment"] == "gauss1d_mean"

        shown = _invoke("runs", "show", run_id, "--json", db=db)
        assert shown.exit_code == 0
        assert json.loads(shown.output)["experiment"] == "gauss1d_mean"

        exported = _invoke("runs", "export", run_id, db=db)
        assert exported.exit_code == 0
        assert len(json.loads(exported.output)["rows"]) == 1

        out_file = tmp_path / "run.json"
        assert _invoke("runs", "export", run_id, "-o", str(out_file), db=db).exit_code == 0
        assert json.loads(out_file.read_text(encoding="utf-8"))["experiment"] == "gauss1d_mean"

        assert _invoke("runs", "delete", run_id, "--yes", db=db).exit_code == 0
        assert _invoke("runs", "show", run_id, db=db).exit_code == 2

    def test_show_table(self, tmp_path: Path) -> None:
        db = tmp_path / "test.db"
        _bench(tmp_path / "out", "--record", db=db)
        result = _invoke("runs", "show", "1", db=db)
        assert result.exit_code == 0
        assert "gauss1d_mean" in result.output

    def test_list_filters_by_experiment(self, tmp_path: Path) -> None:
        db = tmp_path / "test.db"
        _bench(tmp_path / "out", "--record", db=db)
        result = _invoke("runs", "list", "--experiment", "norm_h0", "--json", db=db)
        assert json.loads(result.output) == []

    def test_show_missing_run_exit_2(self, tmp_path: Path) -> None:
        result = _invoke("runs", "show", "42", db=tmp_path / "test.db")
        assert result.exit_code == 2
