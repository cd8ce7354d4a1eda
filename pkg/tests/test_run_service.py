"""Tests for RunService."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from sobolev.services.bench_service import BenchResult
from sobolev.services.run_service import RunService


class TestRecordRun:
    def test_record_run(self, run_service: RunService, small_bench: BenchResult) -> None:
        run = run_service.record_run(small_bench)
        assert run.id is not None
        assert run.experiment == "gauss1d_mean"
        assert run.seed == 3
        assert run.trials == 2
        assert len(run.rows) == 4

    def test_rows_keep_values(self, run_service: RunService, small_bench: BenchResult) -> None:
        run = run_service.record_run(small_bench)
        fetched = run_service.get_run(run.id)
        assert [r.estimate for r in fetched.rows] == [r.estimate for r in small_bench.rows]
        assert [(r.n, r.trial) for r in fetched.rows] == [(10, 0), (10, 1), (40, 0), (40, 1)]


class TestGetRun:
    def test_nonexistent_run_raises(self, run_service: RunService) -> None:
        with pytest.raises(ValueError, match="Run 99 not found"):
            run_service.get_run(99)


class TestListRuns:
    def test_list_runs(self, run_service: RunService, small_bench: BenchResult) -> None:
        run_service.record_run(small_bench)
        run_service.record_run(small_bench)
        runs = run_service.list_runs()
        assert [r.id for r in runs] == sorted(r.id for r in runs)
        assert len(runs) == 2

    def test_filter_by_experiment(self, run_service: RunService, small_bench: BenchResult) -> None:
        run_service.record_run(small_bench)
        assert len(run_service.list_runs("gauss1d_mean")) == 1
        assert run_service.list_runs("norm_h0") == []


class TestDeleteRun:
    def test_delete_run(self, run_service: RunService, small_bench: BenchResult) -> None:
        run = run_service.record_run(small_bench)
        run_service.delete_run(run.id)
        assert run_service.list_runs() == []
        with pytest.raises(ValueError):
            run_service.get_run(run.id)

    def test_delete_nonexistent_raises(self, run_service: RunService) -> None:
        with pytest.raises(ValueError):
            run_service.delete_run(7)


class TestExport:
    def test_export_json(self, run_service: RunService, small_bench: BenchResult) -> None:
        run = run_service.record_run(small_bench)
        data = json.loads(run_service.export_run(run.id))
        assert data["experiment"] == "gauss1d_mean"
        assert data["config"]["grid"] == [10, 40]
        assert data["summary"]["truth"] == pytest.approx(small_bench.summary.truth)
        assert len(data["rows"]) == 4
        assert set(data["rows"][0]) == {
            "n", "trial", "estimate", "ci_lo", "ci_hi", "truth", "abs_err"
        }

    def test_export_to_file(
        self, run_service: RunService, small_bench: BenchResult, tmp_path: Path
    ) -> None:
        run = run_service.record_run(small_bench)
        out = run_service.export_to_file(run.id, tmp_path / "run.json")
        assert out.exists()
        assert json.loads(out.read_text(encoding="utf-8"))["id"] == run.id
