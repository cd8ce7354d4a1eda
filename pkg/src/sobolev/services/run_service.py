"""Persistence of benchmark runs in the local SQLite history."""

from __future__ import annotations

import json
from pathlib import Path

from sqlalchemy import select
from sqlalchemy.orm import Session, selectinload

from sobolev.models.run import BenchRecord, BenchRun
from sobolev.services.bench_service import BenchResult


class RunService:
    """Service layer wrapping the run-history tables."""

    def __init__(self, session: Session) -> None:
        self._session = session

    def record_run(self, result: BenchResult) -> BenchRun:
        """Store a finished benchmark with all of its rows."""
        run = BenchRun(
            experiment=result.config.experiment.value,
            seed=result.config.seed,
            trials=result.config.trials,
            config_json=result.config.model_dump_json(),
            summary_json=result.summary.to_json(),
        )
        run.rows = [BenchRecord(**row.model_dump()) for row in result.rows]
        self._session.add(run)
        self._session.flush()
        return run

    def get_run(self, run_id: int) -> BenchRun:
        """Fetch a run by id. Raises ValueError if not found."""
        run = self._session.execute(
            select(BenchRun).options(selectinload(BenchRun.rows)).where(BenchRun.id == run_id)
        ).scalar_one_or_none()
        if run is None:
            raise ValueError(f"Run {run_id} not found.")
        return run

    def list_runs(self, experiment: str | None = None) -> list[BenchRun]:
        """Return runs oldest first, optionally restricted to one experiment."""
        query = select(BenchRun).order_by(BenchRun.id)
        if experiment is not None:
            query = query.where(BenchRun.experiment == experiment)
        return list(self._session.execute(query).scalars().all())

    def delete_run(self, run_id: int) -> None:
        """Delete a run and its rows."""
        run = self.get_run(run_id)
        self._session.delete(run)
        self._session.flush()

    def export_run(self, run_id: int) -> str:
        """Export a run, its configuration, summary and rows as JSON."""
        run = self.get_run(run_id)
        data = {
            "id": run.id,
            "experiment": run.experiment,
            "seed": run.seed,
            "trials": run.trials,
            "created_at": run.created_at.isoformat() if run.created_at else None,
            "config": json.loads(run.config_json),
            "summary": json.loads(run.summary_json),
            "rows": [
                {
                    "n": r.n,
                    "trial": r.trial,
                    "estimate": r.estimate,
                    "ci_lo": r.ci_lo,
                    "ci_hi": r.ci_hi,
                    "truth": r.truth,
                    "abs_err": r.abs_err,
                }
                for r in run.rows
            ],
        }
        return json.dumps(data, indent=2)

    def export_to_file(self, run_id: int, path: Path) -> Path:
        """Export run JSON to a file."""
        path.write_text(self.export_run(run_id), encoding="utf-8")
        return path
