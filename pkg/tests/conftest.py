"""Shared test fixtures."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

import sobolev.models  # noqa: F401  registers the tables on Base.metadata
from sobolev.io import write_samples
from sobolev.models.base import Base
from sobolev.models.bench import BenchConfig, ExperimentTag
from sobolev.services.bench_service import BenchResult, BenchService
from sobolev.services.run_service import RunService


@pytest.fixture()
def tmp_db(tmp_path: Path) -> Path:
    """Return a temporary database file path."""
    return tmp_path / "test.db"


@pytest.fixture()
def session(tmp_db: Path) -> Session:
    """Create a file-backed SQLite session with all tables."""
    engine = create_engine(f"sqlite:///{tmp_db}", echo=False)
    Base.metadata.create_all(engine)
    factory = sessionmaker(bind=engine)
    sess = factory()
    yield sess  # type: ignore[misc]
    sess.close()
    engine.dispose()


@pytest.fixture()
def run_service(session: Session) -> RunService:
    """Return a RunService bound to the test session."""
    return RunService(session)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture()
def sample_file(tmp_path: Path) -> Callable[[str, np.ndarray], Path]:
    """Write an array as a headerless CSV sample file under ``tmp_path``."""

    def _write(name: str, samples: np.ndarray) -> Path:
        return write_samples(tmp_path / name, samples)

    return _write


@pytest.fixture()
def small_bench() -> BenchResult:
    """Two sizes, two trials of the one-dimensional mean-shift experiment."""
    config = BenchConfig(experiment=ExperimentTag.GAUSS1D_MEAN, grid=[10, 40], trials=2, seed=3)
    return BenchService().run(config)
