"""Platform-aware default paths, shared constants and logging setup."""

from __future__ import annotations

import logging
from pathlib import Path

from platformdirs import user_data_dir
from rich.console import Console
from rich.logging import RichHandler

_DB_FILENAME = "sobolev.db"
_APP_NAME = "sobolev"

REPORT_SCHEMA = "sobolev-report/1"
DEFAULT_THETA = 0.5
DEFAULT_MARGIN = 0.01
DEFAULT_RIDGE = 1e-8
DEFAULT_GRID = (10, 100, 1_000, 10_000, 100_000)


def default_db_path() -> Path:
    """Return the platform-appropriate default run-history database path."""
    data_dir = Path(user_data_dir(_APP_NAME))
    return data_dir / _DB_FILENAME


def default_bench_dir() -> Path:
    """Return the directory benchmark tables go to when ``--out`` is not given."""
    return Path(user_data_dir(_APP_NAME)) / "bench"


def configure_logging(verbosity: int = 0) -> None:
    """Route ``sobolev`` loggers to stderr through Rich.

    0 keeps warnings only, 1 adds progress, 2 and above adds debug detail.
    """
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logger = logging.getLogger("sobolev")
    logger.handlers.clear()
    handler = RichHandler(console=Console(stderr=True), show_path=False, show_time=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)
