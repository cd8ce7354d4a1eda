"""SQLite engine, sessions and migrations for the benchmark run history."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from alembic import command as alembic_command
from alembic.config import Config as AlembicConfig
from sqlalchemy import create_engine, event
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

logger = logging.getLogger(__name__)

_engines: dict[Path, Engine] = {}
_factories: dict[Path, sessionmaker[Session]] = {}


def _project_root() -> Path:
    # src/sobolev/database.py -> repository root holding the alembic/ scripts
    return Path(__file__).resolve().parent.parent.parent


def _alembic_cfg(db_url: str) -> AlembicConfig:
    # No ini file: alembic.ini would reconfigure logging for the whole process.
    root = _project_root()
    cfg = AlembicConfig()
    cfg.set_main_option("sqlalchemy.url", db_url)
    cfg.set_main_option("script_location", str(root / "alembic"))
    return cfg


def _enable_foreign_keys(dbapi_connection, _record) -> None:  # type: ignore[no-untyped-def]
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA foreign_keys=ON")
    cursor.close()


def get_engine(db_path: str | Path) -> Engine:
    """Create or return the cached engine for ``db_path``."""
    path = Path(db_path).resolve()
    if path not in _engines:
        path.parent.mkdir(parents=True, exist_ok=True)
        engine = create_engine(f"sqlite:///{path}", echo=False)
        event.listen(engine, "connect", _enable_foreign_keys)
        _engines[path] = engine
    return _engines[path]


def get_session_factory(db_path: str | Path) -> sessionmaker[Session]:
    path = Path(db_path).resolve()
    if path not in _factories:
        _factories[path] = sessionmaker(bind=get_engine(path))
    return _factories[path]


def init_db(db_path: str | Path) -> Path:
    """Apply pending Alembic migrations; idempotent. Returns the resolved path."""
    path = Path(db_path).resolve()
    get_engine(path)
    # Alembic logs every step at INFO; keep it off stderr.
    alembic_logger = logging.getLogger("alembic")
    previous = alembic_logger.level
    alembic_logger.setLevel(logging.WARNING)
    try:
        alembic_command.upgrade(_alembic_cfg(f"sqlite:///{path}"), "head")
    finally:
        alembic_logger.setLevel(previous)
    logger.debug("Run history ready at %s", path)
    return path


@contextmanager
def session_scope(db_path: str | Path) -> Iterator[Session]:
    """Migrated session that commits on success and rolls back on error."""
    init_db(db_path)
    session = get_session_factory(db_path)()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()
        reset_engine()


def reset_engine() -> None:
    """Dispose cached engines and factories. Used between CLI invocations and in tests."""
    for engine in _engines.values():
        engine.dispose()
    _engines.clear()
    _factories.clear()
