"""CSV ingestion of sample files and CSV emission of benchmark tables."""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from sobolev.errors import InputDataError

logger = logging.getLogger(__name__)


def _parse_row(row: list[str]) -> list[float] | None:
    try:
        return [float(cell) for cell in row]
    except ValueError:
        return None


def read_samples(path: Path | str) -> np.ndarray:
    """Read one sample per row, ``D`` comma-separated columns, into an ``(n, D)`` array.

    A first row that does not parse as numbers is taken as a header. Blank lines are
    skipped. Ragged rows, unparseable cells and non-finite values raise
    :class:`InputDataError` naming the file line.
    """
    path = Path(path)
    if not path.is_file():
        raise InputDataError(f"Sample file '{path}' does not exist.")
    rows: list[list[float]] = []
    width: int | None = None
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            for line_no, raw in enumerate(csv.reader(handle), start=1):
                cells = [c.strip() for c in raw]
                if not any(cells):
                    continue
                values = _parse_row(cells)
                if values is None:
                    if line_no == 1:
                        logger.debug("Treating first line of %s as a header", path)
                        continue
                    raise InputDataError(f"{path}: non-numeric value", row=line_no)
                if not all(math.isfinite(v) for v in values):
                    raise InputDataError(f"{path}: non-finite value", row=line_no)
                if width is None:
                    width = len(values)
                elif len(values) != width:
                    raise InputDataError(
                        f"{path}: expected {width} columns, found {len(values)}", row=line_no
                    )
                rows.append(values)
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise InputDataError(f"Cannot read '{path}': {exc}") from exc
    if not rows:
        raise InputDataError(f"Sample file '{path}' contains no samples.")
    logger.info("Read %d samples of dimension %d from %s", len(rows), width, path)
    return np.asarray(rows, dtype=np.float64)


def write_samples(path: Path | str, samples: np.ndarray) -> Path:
    """Write an ``(n, D)`` array with one sample per row and no header."""
    path = Path(path)
    arr = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if arr.shape[0] == 1 and np.ndim(samples) == 1:
        arr = arr.T
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerows([repr(float(v)) for v in row] for row in arr)
    return path


def format_cell(value: float | int | None) -> str:
    """Blank for missing values, ``repr`` for floats so tables round-trip exactly."""
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def write_table(path: Path | str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path
