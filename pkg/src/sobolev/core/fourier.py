"""Rescaling into the torus box and streaming empirical Fourier coefficients."""

from __future__ import annotations

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Self

import numpy as np

from sobolev.config import DEFAULT_MARGIN
from sobolev.core.lattice import LatticeSpec
from sobolev.errors import (
    EmptyAccumulatorError,
    InputDataError,
    InvalidParameterError,
    OutOfBoxError,
    SpecMismatchError,
)
from sobolev.models.reports import RescaleProvenance

logger = logging.getLogger(__name__)

# Slack on the [-pi, pi] check so that mapped endpoints survive rounding.
_BOX_TOLERANCE = 1e-12
# Complex entries held per chunk of the phase product (samples x lattice size).
_CHUNK_ENTRIES = 1 << 20
# Range of the per-dimension scale multiplier drawn by random rescaling.
_JITTER_RANGE = (0.8, 1.0)


class RescaleMode(StrEnum):
    IDENTITY = "identity"
    MINMAX = "minmax"
    FIXED_BOX = "fixed_box"
    RANDOM = "random_rescale"


def as_sample_matrix(data: np.ndarray | list[list[float]], *, name: str = "samples") -> np.ndarray:
    """Coerce to a finite float array of shape ``(n, D)``; 1-D input is one column."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InputDataError(f"{name} must be a non-empty (n, D) matrix, got shape {arr.shape}.")
    bad = ~np.isfinite(arr).all(axis=1)
    if bad.any():
        raise InputDataError(f"{name} contain a non-finite value", row=int(np.argmax(bad)) + 1)
    return arr


@dataclass(frozen=True, eq=False)
class RescaleMap:
    """Per-dimension affine map ``x' = scale * x + offset`` into ``[-pi, pi]^D``."""

    mode: RescaleMode
    scale: np.ndarray
    offset: np.ndarray
    source_low: np.ndarray | None = None
    source_high: np.ndarray | None = None
    margin: float | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if np.any(self.scale == 0) or not np.all(np.isfinite(self.scale)):
            raise InvalidParameterError("Rescale map must have finite, nonzero scales.")

    @classmethod
    def identity(cls, dimension: int) -> RescaleMap:
        return cls(RescaleMode.IDENTITY, np.ones(dimension), np.zeros(dimension))

    @property
    def dimension(self) -> int:
        return int(self.scale.shape[0])

    def apply(self, data: np.ndarray) -> np.ndarray:
        arr = as_sample_matrix(data)
        if arr.shape[1] != self.dimension:
            raise InputDataError(
                f"Samples have dimension {arr.shape[1]}, rescale map expects {self.dimension}."
            )
        if self.mode is RescaleMode.IDENTITY:
            return arr
        return arr * self.scale + self.offset

    def invert(self, data: np.ndarray) -> np.ndarray:
        arr = as_sample_matrix(data)
        return (arr - self.offset) / self.scale

    def provenance(self) -> RescaleProvenance:
        return RescaleProvenance(
            mode=self.mode.value,
            scale=self.scale.tolist(),
            offset=self.offset.tolist(),
            source_low=None if self.source_low is None else self.source_low.tolist(),
            source_high=None if self.source_high is None else self.source_high.tolist(),
            margin=self.margin,
            seed=self.seed,
        )


def _box_map(
    low: np.ndarray, high: np.ndarray, half_width: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Scale and offset carrying ``[low, high]`` onto ``[-half_width, half_width]``."""
    scale = 2.0 * half_width / (high - low)
    offset = -half_width - low * scale
    return scale, offset


def fit_rescale(
    data: np.ndarray,
    mode: RescaleMode | str,
    *,
    seed: int | None = None,
    box: tuple[float | np.ndarray, float | np.ndarray] | None = None,
    margin: float = DEFAULT_MARGIN,
) -> RescaleMap:
    """Build the map that carries ``data`` into ``[-pi, pi]^D``.

    ``fixed_box`` needs ``box=(low, high)`` (scalars broadcast over dimensions);
    ``minmax`` and ``random_rescale`` use the observed per-dimension range shrunk by
    ``margin``; ``random_rescale`` additionally multiplies each scale by a seeded
    uniform draw from [0.8, 1.0].
    """
    mode = RescaleMode(mode)
    arr = as_sample_matrix(data)
    dim = arr.shape[1]
    if mode is RescaleMode.IDENTITY:
        return RescaleMap.identity(dim)

    if mode is RescaleMode.FIXED_BOX:
        if box is None:
            raise InvalidParameterError("fixed_box rescaling needs a source box (low, high).")
        low = np.broadcast_to(np.asarray(box[0], dtype=np.float64), (dim,)).copy()
        high = np.broadcast_to(np.asarray(box[1], dtype=np.float64), (dim,)).copy()
        if np.any(high <= low):
            raise InvalidParameterError(f"Source box must have low < high, got {box}.")
        scale, offset = _box_map(low, high, np.full(dim, math.pi))
        return RescaleMap(mode, scale, offset, source_low=low, source_high=high)

    if not 0 <= margin < 1:
        raise InvalidParameterError(f"Margin must lie in [0, 1), got {margin}.")
    low = arr.min(axis=0)
    high = arr.max(axis=0)
    degenerate = np.flatnonzero(high == low)
    if degenerate.size:
        raise InputDataError(
            f"Cannot rescale: dimension {int(degenerate[0])} has zero range (min = max)."
        )
    half_width = np.full(dim, math.pi * (1.0 - margin))
    if mode is RescaleMode.RANDOM:
        jitter = np.random.default_rng(seed).uniform(*_JITTER_RANGE, size=dim)
        half_width = half_width * jitter
    scale, offset = _box_map(low, high, half_width)
    return RescaleMap(
        mode,
        scale,
        offset,
        source_low=low,
        source_high=high,
        margin=margin,
        seed=seed if mode is RescaleMode.RANDOM else None,
    )


def wrap_to_torus(data: np.ndarray) -> np.ndarray:
    """Reduce every coordinate modulo 2 pi into ``[-pi, pi)``.

    Wrapped samples are draws from the periodic summation of their density, whose
    coefficients at integer frequencies equal those of the unwrapped density.
    """
    arr = as_sample_matrix(data)
    return np.mod(arr + math.pi, 2.0 * math.pi) - math.pi


def _phase_table(column: np.ndarray, zn: int) -> np.ndarray:
    """``exp(-i k x)`` for ``k = -zn..zn``, built by repeated multiplication.

    Negative frequencies are exact conjugates of the positive ones.
    """
    table = np.empty((column.shape[0], 2 * zn + 1), dtype=np.complex128)
    table[:, zn] = 1.0
    if zn:
        step = np.exp(-1j * column)
        for k in range(1, zn + 1):
            table[:, zn + k] = table[:, zn + k - 1] * step
        table[:, :zn] = np.conj(table[:, : zn : -1])
    return table


def phase_products(samples: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    """``exp(-i <z, x_j>)`` for every sample row and lattice index, shape ``(m, size)``."""
    tables = [_phase_table(samples[:, d], spec.zn) for d in range(spec.dimension)]
    product = tables[0]
    m = samples.shape[0]
    for table in tables[1:]:
        product = (product[:, :, None] * table[:, None, :]).reshape(m, -1)
    return product


@dataclass(eq=False)
class CoeffAccumulator:
    """Running sums of ``exp(-i <z, x>)`` over a lattice.

    Single writer. Concurrent ingestion goes through private accumulators that are
    combined with :meth:`merge`.
    """

    spec: LatticeSpec
    n: int = 0
    _sums: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._sums = np.zeros(self.spec.size, dtype=np.complex128)

    @property
    def sums(self) -> np.ndarray:
        view = self._sums.view()
        view.flags.writeable = False
        return view

    def update(self, x: np.ndarray | list[float] | float) -> Self:
        """Add one point of ``[-pi, pi]^D``."""
        point = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if point.shape != (self.spec.dimension,):
            raise InputDataError(
                f"Point has shape {point.shape}, expected ({self.spec.dimension},)."
            )
        return self.update_batch(point[None, :])

    def update_batch(self, samples: np.ndarray) -> Self:
        """Add every row of ``samples``; all rows must already lie in ``[-pi, pi]^D``."""
        arr = as_sample_matrix(samples)
        if arr.shape[1] != self.spec.dimension:
            raise InputDataError(
                f"Samples have dimension {arr.shape[1]}, lattice has {self.spec.dimension}."
            )
        outside = np.abs(arr) > math.pi + _BOX_TOLERANCE
        if outside.any():
            row = int(np.argmax(outside.any(axis=1))) + 1
            raise OutOfBoxError("Sample lies outside [-pi, pi]^D; rescale first", row=row)
        chunk = max(1, _CHUNK_ENTRIES // self.spec.size)
        for start in range(0, arr.shape[0], chunk):
            block = arr[start : start + chunk]
            self._sums += phase_products(block, self.spec).sum(axis=0)
        self.n += arr.shape[0]
        return self

    def coefficients(self) -> np.ndarray:
        """Empirical coefficients ``p_hat(z) = sums[z] / n`` in lattice order."""
        if self.n == 0:
            raise EmptyAccumulatorError("No samples accumulated; coefficients are undefined.")
        return self._sums / self.n

    def merge(self, other: CoeffAccumulator) -> CoeffAccumulator:
        """A new accumulator holding the samples of both operands."""
        if other.spec != self.spec:
            raise SpecMismatchError(
                f"Cannot merge accumulators over {self.spec} and {other.spec}."
            )
        merged = CoeffAccumulator(self.spec)
        merged.n = self.n + other.n
        merged._sums = self._sums + other._sums
        return merged

    def copy(self) -> CoeffAccumulator:
        return self.merge(CoeffAccumulator(self.spec))


def accumulate(spec: LatticeSpec, samples: np.ndarray, *, workers: int = 1) -> CoeffAccumulator:
    """Accumulate ``samples``, sharded over ``workers`` threads and merged in shard order."""
    arr = as_sample_matrix(samples)
    if workers < 1:
        raise InvalidParameterError(f"workers must be >= 1, got {workers}.")
    if workers == 1 or arr.shape[0] < 2 * workers:
        return CoeffAccumulator(spec).update_batch(arr)
    shards = np.array_split(arr, workers)
    logger.debug("Accumulating %d samples in %d shards", arr.shape[0], len(shards))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda shard: CoeffAccumulator(spec).update_batch(shard), shards))
    return functools.reduce(CoeffAccumulator.merge, parts)
