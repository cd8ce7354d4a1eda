"""Truncated frequency lattices and Sobolev weights.

The lattice of radius ``zn`` in dimension ``D`` is the cube
``{z in Z^D : max_j |z_j| <= zn}``. Every array indexed by the lattice in this
package uses the same lexicographic order as :func:`enumerate_lattice`, which is
also C order over the shape ``(2 * zn + 1,) * D``.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from sobolev.errors import InvalidSpecError

MultiIndex = tuple[int, ...]

# Largest 2s for which weights are formed with exact integer powers.
_EXACT_POWER_LIMIT = 16


@dataclass(frozen=True, slots=True)
class LatticeSpec:
    """Dimension, truncation radius and Sobolev order of a frequency lattice."""

    dimension: int
    zn: int
    s: float = 0.0

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InvalidSpecError(f"Dimension must be at least 1, got {self.dimension}.")
        if self.zn < 0:
            raise InvalidSpecError(f"Truncation radius must be non-negative, got {self.zn}.")
        if not math.isfinite(self.s) or self.s < 0:
            raise InvalidSpecError(f"Sobolev order must be a finite s >= 0, got {self.s}.")

    @property
    def side(self) -> int:
        return 2 * self.zn + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dimension

    @property
    def size(self) -> int:
        return self.side**self.dimension

    def index_of(self, z: Sequence[int]) -> int:
        """Position of ``z`` in the lexicographic lattice order."""
        if len(z) != self.dimension:
            raise InvalidSpecError(f"Index {tuple(z)} does not have dimension {self.dimension}.")
        if any(abs(c) > self.zn for c in z):
            raise InvalidSpecError(f"Index {tuple(z)} lies outside radius {self.zn}.")
        return int(np.ravel_multi_index(tuple(c + self.zn for c in z), self.shape))

    def with_order(self, s: float) -> LatticeSpec:
        return dataclasses.replace(self, s=s)

    def same_lattice(self, other: LatticeSpec) -> bool:
        """True when both specs index the same frequencies (orders may differ)."""
        return self.dimension == other.dimension and self.zn == other.zn


def enumerate_lattice(spec: LatticeSpec) -> list[MultiIndex]:
    """All ``z`` with ``||z||_inf <= zn``, lexicographic, ``(2 zn + 1) ** D`` of them."""
    axis = range(-spec.zn, spec.zn + 1)
    return list(itertools.product(axis, repeat=spec.dimension))


def lattice_array(spec: LatticeSpec) -> np.ndarray:
    """The lattice as an integer array of shape ``(size, D)`` in lattice order."""
    coords = np.unravel_index(np.arange(spec.size), spec.shape)
    return np.stack(coords, axis=1).astype(np.int64) - spec.zn


def sobolev_weight(z: Iterable[int], s: float) -> float:
    """The weight ``z^{2s} = prod_j (z_j^2)^s`` with ``0^0 = 1``.

    Weights beyond the float range are ``inf``, as in :func:`sobolev_weights`.
    """
    if s < 0:
        raise InvalidSpecError(f"Sobolev order must be non-negative, got {s}.")
    coords = [abs(int(c)) for c in z]
    if s == 0:
        return 1.0
    if any(c == 0 for c in coords):
        return 0.0
    two_s = 2 * s
    try:
        if float(two_s).is_integer() and two_s <= _EXACT_POWER_LIMIT:
            return float(math.prod(coords) ** int(two_s))
        return math.exp(s * math.fsum(math.log(c * c) for c in coords))
    except OverflowError:
        return math.inf


def axis_weights(zn: int, s: float) -> np.ndarray:
    """Per-coordinate weights ``(k^2)^s`` for ``k = -zn..zn``."""
    ks = np.abs(np.arange(-zn, zn + 1, dtype=np.float64))
    if s == 0:
        return np.ones_like(ks)
    return np.power(ks, 2.0 * s)


def sobolev_weights(spec: LatticeSpec, s: float | None = None) -> np.ndarray:
    """Weights over the whole lattice, in lattice order.

    The weight factorises over coordinates, so the full vector is an outer product
    of :func:`axis_weights`.
    """
    order = spec.s if s is None else s
    if order < 0:
        raise InvalidSpecError(f"Sobolev order must be non-negative, got {order}.")
    per_axis = axis_weights(spec.zn, order)
    return functools.reduce(np.multiply.outer, [per_axis] * spec.dimension).ravel()


def test_frequency_set(spec: LatticeSpec) -> list[MultiIndex]:
    """Frequencies that enter the two-sample feature vectors.

    ``z = 0`` is always dropped; for ``s > 0`` so is every index with a zero
    coordinate, since its weight vanishes and would leave the covariance singular.
    The result is closed under negation.
    """
    if spec.zn < 1:
        raise InvalidSpecError("The test frequency set needs a truncation radius of at least 1.")
    if spec.s > 0:
        frequencies = [z for z in enumerate_lattice(spec) if all(c != 0 for c in z)]
    else:
        frequencies = [z for z in enumerate_lattice(spec) if any(c != 0 for c in z)]
    if not frequencies:
        raise InvalidSpecError(f"Empty test frequency set for {spec}.")
    return frequencies


# Not a pytest test despite the name.
test_frequency_set.__test__ = False  # type: ignore[attr-defined]


def negation_half_space(frequencies: Iterable[MultiIndex]) -> list[MultiIndex]:
    """Keep the member of each pair ``{z, -z}`` whose first nonzero entry is positive."""
    kept = []
    for z in frequencies:
        leading = next((c for c in z if c != 0), 0)
        if leading > 0:
            kept.append(z)
    return kept
