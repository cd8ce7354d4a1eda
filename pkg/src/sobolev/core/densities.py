"""Named densities used by the oracles and the benchmark generators.

A :class:`NamedDensity` is a product of one-dimensional factors, so Fourier
coefficients and Sobolev integrals factorise across coordinates.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, stats

from sobolev.errors import InvalidParameterError, UnsupportedOracleError

# Gaussian factors are treated as supported on mean +/- this many standard deviations.
_GAUSSIAN_REACH = 12.0

Piece = tuple[float, float, Polynomial]


class Family(StrEnum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    TRIANGULAR = "triangular"


@dataclass(frozen=True, slots=True)
class Factor1D:
    """A univariate density from one of the named families.

    ``params`` is ``(mean, sd)`` for gaussian, ``(low, high)`` for uniform and
    ``(low, mode, high)`` for triangular.
    """

    family: Family
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.family is Family.GAUSSIAN:
            _, sd = self.params
            if not sd > 0:
                raise InvalidParameterError(f"Gaussian sd must be positive, got {sd}.")
        elif self.family is Family.UNIFORM:
            low, high = self.params
            if not low < high:
                raise InvalidParameterError(f"Uniform needs low < high, got {self.params}.")
        else:
            low, mode, high = self.params
            if not (low <= mode <= high and low < high):
                raise InvalidParameterError(
                    f"Triangular needs low <= mode <= high and low < high, got {self.params}."
                )

    @classmethod
    def gaussian(cls, mean: float = 0.0, sd: float = 1.0) -> Factor1D:
        return cls(Family.GAUSSIAN, (float(mean), float(sd)))

    @classmethod
    def uniform(cls, low: float = 0.0, high: float = 1.0) -> Factor1D:
        return cls(Family.UNIFORM, (float(low), float(high)))

    @classmethod
    def triangular(cls, low: float = 0.0, mode: float = 0.5, high: float = 1.0) -> Factor1D:
        return cls(Family.TRIANGULAR, (float(low), float(mode), float(high)))

    @property
    def distribution(self) -> stats.rv_continuous:
        if self.family is Family.GAUSSIAN:
            mean, sd = self.params
            return stats.norm(loc=mean, scale=sd)
        if self.family is Family.UNIFORM:
            low, high = self.params
            return stats.uniform(loc=low, scale=high - low)
        low, mode, high = self.params
        return stats.triang(c=(mode - low) / (high - low), loc=low, scale=high - low)

    def pdf(self, x: np.ndarray | float) -> np.ndarray:
        return self.distribution.pdf(x)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.distribution.rvs(size=n, random_state=rng)

    def support(self) -> tuple[float, float]:
        """Interval outside of which the density is zero (or below 1e-30 for gaussians)."""
        if self.family is Family.GAUSSIAN:
            mean, sd = self.params
            return mean - _GAUSSIAN_REACH * sd, mean + _GAUSSIAN_REACH * sd
        return self.params[0], self.params[-1]

    def breakpoints(self) -> tuple[float, ...]:
        """Points where the density or its derivative is not smooth, plus the support ends."""
        if self.family is Family.GAUSSIAN:
            low, high = self.support()
            return low, self.params[0], high
        return tuple(dict.fromkeys(self.params))

    def pieces(self) -> list[Piece]:
        """The density as polynomial pieces ``(a, b, poly)``; gaussians have none."""
        if self.family is Family.UNIFORM:
            low, high = self.params
            return [(low, high, Polynomial([1.0 / (high - low)]))]
        if self.family is Family.TRIANGULAR:
            low, mode, high = self.params
            width = high - low
            out: list[Piece] = []
            if mode > low:
                slope = 2.0 / (width * (mode - low))
                out.append((low, mode, Polynomial([-low, 1.0]) * slope))
            if high > mode:
                slope = 2.0 / (width * (high - mode))
                out.append((mode, high, Polynomial([high, -1.0]) * slope))
            return out
        raise UnsupportedOracleError("Gaussian densities are not piecewise polynomial.")

    def affine(self, scale: float, offset: float) -> Factor1D:
        """Law of ``scale * X + offset`` when ``X`` has this density."""
        if scale == 0 or not math.isfinite(scale):
            raise InvalidParameterError(f"Affine scale must be finite and nonzero, got {scale}.")
        if self.family is Family.GAUSSIAN:
            mean, sd = self.params
            return Factor1D.gaussian(scale * mean + offset, abs(scale) * sd)
        mapped = [scale * p + offset for p in self.params]
        if scale < 0:
            mapped.reverse()
        return Factor1D(self.family, tuple(mapped))

    def total_mass(self) -> float:
        low, high = self.support()
        mass, _ = integrate.quad(self.pdf, low, high, points=self.breakpoints()[1:-1] or None)
        return float(mass)


@dataclass(frozen=True, slots=True)
class NamedDensity:
    """Product density ``prod_j factors[j](x_j)`` on ``R^D``."""

    factors: tuple[Factor1D, ...]

    def __post_init__(self) -> None:
        if not self.factors:
            raise InvalidParameterError("A density needs at least one factor.")

    @staticmethod
    def _broadcast(value: float | Sequence[float], dimension: int) -> list[float]:
        arr = np.broadcast_to(np.asarray(value, dtype=np.float64), (dimension,))
        return arr.tolist()

    @classmethod
    def gaussian(
        cls,
        mean: float | Sequence[float] = 0.0,
        sd: float | Sequence[float] = 1.0,
        dimension: int = 1,
    ) -> NamedDensity:
        means = cls._broadcast(mean, dimension)
        sds = cls._broadcast(sd, dimension)
        return cls(tuple(Factor1D.gaussian(m, s) for m, s in zip(means, sds, strict=True)))

    @classmethod
    def uniform(cls, low: float = 0.0, high: float = 1.0, dimension: int = 1) -> NamedDensity:
        return cls((Factor1D.uniform(low, high),) * dimension)

    @classmethod
    def triangular(
        cls, low: float = 0.0, mode: float = 0.5, high: float = 1.0, dimension: int = 1
    ) -> NamedDensity:
        return cls((Factor1D.triangular(low, mode, high),) * dimension)

    @classmethod
    def product(cls, *densities: NamedDensity) -> NamedDensity:
        return cls(tuple(f for d in densities for f in d.factors))

    @property
    def dimension(self) -> int:
        return len(self.factors)

    @property
    def family(self) -> str:
        families = {f.family for f in self.factors}
        return families.pop().value if len(families) == 1 else "product"

    def pdf(self, points: np.ndarray) -> np.ndarray:
        """Density at each row of ``points`` (shape ``(m, D)``; 1-D input is one column)."""
        arr = np.asarray(points, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None] if self.dimension == 1 else arr[None, :]
        values = np.ones(arr.shape[0])
        for j, factor in enumerate(self.factors):
            values = values * factor.pdf(arr[:, j])
        return values

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` independent draws, shape ``(n, D)``; coordinates are drawn in order."""
        return np.column_stack([f.sample(rng, n) for f in self.factors])

    def affine(
        self, scale: float | Sequence[float], offset: float | Sequence[float]
    ) -> NamedDensity:
        scales = self._broadcast(scale, self.dimension)
        offsets = self._broadcast(offset, self.dimension)
        return dataclasses.replace(
            self,
            factors=tuple(
                f.affine(a, b) for f, a, b in zip(self.factors, scales, offsets, strict=True)
            ),
        )

    def total_mass(self) -> float:
        return math.prod(f.total_mass() for f in self.factors)

    def describe(self) -> str:
        parts = []
        for f in self.factors:
            args = ", ".join(f"{p:g}" for p in f.params)
            parts.append(f"{f.family.value}({args})")
        return " x ".join(parts)
