"""Plug-in estimators of Sobolev inner products, norms and distances."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from sobolev.core.fourier import CoeffAccumulator, RescaleMap, accumulate, as_sample_matrix
from sobolev.core.lattice import LatticeSpec, sobolev_weights
from sobolev.errors import InputDataError, InvalidParameterError, SpecMismatchError
from sobolev.models.reports import EstimateReport, QuantityTag

logger = logging.getLogger(__name__)


class ZnMode(StrEnum):
    OPTIMAL = "optimal"
    BUDGET = "budget"
    MANUAL = "manual"


@dataclass(frozen=True, slots=True)
class ZnRule:
    """How the truncation radius grows with the sample size.

    ``optimal`` needs the smoothness ``s_prime`` of the densities, ``budget`` trades
    accuracy for an ``O(n^(1 + theta))`` running time, ``manual`` fixes the radius.
    """

    mode: ZnMode
    value: float
    c: float = 1.0

    @classmethod
    def optimal(cls, s_prime: float, c: float = 1.0) -> ZnRule:
        return cls(ZnMode.OPTIMAL, s_prime, c)

    @classmethod
    def budget(cls, theta: float) -> ZnRule:
        return cls(ZnMode.BUDGET, theta)

    @classmethod
    def manual(cls, zn: int) -> ZnRule:
        return cls(ZnMode.MANUAL, zn)

    def describe(self) -> str:
        if self.mode is ZnMode.OPTIMAL:
            return f"optimal(s'={self.value:g}, c={self.c:g})"
        if self.mode is ZnMode.BUDGET:
            return f"budget(theta={self.value:g})"
        return f"manual({int(self.value)})"


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def choose_zn(n: int, s: float, dimension: int, rule: ZnRule) -> int:
    """Truncation radius for ``n`` samples of a ``dimension``-variate density.

    optimal: ``max(1, round(c * n^(2 / (4 s' + D))))``, with ``s' > s``;
    budget: ``max(1, round(n^(theta / D)))``, with ``0 < theta <= 1``;
    manual: the given radius.
    """
    if n < 2:
        raise InvalidParameterError(f"Need at least 2 samples to choose Z_n, got {n}.")
    if dimension < 1:
        raise InvalidParameterError(f"Dimension must be at least 1, got {dimension}.")
    if rule.mode is ZnMode.MANUAL:
        if rule.value < 0 or not float(rule.value).is_integer():
            raise InvalidParameterError(
                f"Manual Z_n must be a non-negative integer, got {rule.value}."
            )
        return int(rule.value)
    if rule.mode is ZnMode.OPTIMAL:
        s_prime = rule.value
        if not s_prime > s:
            raise InvalidParameterError(
                f"Smoothness s' = {s_prime} must exceed the order s = {s}."
            )
        if not rule.c > 0:
            raise InvalidParameterError(f"Scale constant c must be positive, got {rule.c}.")
        return max(1, _round_half_up(rule.c * n ** (2.0 / (4.0 * s_prime + dimension))))
    theta = rule.value
    if not 0 < theta <= 1:
        raise InvalidParameterError(f"theta must lie in (0, 1], got {theta}.")
    return max(1, _round_half_up(n ** (theta / dimension)))


def weighted_pairing(
    p_hat: np.ndarray, q_hat: np.ndarray, weights: np.ndarray
) -> tuple[float, float]:
    """``sum_z w(z) p_hat(z) conj(q_hat(z))`` as (real part, |imaginary part|).

    Both parts are summed with ``math.fsum`` so the result does not depend on the
    order in which frequency shards were reduced.
    """
    terms = weights * p_hat * np.conj(q_hat)
    return math.fsum(terms.real.tolist()), abs(math.fsum(terms.imag.tolist()))


def estimate_inner_product(
    acc_p: CoeffAccumulator,
    acc_q: CoeffAccumulator,
    s: float,
    *,
    rescale: RescaleMap | None = None,
) -> EstimateReport:
    """Unbiased estimate of the truncated inner product from two independent samples."""
    if not acc_p.spec.same_lattice(acc_q.spec):
        raise SpecMismatchError(
            f"Accumulators use different lattices: {acc_p.spec} vs {acc_q.spec}."
        )
    if s < 0:
        raise InvalidParameterError(f"Sobolev order must be non-negative, got {s}.")
    weights = sobolev_weights(acc_p.spec, s)
    value, residual = weighted_pairing(acc_p.coefficients(), acc_q.coefficients(), weights)
    return EstimateReport(
        quantity=QuantityTag.INNER_PRODUCT,
        s=s,
        zn=acc_p.spec.zn,
        dimension=acc_p.spec.dimension,
        value=value,
        imag_residual=residual,
        n=[acc_p.n, acc_q.n],
        rescale=None if rescale is None else rescale.provenance(),
    )


def split_halves(
    samples: np.ndarray, seed: int | None, *, shuffle: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Partition rows into two halves (sizes ``n // 2`` and ``n - n // 2``).

    With ``shuffle`` the rows are first permuted by a generator seeded with ``seed``;
    without it the halves are the leading and trailing rows.
    """
    arr = as_sample_matrix(samples)
    n = arr.shape[0]
    if n < 2:
        raise InputDataError(f"Splitting needs at least 2 samples, got {n}.")
    order = np.random.default_rng(seed).permutation(n) if shuffle else np.arange(n)
    half = n // 2
    return arr[order[:half]], arr[order[half:]]


def estimate_squared_norm(
    samples: np.ndarray,
    s: float,
    spec: LatticeSpec,
    *,
    seed: int | None = 0,
    shuffle: bool = True,
    workers: int = 1,
    rescale: RescaleMap | None = None,
) -> EstimateReport:
    """Split-sample estimate of ``||p||^2_{H^s}`` (inner product of the two halves)."""
    first, second = split_halves(samples, seed, shuffle=shuffle)
    report = estimate_inner_product(
        accumulate(spec, first, workers=workers),
        accumulate(spec, second, workers=workers),
        s,
        rescale=rescale,
    )
    return report.model_copy(
        update={
            "quantity": QuantityTag.SQUARED_NORM,
            "n": [first.shape[0] + second.shape[0]],
            "seed": seed,
        }
    )


def estimate_squared_distance(
    samples_p: np.ndarray,
    samples_q: np.ndarray,
    s: float,
    spec: LatticeSpec,
    *,
    seed: int | None = 0,
    shuffle: bool = True,
    workers: int = 1,
    rescale: RescaleMap | None = None,
) -> EstimateReport:
    """``N_p - 2 S_pq + N_q``: split-sample norms plus the cross term on the full sets.

    The raw value may be negative at finite n; ``clamped_value`` is ``max(value, 0)``.
    """
    norm_p = estimate_squared_norm(samples_p, s, spec, seed=seed, shuffle=shuffle, workers=workers)
    norm_q = estimate_squared_norm(samples_q, s, spec, seed=seed, shuffle=shuffle, workers=workers)
    cross = estimate_inner_product(
        accumulate(spec, samples_p, workers=workers),
        accumulate(spec, samples_q, workers=workers),
        s,
    )
    value = math.fsum([norm_p.value, -2.0 * cross.value, norm_q.value])
    logger.debug(
        "Distance terms: N_p=%.6g S_pq=%.6g N_q=%.6g", norm_p.value, cross.value, norm_q.value
    )
    return EstimateReport(
        quantity=QuantityTag.SQUARED_DISTANCE,
        s=s,
        zn=spec.zn,
        dimension=spec.dimension,
        value=value,
        clamped_value=max(value, 0.0),
        imag_residual=norm_p.imag_residual + 2.0 * cross.imag_residual + norm_q.imag_residual,
        n=[norm_p.n[0], norm_q.n[0]],
        seed=seed,
        rescale=None if rescale is None else rescale.provenance(),
    )
