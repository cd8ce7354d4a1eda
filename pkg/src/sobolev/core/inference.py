"""Asymptotic variance, confidence intervals and the chi-squared two-sample test.

Complex features ``z^s exp(-i <z, x>)`` are represented as real vectors: for each
frequency ``z`` of a negation half-space of the test set we keep
``sqrt(2 w(z)) * (cos <z, x>, sin <z, x>)``. With this scaling the non-constant
part of the estimator equals the dot product of mean feature vectors, and the
conjugate pairs that would make the covariance rank deficient are gone.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import special

from sobolev.config import DEFAULT_RIDGE
from sobolev.core.fourier import as_sample_matrix
from sobolev.core.lattice import (
    LatticeSpec,
    negation_half_space,
    sobolev_weight,
    test_frequency_set,
)
from sobolev.errors import InputDataError, InvalidParameterError, SingularCovarianceError
from sobolev.models.reports import CIReport, TestReport

logger = logging.getLogger(__name__)

_CHUNK_ROWS = 4096


@dataclass(frozen=True, slots=True)
class FeatureMap:
    """Half-space frequencies and their feature scales ``sqrt(2 w(z))``."""

    frequencies: np.ndarray
    scales: np.ndarray

    @classmethod
    def for_spec(cls, spec: LatticeSpec) -> FeatureMap:
        half = negation_half_space(test_frequency_set(spec))
        freqs = np.array(half, dtype=np.float64).reshape(len(half), spec.dimension)
        scales = np.sqrt([2.0 * sobolev_weight(z, spec.s) for z in half])
        if not np.all(np.isfinite(scales)):
            raise InvalidParameterError(
                f"Sobolev weights overflow for s={spec.s} at Z_n={spec.zn}; "
                "lower the order or the radius."
            )
        return cls(freqs, scales)

    @property
    def dof(self) -> int:
        return 2 * self.frequencies.shape[0]

    def features(self, samples: np.ndarray) -> np.ndarray:
        """Real feature matrix of shape ``(n, dof)``: scaled cosines, then scaled sines."""
        angles = samples @ self.frequencies.T
        return np.hstack([np.cos(angles) * self.scales, np.sin(angles) * self.scales])

    def mean(self, samples: np.ndarray) -> np.ndarray:
        total = np.zeros(self.dof)
        for start in range(0, samples.shape[0], _CHUNK_ROWS):
            total += self.features(samples[start : start + _CHUNK_ROWS]).sum(axis=0)
        return total / samples.shape[0]

    def projections(self, samples: np.ndarray, direction: np.ndarray) -> np.ndarray:
        """Per-sample ``features(x_j) @ direction`` without storing the feature matrix."""
        out = np.empty(samples.shape[0])
        for start in range(0, samples.shape[0], _CHUNK_ROWS):
            block = samples[start : start + _CHUNK_ROWS]
            out[start : start + block.shape[0]] = self.features(block) @ direction
        return out

    def difference_moments(
        self, samples_x: np.ndarray, samples_y: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Mean and covariance (divisor n) of ``features(x_j) - features(y_j)``.

        Rows are processed in blocks, so memory stays O(dof^2) for any sample size.
        """
        n = samples_x.shape[0]
        mean = self.mean(samples_x) - self.mean(samples_y)
        scatter = np.zeros((self.dof, self.dof))
        for start in range(0, n, _CHUNK_ROWS):
            stop = start + _CHUNK_ROWS
            centred = self.features(samples_x[start:stop]) - self.features(samples_y[start:stop])
            centred -= mean
            scatter += centred.T @ centred
        return mean, scatter / n


@dataclass(frozen=True, slots=True)
class VarianceEstimate:
    """``sigma_hat`` such that ``sqrt(n) (estimate - truth) / sigma_hat`` is roughly N(0, 1)."""

    sigma_hat: float
    n: int
    degenerate: bool = False


def _projected_variance(values: np.ndarray) -> tuple[float, bool]:
    if np.ptp(values) == 0:
        return 0.0, True
    return float(np.var(values)), False


def _checked_pair(
    samples_x: np.ndarray, samples_y: np.ndarray, spec: LatticeSpec
) -> tuple[np.ndarray, np.ndarray]:
    x = as_sample_matrix(samples_x, name="first samples")
    y = as_sample_matrix(samples_y, name="second samples")
    for name, arr in (("first", x), ("second", y)):
        if arr.shape[0] < 2:
            raise InputDataError(f"The {name} sample needs at least 2 rows, got {arr.shape[0]}.")
        if arr.shape[1] != spec.dimension:
            raise InputDataError(
                f"The {name} sample has dimension {arr.shape[1]}, lattice has {spec.dimension}."
            )
    return x, y


def asymptotic_variance(
    samples_x: np.ndarray, samples_y: np.ndarray, s: float, spec: LatticeSpec
) -> VarianceEstimate:
    """Plug-in asymptotic standard deviation of the inner-product estimator.

    ``sigma^2 = n_ref * (V'Sigma_W V / n_x + W'Sigma_V W / n_y)`` with
    ``n_ref = min(n_x, n_y)``; for equal sizes this is the block quadratic form
    ``[V; W]' blockdiag(Sigma_W, Sigma_V) [V; W]``. Covariances are never formed:
    each quadratic form is the variance of per-sample projections.
    """
    x, y = _checked_pair(samples_x, samples_y, spec)
    n_ref = min(x.shape[0], y.shape[0])
    if spec.zn == 0:
        return VarianceEstimate(0.0, n_ref, degenerate=True)
    fmap = FeatureMap.for_spec(spec.with_order(s))
    mean_x, mean_y = fmap.mean(x), fmap.mean(y)
    var_x, flat_x = _projected_variance(fmap.projections(x, mean_y))
    var_y, flat_y = _projected_variance(fmap.projections(y, mean_x))
    if flat_x and flat_y:
        return VarianceEstimate(0.0, n_ref, degenerate=True)
    sigma2 = n_ref * (var_x / x.shape[0] + var_y / y.shape[0])
    return VarianceEstimate(math.sqrt(max(sigma2, 0.0)), n_ref)


def distance_variance(
    samples_x: np.ndarray, samples_y: np.ndarray, s: float, spec: LatticeSpec
) -> VarianceEstimate:
    """Delta-method standard deviation of the squared-distance estimator.

    The gradient of the distance in the mean features is ``2 (W - V)`` for the first
    sample and ``2 (V - W)`` for the second, so the standard deviation vanishes
    when the two samples have equal mean features.
    """
    x, y = _checked_pair(samples_x, samples_y, spec)
    n_ref = min(x.shape[0], y.shape[0])
    if spec.zn == 0:
        return VarianceEstimate(0.0, n_ref, degenerate=True)
    fmap = FeatureMap.for_spec(spec.with_order(s))
    delta = fmap.mean(x) - fmap.mean(y)
    var_x, flat_x = _projected_variance(fmap.projections(x, delta))
    var_y, flat_y = _projected_variance(fmap.projections(y, delta))
    if flat_x and flat_y:
        return VarianceEstimate(0.0, n_ref, degenerate=True)
    sigma2 = 4.0 * n_ref * (var_x / x.shape[0] + var_y / y.shape[0])
    return VarianceEstimate(math.sqrt(max(sigma2, 0.0)), n_ref)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}.")


def confidence_interval(estimate: float, sigma_hat: float, n: int, alpha: float) -> CIReport:
    """Normal interval ``estimate +/- z_{1 - alpha/2} sigma_hat / sqrt(n)``."""
    _check_alpha(alpha)
    if sigma_hat < 0:
        raise InvalidParameterError(f"sigma_hat must be non-negative, got {sigma_hat}.")
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}.")
    half_width = float(special.ndtri(1.0 - alpha / 2.0)) * sigma_hat / math.sqrt(n)
    return CIReport(
        estimate=estimate,
        sigma_hat=sigma_hat,
        level=1.0 - alpha,
        lower=estimate - half_width,
        upper=estimate + half_width,
        n=n,
    )


@dataclass(frozen=True, slots=True)
class TwoSampleStatistic:
    statistic: float
    dof: int
    n: int
    ridge: float


def statistic_from_moments(
    mean: np.ndarray, cov: np.ndarray, n: int, ridge: float = DEFAULT_RIDGE
) -> float:
    """``T = n W' (Sigma + ridge * tr(Sigma) / dof * I)^-1 W`` from the sufficient statistics."""
    if ridge < 0:
        raise InvalidParameterError(f"ridge must be non-negative, got {ridge}.")
    if not np.any(mean):
        return 0.0
    dof = mean.shape[0]
    regularised = cov + ridge * (np.trace(cov) / dof) * np.eye(dof)
    try:
        factor = scipy.linalg.cho_factor(regularised, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularCovarianceError(
            "Feature covariance is singular even after ridge regularisation",
            condition=float(np.linalg.cond(regularised)),
        ) from exc
    statistic = n * float(mean @ scipy.linalg.cho_solve(factor, mean))
    return max(statistic, 0.0)


def two_sample_statistic(
    samples_x: np.ndarray,
    samples_y: np.ndarray,
    s: float,
    spec: LatticeSpec,
    ridge: float = DEFAULT_RIDGE,
) -> TwoSampleStatistic:
    """Hotelling-type statistic on paired feature differences ``W_j = F(x_j) - F(y_j)``.

    Samples are paired by row index; unequal sizes are cut to the common prefix.
    """
    x, y = _checked_pair(samples_x, samples_y, spec)
    if x.shape[0] != y.shape[0]:
        n = min(x.shape[0], y.shape[0])
        logger.warning(
            "Sample sizes differ (%d vs %d); pairing the first %d rows of each",
            x.shape[0],
            y.shape[0],
            n,
        )
        x, y = x[:n], y[:n]
    n = x.shape[0]
    fmap = FeatureMap.for_spec(spec.with_order(s))
    if n < fmap.dof + 2:
        logger.warning(
            "Only %d paired samples for %d degrees of freedom; the chi-squared "
            "approximation may be poor",
            n,
            fmap.dof,
        )
    mean, cov = fmap.difference_moments(x, y)
    statistic = statistic_from_moments(mean, cov, n, ridge)
    return TwoSampleStatistic(statistic, fmap.dof, n, ridge)


def chi_squared_cdf(x: float, d: int) -> float:
    """CDF of chi-squared with ``d`` degrees of freedom, ``P(d/2, x/2)``."""
    if x < 0 or not math.isfinite(x):
        raise InvalidParameterError(f"chi-squared argument must be finite and >= 0, got {x}.")
    if d < 1:
        raise InvalidParameterError(f"Degrees of freedom must be >= 1, got {d}.")
    return float(special.gammainc(d / 2.0, x / 2.0))


def chi_squared_sf(x: float, d: int) -> float:
    """Upper tail ``1 - chi_squared_cdf(x, d)``, accurate far into the tail."""
    if x < 0:
        raise InvalidParameterError(f"chi-squared argument must be >= 0, got {x}.")
    if d < 1:
        raise InvalidParameterError(f"Degrees of freedom must be >= 1, got {d}.")
    if math.isinf(x):
        return 0.0
    return float(special.gammaincc(d / 2.0, x / 2.0))


def null_test(
    statistic: float,
    dof: int,
    alpha: float,
    *,
    zn: int | None = None,
    s: float | None = None,
    n: int | None = None,
    ridge: float | None = None,
) -> TestReport:
    """Reject ``p = q`` when the chi-squared p-value of ``statistic`` is below ``alpha``."""
    _check_alpha(alpha)
    if statistic < 0:
        raise InvalidParameterError(f"Test statistic must be non-negative, got {statistic}.")
    p_value = min(max(chi_squared_sf(statistic, dof), 0.0), 1.0)
    return TestReport(
        statistic=statistic,
        dof=dof,
        p_value=p_value,
        alpha=alpha,
        reject=p_value < alpha,
        zn=zn,
        s=s,
        n=n,
        ridge=ridge,
    )
