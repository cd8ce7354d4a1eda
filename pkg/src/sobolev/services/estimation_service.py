"""Service layer behind the ``estimate`` and ``test`` commands."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from sobolev.config import DEFAULT_MARGIN, DEFAULT_RIDGE
from sobolev.core.estimators import (
    ZnRule,
    choose_zn,
    estimate_inner_product,
    estimate_squared_distance,
    estimate_squared_norm,
    split_halves,
)
from sobolev.core.fourier import RescaleMap, RescaleMode, accumulate, as_sample_matrix, fit_rescale
from sobolev.core.inference import (
    asymptotic_variance,
    confidence_interval,
    distance_variance,
    null_test,
    two_sample_statistic,
)
from sobolev.core.lattice import LatticeSpec
from sobolev.errors import InputDataError, InvalidParameterError
from sobolev.models.reports import EstimateReport, TestReport

logger = logging.getLogger(__name__)


class Quantity(StrEnum):
    INNER = "inner"
    NORM = "norm"
    DISTANCE = "distance"

    @property
    def sample_count(self) -> int:
        return 1 if self is Quantity.NORM else 2


@dataclass(frozen=True, slots=True)
class RescaleOption:
    """A requested rescaling, before it is fitted to data."""

    mode: RescaleMode = RescaleMode.IDENTITY
    box: tuple[float, float] | None = None
    margin: float = DEFAULT_MARGIN

    @classmethod
    def parse(cls, text: str) -> RescaleOption:
        """Parse ``identity``, ``minmax``, ``random`` or ``box:A,B``."""
        value = text.strip().lower()
        if value.startswith("box:"):
            try:
                low, high = (float(part) for part in value[4:].split(","))
            except ValueError:
                raise InvalidParameterError(
                    f"Invalid box '{text}': expected box:A,B with two numbers."
                ) from None
            if not low < high:
                raise InvalidParameterError(f"Invalid box '{text}': need A < B.")
            return cls(RescaleMode.FIXED_BOX, (low, high))
        aliases = {
            "identity": RescaleMode.IDENTITY,
            "minmax": RescaleMode.MINMAX,
            "random": RescaleMode.RANDOM,
        }
        if value not in aliases:
            raise InvalidParameterError(
                f"Unknown rescale '{text}'. Use identity, minmax, random or box:A,B."
            )
        return cls(aliases[value])


class EstimationService:
    """Fits the rescale map, chooses ``Z_n`` and runs the estimators on in-memory samples."""

    def __init__(self, workers: int = 1) -> None:
        if workers < 1:
            raise InvalidParameterError(f"workers must be >= 1, got {workers}.")
        self._workers = workers

    # ------------------------------------------------------------------
    # Preparation
    # ------------------------------------------------------------------

    @staticmethod
    def prepare(
        datasets: Sequence[np.ndarray], rescale: RescaleOption, seed: int | None
    ) -> tuple[list[np.ndarray], RescaleMap]:
        """Check dimensions and row counts, fit one map on the pooled rows, apply it to each."""
        arrays = [as_sample_matrix(d, name=f"sample set {i + 1}") for i, d in enumerate(datasets)]
        dims = {a.shape[1] for a in arrays}
        if len(dims) != 1:
            raise InputDataError(f"Sample sets have different dimensions: {sorted(dims)}.")
        for i, a in enumerate(arrays):
            if a.shape[0] < 2:
                raise InputDataError(
                    f"Sample set {i + 1} has {a.shape[0]} row(s); at least 2 are needed."
                )
        pooled = np.vstack(arrays)
        rescale_map = fit_rescale(
            pooled, rescale.mode, seed=seed, box=rescale.box, margin=rescale.margin
        )
        return [rescale_map.apply(a) for a in arrays], rescale_map

    @staticmethod
    def _lattice(n: int, s: float, dimension: int, rule: ZnRule) -> LatticeSpec:
        zn = choose_zn(n, s, dimension, rule)
        spec = LatticeSpec(dimension, zn, s)
        logger.info("Z_n = %d from %s; lattice size %d", zn, rule.describe(), spec.size)
        return spec

    # ------------------------------------------------------------------
    # Estimation
    # ------------------------------------------------------------------

    def estimate(
        self,
        quantity: Quantity | str,
        datasets: Sequence[np.ndarray],
        s: float,
        rule: ZnRule,
        *,
        rescale: RescaleOption | None = None,
        seed: int = 0,
        ci_level: float | None = None,
    ) -> EstimateReport:
        """Point estimate of ``quantity`` with an optional normal confidence interval."""
        quantity = Quantity(quantity)
        if len(datasets) != quantity.sample_count:
            raise InvalidParameterError(
                f"'{quantity.value}' needs {quantity.sample_count} sample file(s), "
                f"got {len(datasets)}."
            )
        if ci_level is not None and not 0 < ci_level < 1:
            raise InvalidParameterError(f"CI level must lie in (0, 1), got {ci_level}.")
        arrays, rescale_map = self.prepare(datasets, rescale or RescaleOption(), seed)
        dimension = arrays[0].shape[1]
        spec = self._lattice(min(a.shape[0] for a in arrays), s, dimension, rule)

        if quantity is Quantity.NORM:
            (x,) = arrays
            report = estimate_squared_norm(
                x, s, spec, seed=seed, workers=self._workers, rescale=rescale_map
            )
            variance = None
            if ci_level is not None:
                first, second = split_halves(x, seed)
                variance = asymptotic_variance(first, second, s, spec)
        elif quantity is Quantity.INNER:
            x, y = arrays
            report = estimate_inner_product(
                accumulate(spec, x, workers=self._workers),
                accumulate(spec, y, workers=self._workers),
                s,
                rescale=rescale_map,
            ).model_copy(update={"seed": seed})
            variance = asymptotic_variance(x, y, s, spec) if ci_level is not None else None
        else:
            x, y = arrays
            report = estimate_squared_distance(
                x, y, s, spec, seed=seed, workers=self._workers, rescale=rescale_map
            )
            variance = distance_variance(x, y, s, spec) if ci_level is not None else None

        if variance is not None and ci_level is not None:
            if variance.degenerate:
                logger.warning("Degenerate samples: the standard error is exactly zero")
            ci = confidence_interval(report.value, variance.sigma_hat, variance.n, 1.0 - ci_level)
            report = report.model_copy(update={"ci": ci})
        return report

    # ------------------------------------------------------------------
    # Two-sample test
    # ------------------------------------------------------------------

    def test(
        self,
        datasets: Sequence[np.ndarray],
        s: float,
        rule: ZnRule,
        alpha: float,
        *,
        rescale: RescaleOption | None = None,
        seed: int = 0,
        ridge: float = DEFAULT_RIDGE,
    ) -> TestReport:
        """Chi-squared test of ``p = q`` on two sample sets."""
        if len(datasets) != 2:
            raise InvalidParameterError(f"The test needs 2 sample files, got {len(datasets)}.")
        (x, y), rescale_map = self.prepare(datasets, rescale or RescaleOption(), seed)
        spec = self._lattice(min(x.shape[0], y.shape[0]), s, x.shape[1], rule)
        if spec.zn < 1:
            raise InvalidParameterError("The two-sample test needs Z_n >= 1.")
        stat = two_sample_statistic(x, y, s, spec, ridge)
        report = null_test(
            stat.statistic, stat.dof, alpha, zn=spec.zn, s=s, n=stat.n, ridge=stat.ridge
        )
        return report.model_copy(update={"seed": seed, "rescale": rescale_map.provenance()})

