"""Seeded Monte Carlo benchmarks against the closed-form oracles."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path

import numpy as np
from scipy import stats

from sobolev.config import DEFAULT_THETA
from sobolev.core.densities import NamedDensity
from sobolev.core.estimators import (
    ZnRule,
    choose_zn,
    estimate_squared_distance,
    estimate_squared_norm,
    split_halves,
)
from sobolev.core.fourier import RescaleMap, RescaleMode, fit_rescale, wrap_to_torus
from sobolev.core.inference import (
    asymptotic_variance,
    chi_squared_cdf,
    confidence_interval,
    distance_variance,
    null_test,
    two_sample_statistic,
)
from sobolev.core.lattice import LatticeSpec
from sobolev.core.oracles import closed_form_quantity, closed_form_squared_distance
from sobolev.errors import InvalidParameterError
from sobolev.io import format_cell, write_table
from sobolev.models.bench import (
    RESULT_COLUMNS,
    BenchConfig,
    BenchRow,
    BenchSummary,
    ExperimentTag,
    PerSizeSummary,
)
from sobolev.rng import trial_generator, trial_seed

logger = logging.getLogger(__name__)

# Smallest sample size entering the fitted MSE slope.
_SLOPE_MIN_N = 1000


class ExperimentKind(StrEnum):
    DISTANCE = "squared_distance"
    NORM = "squared_norm"
    TEST = "two_sample_test"


@dataclass(frozen=True, slots=True)
class Experiment:
    """Densities and defaults of one benchmark roster entry.

    ``box`` is the source box mapped onto ``[-pi, pi]^D``; without it samples are
    used as drawn. Either way they are wrapped onto the torus before estimation.
    """

    tag: ExperimentTag
    kind: ExperimentKind
    p: NamedDensity
    q: NamedDensity | None = None
    s: float = 0.0
    box: tuple[float, float] | None = None
    default_rule: ZnRule = field(default_factory=lambda: ZnRule.budget(DEFAULT_THETA))

    @property
    def dimension(self) -> int:
        return self.p.dimension

    def rescale_map(self) -> RescaleMap:
        if self.box is None:
            return RescaleMap.identity(self.dimension)
        return fit_rescale(np.zeros((1, self.dimension)), RescaleMode.FIXED_BOX, box=self.box)

    def densities(self, rescale: RescaleMap) -> list[NamedDensity]:
        """The sampled densities as seen after ``rescale``."""
        members = [self.p] if self.q is None else [self.p, self.q]
        return [d.affine(rescale.scale.tolist(), rescale.offset.tolist()) for d in members]

    def truth(self, s: float, rescale: RescaleMap) -> float:
        dens = self.densities(rescale)
        if self.kind is ExperimentKind.NORM:
            return closed_form_quantity(dens[0], dens[0], s)
        return closed_form_squared_distance(dens[0], dens[1], s)


_TEST_RULE = ZnRule.manual(3)

EXPERIMENTS: dict[ExperimentTag, Experiment] = {
    e.tag: e
    for e in (
        Experiment(
            ExperimentTag.GAUSS1D_MEAN,
            ExperimentKind.DISTANCE,
            NamedDensity.gaussian(0.0, 1.0),
            NamedDensity.gaussian(1.0, 1.0),
        ),
        Experiment(
            ExperimentTag.GAUSS1D_VAR,
            ExperimentKind.DISTANCE,
            NamedDensity.gaussian(0.0, 1.0),
            NamedDensity.gaussian(0.0, 2.0),
            box=(-11.0, 11.0),
        ),
        Experiment(
            ExperimentTag.UNIF_SHIFT,
            ExperimentKind.DISTANCE,
            NamedDensity.uniform(0.0, 1.0),
            NamedDensity.uniform(0.5, 1.5),
        ),
        Experiment(
            ExperimentTag.UNIF_TRI,
            ExperimentKind.DISTANCE,
            NamedDensity.uniform(0.0, 1.0),
            NamedDensity.triangular(0.0, 0.5, 1.0),
        ),
        Experiment(
            ExperimentTag.GAUSS3D_MEAN,
            ExperimentKind.DISTANCE,
            NamedDensity.gaussian(0.0, 1.0, dimension=3),
            NamedDensity.gaussian(1.0, 1.0, dimension=3),
            box=(-7.0, 7.0),
        ),
        Experiment(
            ExperimentTag.GAUSS3D_VAR,
            ExperimentKind.DISTANCE,
            NamedDensity.gaussian(0.0, 1.0, dimension=3),
            NamedDensity.gaussian(0.0, 2.0, dimension=3),
            box=(-11.0, 11.0),
        ),
        Experiment(ExperimentTag.NORM_H0, ExperimentKind.NORM, NamedDensity.gaussian(0.0, 1.0)),
        Experiment(
            ExperimentTag.NORM_H1, ExperimentKind.NORM, NamedDensity.gaussian(0.0, 1.0), s=1.0
        ),
        Experiment(
            ExperimentTag.NULL_CALIBRATION,
            ExperimentKind.TEST,
            NamedDensity.gaussian(0.0, 1.0),
            NamedDensity.gaussian(0.0, 1.0),
            default_rule=_TEST_RULE,
        ),
        Experiment(
            ExperimentTag.POWER_CURVE,
            ExperimentKind.TEST,
            NamedDensity.gaussian(0.0, 1.0),
            NamedDensity.gaussian(1.0, 1.0),
            default_rule=_TEST_RULE,
        ),
    )
}


def get_experiment(tag: str) -> Experiment:
    """Look up a roster entry; unknown tags list the roster."""
    try:
        return EXPERIMENTS[ExperimentTag(tag)]
    except ValueError:
        roster = ", ".join(t.value for t in ExperimentTag)
        raise InvalidParameterError(
            f"Unknown experiment '{tag}'. Choose one of: {roster}."
        ) from None


@dataclass(frozen=True, slots=True)
class TrialOutcome:
    row: BenchRow
    zn: int
    p_value: float | None = None
    cdf_value: float | None = None
    reject: bool | None = None


@dataclass(frozen=True)
class BenchResult:
    config: BenchConfig
    summary: BenchSummary
    outcomes: list[TrialOutcome]

    @property
    def rows(self) -> list[BenchRow]:
        return [o.row for o in self.outcomes]


class BenchService:
    """Runs a :class:`BenchConfig` and writes its CSV table and JSON summary."""

    def run(self, config: BenchConfig) -> BenchResult:
        experiment = get_experiment(config.experiment)
        s = experiment.s if config.order is None else config.order
        rule = config.zn_rule(experiment.default_rule)
        rescale = experiment.rescale_map()
        truth = experiment.truth(s, rescale)
        logger.info(
            "Benchmark %s: s=%g, %s, truth=%.6g", experiment.tag.value, s, rule.describe(), truth
        )

        cells = [(n, trial) for n in config.grid for trial in range(config.trials)]
        zns = {n: choose_zn(n, s, experiment.dimension, rule) for n in config.grid}

        def run_cell(cell: tuple[int, int]) -> TrialOutcome:
            n, trial = cell
            spec = LatticeSpec(experiment.dimension, zns[n], s)
            return self._run_trial(experiment, config, spec, rescale, truth, n, trial)

        if config.workers == 1:
            outcomes = [run_cell(cell) for cell in cells]
        else:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                outcomes = list(pool.map(run_cell, cells))
        outcomes.sort(key=lambda o: (o.row.n, o.row.trial))

        summary = self._summarise(experiment, config, s, rule, rescale, truth, zns, outcomes)
        return BenchResult(config, summary, outcomes)

    @staticmethod
    def _draw(
        experiment: Experiment, rescale: RescaleMap, rng: np.random.Generator, n: int
    ) -> tuple[np.ndarray, np.ndarray | None]:
        x = wrap_to_torus(rescale.apply(experiment.p.sample(rng, n)))
        if experiment.q is None:
            return x, None
        y = wrap_to_torus(rescale.apply(experiment.q.sample(rng, n)))
        return x, y

    def _run_trial(
        self,
        experiment: Experiment,
        config: BenchConfig,
        spec: LatticeSpec,
        rescale: RescaleMap,
        truth: float,
        n: int,
        trial: int,
    ) -> TrialOutcome:
        tag = experiment.tag.value
        x, y = self._draw(experiment, rescale, trial_generator(config.seed, tag, n, trial), n)
        split_seed = trial_seed(config.seed, tag, n, trial)
        s = spec.s

        if experiment.kind is ExperimentKind.TEST:
            assert y is not None
            stat = two_sample_statistic(x, y, s, spec)
            report = null_test(stat.statistic, stat.dof, config.alpha)
            row = BenchRow(n=n, trial=trial, estimate=stat.statistic, truth=truth)
            return TrialOutcome(
                row,
                spec.zn,
                p_value=report.p_value,
                cdf_value=chi_squared_cdf(stat.statistic, stat.dof),
                reject=report.reject,
            )

        if experiment.kind is ExperimentKind.NORM:
            estimate = estimate_squared_norm(x, s, spec, seed=split_seed).value
            first, second = split_halves(x, split_seed)
            variance = asymptotic_variance(first, second, s, spec) if n >= 4 else None
        else:
            assert y is not None
            estimate = estimate_squared_distance(x, y, s, spec, seed=split_seed).value
            variance = distance_variance(x, y, s, spec)
        ci = (
            None
            if variance is None
            else confidence_interval(
                estimate, variance.sigma_hat, variance.n, 1.0 - config.ci_level
            )
        )
        row = BenchRow(
            n=n,
            trial=trial,
            estimate=estimate,
            ci_lo=None if ci is None else ci.lower,
            ci_hi=None if ci is None else ci.upper,
            truth=truth,
            abs_err=abs(estimate - truth),
        )
        return TrialOutcome(row, spec.zn)

    @staticmethod
    def _summarise(
        experiment: Experiment,
        config: BenchConfig,
        s: float,
        rule: ZnRule,
        rescale: RescaleMap,
        truth: float,
        zns: dict[int, int],
        outcomes: list[TrialOutcome],
    ) -> BenchSummary:
        per_size: list[PerSizeSummary] = []
        for n in config.grid:
            group = [o for o in outcomes if o.row.n == n]
            estimates = np.array([o.row.estimate for o in group])
            entry = PerSizeSummary(
                n=n, zn=zns[n], trials=len(group), mean_estimate=float(estimates.mean())
            )
            if experiment.kind is ExperimentKind.TEST:
                entry.rejection_rate = float(np.mean([bool(o.reject) for o in group]))
                if experiment.tag is ExperimentTag.NULL_CALIBRATION:
                    cdf_values = sorted(
                        float(o.cdf_value) for o in group if o.cdf_value is not None
                    )
                    ks = stats.kstest(cdf_values, "uniform")
                    entry.cdf_values = cdf_values
                    entry.ks_distance = float(ks.statistic)
                    entry.ks_pvalue = float(ks.pvalue)
            else:
                entry.mse = float(np.mean((estimates - truth) ** 2))
                covered = [
                    o.row.ci_lo is not None
                    and o.row.ci_hi is not None
                    and o.row.ci_lo <= truth <= o.row.ci_hi
                    for o in group
                ]
                entry.coverage = float(np.mean(covered))
            per_size.append(entry)
            logger.info("n=%d: Z_n=%d, mean estimate %.6g", n, zns[n], entry.mean_estimate)

        densities = [d.describe() for d in (experiment.p, experiment.q) if d is not None]
        return BenchSummary(
            experiment=experiment.tag,
            quantity=experiment.kind.value,
            s=s,
            seed=config.seed,
            trials=config.trials,
            grid=config.grid,
            zn_rule=rule.describe(),
            alpha=config.alpha,
            ci_level=config.ci_level,
            truth=truth,
            densities=densities,
            rescale=rescale.provenance(),
            per_size=per_size,
            mse_slope=mse_slope(per_size),
        )

    @staticmethod
    def write_outputs(result: BenchResult, out_dir: Path) -> tuple[Path, Path]:
        """Write ``results.csv`` and ``summary.json`` into ``out_dir``."""
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = write_table(
            out_dir / "results.csv",
            RESULT_COLUMNS,
            ([format_cell(v) for v in row.cells()] for row in result.rows),
        )
        json_path = out_dir / "summary.json"
        json_path.write_text(result.summary.to_json() + "\n", encoding="utf-8")
        return csv_path, json_path


def mse_slope(per_size: list[PerSizeSummary], min_n: int = _SLOPE_MIN_N) -> float | None:
    """Least-squares slope of log MSE against log n.

    Uses sizes ``>= min_n`` when at least two qualify, otherwise every size with a
    positive MSE; ``None`` when fewer than two points remain.
    """
    points = [(e.n, e.mse) for e in per_size if e.mse is not None and e.mse > 0]
    large = [(n, m) for n, m in points if n >= min_n]
    chosen = large if len(large) >= 2 else points
    if len(chosen) < 2:
        return None
    log_n = np.log([n for n, _ in chosen])
    log_mse = np.log([m for _, m in chosen])
    slope, _ = np.polyfit(log_n, log_mse, 1)
    return float(slope) if math.isfinite(slope) else None
