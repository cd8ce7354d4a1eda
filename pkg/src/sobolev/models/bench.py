"""Benchmark configuration, table rows and summaries."""

from __future__ import annotations

from enum import StrEnum

from pydantic import BaseModel, Field, field_validator, model_validator

from sobolev.config import DEFAULT_GRID
from sobolev.core.estimators import ZnRule
from sobolev.models.reports import Report, RescaleProvenance

RESULT_COLUMNS = ("n", "trial", "estimate", "ci_lo", "ci_hi", "truth", "abs_err")


class ExperimentTag(StrEnum):
    GAUSS1D_MEAN = "gauss1d_mean"
    GAUSS1D_VAR = "gauss1d_var"
    UNIF_SHIFT = "unif_shift"
    UNIF_TRI = "unif_tri"
    GAUSS3D_MEAN = "gauss3d_mean"
    GAUSS3D_VAR = "gauss3d_var"
    NORM_H0 = "norm_h0"
    NORM_H1 = "norm_h1"
    NULL_CALIBRATION = "null_calibration"
    POWER_CURVE = "power_curve"


class BenchConfig(BaseModel):
    """A validated benchmark request.

    At most one of ``zn``, ``theta`` and ``s_prime`` may be set; with none the
    experiment's default rule applies.
    """

    experiment: ExperimentTag
    grid: list[int] = Field(default_factory=lambda: list(DEFAULT_GRID))
    trials: int = Field(default=20, ge=1)
    order: float | None = Field(default=None, ge=0)
    zn: int | None = Field(default=None, ge=0)
    theta: float | None = Field(default=None, gt=0, le=1)
    s_prime: float | None = Field(default=None, gt=0)
    c: float = Field(default=1.0, gt=0)
    seed: int = Field(default=0, ge=0)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    ci_level: float = Field(default=0.95, gt=0, lt=1)
    workers: int = Field(default=1, ge=1)

    @field_validator("grid")
    @classmethod
    def _grid_strictly_increasing(cls, grid: list[int]) -> list[int]:
        if not grid:
            raise ValueError("grid must contain at least one sample size")
        if any(n < 2 for n in grid):
            raise ValueError("every grid size must be at least 2")
        if any(b <= a for a, b in zip(grid, grid[1:], strict=False)):
            raise ValueError("grid must be strictly increasing")
        return grid

    @model_validator(mode="after")
    def _one_zn_rule(self) -> BenchConfig:
        chosen = [name for name in ("zn", "theta", "s_prime") if getattr(self, name) is not None]
        if len(chosen) > 1:
            raise ValueError(f"choose at most one Z_n rule, got {', '.join(chosen)}")
        return self

    def zn_rule(self, default: ZnRule) -> ZnRule:
        if self.zn is not None:
            return ZnRule.manual(self.zn)
        if self.theta is not None:
            return ZnRule.budget(self.theta)
        if self.s_prime is not None:
            return ZnRule.optimal(self.s_prime, self.c)
        return default


class BenchRow(BaseModel):
    n: int
    trial: int
    estimate: float
    ci_lo: float | None = None
    ci_hi: float | None = None
    truth: float
    abs_err: float | None = None

    def cells(self) -> list[object]:
        return [getattr(self, name) for name in RESULT_COLUMNS]


class PerSizeSummary(BaseModel):
    n: int
    zn: int
    trials: int
    mean_estimate: float
    mse: float | None = None
    coverage: float | None = None
    rejection_rate: float | None = None
    cdf_values: list[float] | None = None
    ks_distance: float | None = None
    ks_pvalue: float | None = None


class BenchSummary(Report):
    experiment: ExperimentTag
    quantity: str
    s: float
    seed: int
    trials: int
    grid: list[int]
    zn_rule: str
    alpha: float
    ci_level: float
    truth: float
    densities: list[str]
    rescale: RescaleProvenance | None = None
    per_size: list[PerSizeSummary]
    mse_slope: float | None = None
