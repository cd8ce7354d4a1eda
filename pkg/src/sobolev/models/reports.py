"""Report models emitted by the estimators, the tests and the CLI."""

from __future__ import annotations

from enum import StrEnum
from typing import ClassVar

from pydantic import BaseModel, ConfigDict, Field

from sobolev.config import REPORT_SCHEMA


class QuantityTag(StrEnum):
    INNER_PRODUCT = "inner_product"
    SQUARED_NORM = "squared_norm"
    SQUARED_DISTANCE = "squared_distance"


class Report(BaseModel):
    """Base for JSON reports; serialises with a top-level ``schema`` field."""

    model_config = ConfigDict(populate_by_name=True)

    schema_id: str = Field(default=REPORT_SCHEMA, alias="schema")

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, by_alias=True)


class RescaleProvenance(BaseModel):
    """The affine map ``x' = scale * x + offset`` applied before estimation."""

    mode: str
    scale: list[float]
    offset: list[float]
    source_low: list[float] | None = None
    source_high: list[float] | None = None
    margin: float | None = None
    seed: int | None = None


class CIReport(BaseModel):
    estimate: float
    sigma_hat: float = Field(ge=0)
    level: float
    lower: float
    upper: float
    n: int


class EstimateReport(Report):
    quantity: QuantityTag
    s: float
    zn: int
    dimension: int
    value: float
    clamped_value: float | None = None
    imag_residual: float
    n: list[int]
    seed: int | None = None
    rescale: RescaleProvenance | None = None
    ci: CIReport | None = None


class TestReport(Report):
    __test__: ClassVar[bool] = False

    statistic: float = Field(ge=0)
    dof: int = Field(gt=0)
    p_value: float = Field(ge=0, le=1)
    alpha: float
    reject: bool
    zn: int | None = None
    s: float | None = None
    n: int | None = None
    ridge: float | None = None
    seed: int | None = None
    rescale: RescaleProvenance | None = None
