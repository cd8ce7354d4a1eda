from __future__ import annotations

import datetime

from sqlalchemy import DateTime, Float, ForeignKey, Integer, String, Text, func
from sqlalchemy.orm import Mapped, mapped_column, relationship

from sobolev.models.base import Base


class BenchRun(Base):
    """One recorded benchmark invocation with its configuration and summary as JSON."""

    __tablename__ = "bench_runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    experiment: Mapped[str] = mapped_column(String(64), nullable=False, index=True)
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    trials: Mapped[int] = mapped_column(Integer, nullable=False)
    config_json: Mapped[str] = mapped_column(Text, nullable=False)
    summary_json: Mapped[str] = mapped_column(Text, nullable=False)
    created_at: Mapped[datetime.datetime] = mapped_column(
        DateTime, server_default=func.now(), nullable=False
    )

    rows: Mapped[list[BenchRecord]] = relationship(
        "BenchRecord",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="BenchRecord.id",
    )

    def __repr__(self) -> str:
        return f"<BenchRun(id={self.id}, experiment={self.experiment!r})>"


class BenchRecord(Base):
    __tablename__ = "bench_rows"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("bench_runs.id", ondelete="CASCADE"), nullable=False, index=True
    )
    n: Mapped[int] = mapped_column(Integer, nullable=False)
    trial: Mapped[int] = mapped_column(Integer, nullable=False)
    estimate: Mapped[float] = mapped_column(Float, nullable=False)
    ci_lo: Mapped[float | None] = mapped_column(Float, nullable=True)
    ci_hi: Mapped[float | None] = mapped_column(Float, nullable=True)
    truth: Mapped[float] = mapped_column(Float, nullable=False)
    abs_err: Mapped[float | None] = mapped_column(Float, nullable=True)

    run: Mapped[BenchRun] = relationship("BenchRun", back_populates="rows")

    def __repr__(self) -> str:
        return f"<BenchRecord(run_id={self.run_id}, n={self.n}, trial={self.trial})>"
