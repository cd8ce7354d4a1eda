"""benchmark run history

Revision ID: 0001
Revises:
Create Date: 2026-10-16 00:00:00.000000

"""
from __future__ import annotations

from collections.abc import Sequence

import sqlalchemy as sa
from alembic import op

revision: str = "0001"
down_revision: str | None = None
branch_labels: str | Sequence[str] | None = None
depends_on: str | Sequence[str] | None = None


def upgrade() -> None:
    op.create_table(
        "bench_runs",
        sa.Column("id", sa.Integer, primary_key=True, autoincrement=True),
        sa.Column("experiment", sa.String(64), nullable=False, index=True),
        sa.Column("seed", sa.Integer, nullable=False),
        sa.Column("trials", sa.Integer, nullable=False),
        sa.Column("config_json", sa.Text, nullable=False),
        sa.Column("summary_json", sa.Text, nullable=False),
        sa.Column("created_at", sa.DateTime, server_default=sa.func.now(), nullable=False),
    )
    op.create_table(
        "bench_rows",
        sa.Column("id", sa.Integer, primary_key=True, autoincrement=True),
        sa.Column(
            "run_id",
            sa.Integer,
            sa.ForeignKey("bench_runs.id", ondelete="CASCADE"),
            nullable=False,
        ),
        sa.Column("n", sa.Integer, nullable=False),
        sa.Column("trial", sa.Integer, nullable=False),
        sa.Column("estimate", sa.Float, nullable=False),
        sa.Column("ci_lo", sa.Float, nullable=True),
        sa.Column("ci_hi", sa.Float, nullable=True),
        sa.Column("truth", sa.Float, nullable=False),
        sa.Column("abs_err", sa.Float, nullable=True),
    )
    op.create_index("ix_bench_rows_run_id", "bench_rows", ["run_id"])


def downgrade() -> None:
    op.drop_index("ix_bench_rows_run_id", table_name="bench_rows")
    op.drop_table("bench_rows")
    op.drop_table("bench_runs")
