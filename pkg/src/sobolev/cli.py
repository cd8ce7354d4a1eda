"""sobolev - estimate Sobolev quantities of densities from samples."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Any

import click
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table
from typer.core import TyperGroup

from sobolev import __version__
from sobolev.config import (
    DEFAULT_RIDGE,
    DEFAULT_THETA,
    configure_logging,
    default_bench_dir,
    default_db_path,
)
from sobolev.core.estimators import ZnRule
from sobolev.database import init_db, reset_engine, session_scope
from sobolev.errors import InvalidParameterError, SobolevError
from sobolev.io import read_samples
from sobolev.models.bench import BenchConfig
from sobolev.services.bench_service import BenchService, get_experiment
from sobolev.services.estimation_service import EstimationService, Quantity, RescaleOption
from sobolev.services.run_service import RunService

USAGE_EXIT_CODE = 3
REJECT_EXIT_CODE = 1


class SobolevGroup(TyperGroup):
    """Command group whose usage errors exit with code 3 instead of Click's 2."""

    def make_context(self, *args: Any, **kwargs: Any) -> click.Context:
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as exc:
            exc.exit_code = USAGE_EXIT_CODE
            raise

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.exit_code = USAGE_EXIT_CODE
            raise


def _version_callback(value: bool) -> None:
    if value:
        print(f"sobolev {__version__}")
        raise typer.Exit()


app = typer.Typer(
    name="sobolev",
    cls=SobolevGroup,
    help="Frequency-domain estimates of Sobolev inner products, norms and distances.",
    add_completion=False,
    no_args_is_help=True,
)
runs_app = typer.Typer(
    cls=SobolevGroup,
    help="Inspect benchmark runs stored in the local history.",
    no_args_is_help=True,
)
app.add_typer(runs_app, name="runs")


@app.callback()
def main(
    version: Annotated[
        bool,
        typer.Option(
            "--version",
            help="Show version and exit.",
            callback=_version_callback,
            is_eager=True,
        ),
    ] = False,
    verbose: Annotated[
        int,
        typer.Option("--verbose", "-v", count=True, help="-v for progress, -vv for debug detail."),
    ] = 0,
) -> None:
    """Frequency-domain estimates of Sobolev inner products, norms and distances."""
    configure_logging(verbose)


console = Console()
err_console = Console(stderr=True)

DbOption = Annotated[
    Path | None,
    typer.Option("--db", envvar="SOBOLEV_DB", help="Override path to the run-history database."),
]
OrderOption = Annotated[float, typer.Option("--order", min=0.0, help="Sobolev order s >= 0.")]
ZnOption = Annotated[int | None, typer.Option("--zn", min=0, help="Fixed truncation radius Z_n.")]
OptimalOption = Annotated[
    float | None,
    typer.Option("--auto-optimal", help="Choose Z_n for densities of smoothness S_PRIME > s."),
]
ThetaOption = Annotated[
    float | None,
    typer.Option("--theta", help=f"Budget rule Z_n = n^(theta/D); default {DEFAULT_THETA}."),
]
ScaleOption = Annotated[float, typer.Option("--c", help="Scale constant for --auto-optimal.")]
SeedOption = Annotated[int, typer.Option("--seed", min=0, help="Seed for splits and rescaling.")]
RescaleFlag = Annotated[
    str,
    typer.Option("--rescale", help="identity, minmax, random or box:A,B."),
]
WorkersOption = Annotated[int, typer.Option("--workers", min=1, help="Threads for ingestion.")]


def _db_path(db: Path | None) -> Path:
    return db if db is not None else default_db_path()


def _fail(exc: Exception, code: int) -> typer.Exit:
    err_console.print(f"[red]Error:[/red] {escape(str(exc))}")
    return typer.Exit(code)


def _zn_rule(zn: int | None, s_prime: float | None, theta: float | None, c: float) -> ZnRule:
    flags = (("--zn", zn), ("--auto-optimal", s_prime), ("--theta", theta))
    given = [flag for flag, value in flags if value is not None]
    if len(given) > 1:
        raise InvalidParameterError(f"Options {' and '.join(given)} are mutually exclusive.")
    if zn is not None:
        return ZnRule.manual(zn)
    if s_prime is not None:
        return ZnRule.optimal(s_prime, c)
    return ZnRule.budget(DEFAULT_THETA if theta is None else theta)


# ------------------------------------------------------------------
# estimate
# ------------------------------------------------------------------


@app.command()
def estimate(
    files: Annotated[
        list[Path], typer.Argument(help="CSV sample file(s): one for norm, two otherwise.")
    ],
    quantity: Annotated[
        Quantity, typer.Option("--quantity", "-q", help="inner, norm or distance.")
    ],
    order: OrderOption = 0.0,
    zn: ZnOption = None,
    s_prime: OptimalOption = None,
    theta: ThetaOption = None,
    c: ScaleOption = 1.0,
    ci: Annotated[
        float | None,
        typer.Option("--ci", help="Confidence level of a normal interval, e.g. 0.95."),
    ] = None,
    rescale: RescaleFlag = "identity",
    seed: SeedOption = 0,
    workers: WorkersOption = 1,
) -> None:
    """Estimate an inner product, squared norm or squared distance; prints JSON."""
    try:
        rule = _zn_rule(zn, s_prime, theta, c)
        option = RescaleOption.parse(rescale)
        datasets = [read_samples(f) for f in files]
        report = EstimationService(workers).estimate(
            quantity, datasets, order, rule, rescale=option, seed=seed, ci_level=ci
        )
    except SobolevError as exc:
        raise _fail(exc, exc.exit_code) from None
    typer.echo(report.to_json())


# ------------------------------------------------------------------
# test
# ------------------------------------------------------------------


@app.command("test")
def two_sample_test(
    file1: Annotated[Path, typer.Argument(help="First CSV sample file.")],
    file2: Annotated[Path, typer.Argument(help="Second CSV sample file.")],
    order: OrderOption = 0.0,
    zn: ZnOption = None,
    s_prime: OptimalOption = None,
    theta: ThetaOption = None,
    c: ScaleOption = 1.0,
    alpha: Annotated[float, typer.Option("--alpha", help="Test level.")] = 0.05,
    ridge: Annotated[
        float, typer.Option("--ridge", min=0.0, help="Relative ridge on the feature covariance.")
    ] = DEFAULT_RIDGE,
    rescale: RescaleFlag = "identity",
    seed: SeedOption = 0,
) -> None:
    """Chi-squared two-sample test of p = q. Exits 1 when p = q is rejected."""
    try:
        rule = _zn_rule(zn, s_prime, theta, c)
        option = RescaleOption.parse(rescale)
        datasets = [read_samples(file1), read_samples(file2)]
        report = EstimationService().test(
            datasets, order, rule, alpha, rescale=option, seed=seed, ridge=ridge
        )
    except SobolevError as exc:
        raise _fail(exc, exc.exit_code) from None
    typer.echo(report.to_json())
    if report.reject:
        raise typer.Exit(REJECT_EXIT_CODE)


# ------------------------------------------------------------------
# bench
# ------------------------------------------------------------------


def _parse_grid(grid: str | None) -> list[int] | None:
    if grid is None:
        return None
    try:
        return [int(part) for part in grid.split(",") if part.strip()]
    except ValueError:
        raise InvalidParameterError(
            f"Invalid grid '{grid}': expected comma-separated integers."
        ) from None


@app.command()
def bench(
    experiment: Annotated[str, typer.Option("--experiment", "-e", help="Experiment tag.")],
    grid: Annotated[
        str | None, typer.Option("--grid", help="Sample sizes, e.g. 10,100,1000.")
    ] = None,
    trials: Annotated[int, typer.Option("--trials", help="Trials per sample size.")] = 20,
    order: Annotated[
        float | None, typer.Option("--order", help="Sobolev order (default: experiment's).")
    ] = None,
    zn: ZnOption = None,
    s_prime: OptimalOption = None,
    theta: ThetaOption = None,
    c: ScaleOption = 1.0,
    alpha: Annotated[float, typer.Option("--alpha", help="Level of test experiments.")] = 0.05,
    ci_level: Annotated[float, typer.Option("--ci-level", help="Confidence level.")] = 0.95,
    seed: SeedOption = 0,
    out: Annotated[
        Path | None,
        typer.Option("--out", help="Output directory for results.csv and summary.json."),
    ] = None,
    workers: WorkersOption = 1,
    record: Annotated[
        bool, typer.Option("--record", help="Store the run in the history.")
    ] = False,
    db: DbOption = None,
) -> None:
    """Run a seeded benchmark; writes results.csv and summary.json and prints the summary."""
    try:
        get_experiment(experiment)
        payload: dict[str, Any] = {
            "experiment": experiment,
            "trials": trials,
            "order": order,
            "zn": zn,
            "theta": theta,
            "s_prime": s_prime,
            "c": c,
            "seed": seed,
            "alpha": alpha,
            "ci_level": ci_level,
            "workers": workers,
        }
        parsed_grid = _parse_grid(grid)
        if parsed_grid is not None:
            payload["grid"] = parsed_grid
        config = BenchConfig.model_validate(payload)
    except ValidationError as exc:
        raise _fail(exc, USAGE_EXIT_CODE) from None
    except SobolevError as exc:
        raise _fail(exc, exc.exit_code) from None

    service = BenchService()
    try:
        result = service.run(config)
        out_dir = out if out is not None else default_bench_dir() / config.experiment.value
        csv_path, json_path = service.write_outputs(result, out_dir)
    except SobolevError as exc:
        raise _fail(exc, exc.exit_code) from None
    except OSError as exc:
        raise _fail(exc, 2) from None
    err_console.print(
        f"[green]✓[/green] Wrote [bold]{csv_path}[/bold] and [bold]{json_path}[/bold]"
    )

    if record:
        with session_scope(_db_path(db)) as session:
            run = RunService(session).record_run(result)
            run_id = run.id
        err_console.print(f"[green]✓[/green] Recorded run [bold]{run_id}[/bold]")
    typer.echo(result.summary.to_json())


# ------------------------------------------------------------------
# init
# ------------------------------------------------------------------


@app.command()
def init(db: DbOption = None) -> None:
    """Initialize the run-history database."""
    path = _db_path(db)
    reset_engine()
    init_db(path)
    reset_engine()
    console.print(f"[green]✓[/green] Database initialized at [bold]{path}[/bold]")


# ------------------------------------------------------------------
# runs
# ------------------------------------------------------------------


@runs_app.command("list")
def list_runs(
    experiment: Annotated[
        str | None, typer.Option("--experiment", "-e", help="Only runs of this experiment.")
    ] = None,
    db: DbOption = None,
    json_output: Annotated[bool, typer.Option("--json", help="Output as JSON.")] = False,
) -> None:
    """List recorded benchmark runs."""
    with session_scope(_db_path(db)) as session:
        runs = RunService(session).list_runs(experiment)
        if json_output:
            data = [
                {
                    "id": r.id,
                    "experiment": r.experiment,
                    "seed": r.seed,
                    "trials": r.trials,
                    "created_at": r.created_at.isoformat() if r.created_at else None,
                }
                for r in runs
            ]
            typer.echo(json.dumps(data, indent=2))
            return
        if not runs:
            console.print("[dim]No runs recorded.[/dim]")
            return
        table = Table(title="Benchmark runs")
        table.add_column("ID", justify="right", style="cyan")
        table.add_column("Experiment")
        table.add_column("Seed", justify="right")
        table.add_column("Trials", justify="right")
        table.add_column("Created", style="dim")
        for r in runs:
            table.add_row(
                str(r.id),
                r.experiment,
                str(r.seed),
                str(r.trials),
                r.created_at.strftime("%Y-%m-%d %H:%M") if r.created_at else "",
            )
        console.print(table)


@runs_app.command("show")
def show_run(
    run_id: Annotated[int, typer.Argument(help="Run id.")],
    db: DbOption = None,
    json_output: Annotated[
        bool, typer.Option("--json", help="Print the stored summary JSON.")
    ] = False,
) -> None:
    """Show the per-size summary of a recorded run."""
    try:
        with session_scope(_db_path(db)) as session:
            run = RunService(session).get_run(run_id)
            summary = json.loads(run.summary_json)
    except ValueError as exc:
        raise _fail(exc, 2) from None
    if json_output:
        typer.echo(json.dumps(summary, indent=2))
        return
    console.print(
        f"[bold cyan]Run {run_id}[/bold cyan] {summary['experiment']} "
        f"[dim](s={summary['s']}, seed={summary['seed']}, {summary['zn_rule']}, "
        f"truth={summary['truth']:.6g})[/dim]"
    )
    table = Table()
    for column in ("n", "Z_n", "mean", "MSE", "coverage", "reject rate"):
        table.add_column(column, justify="right")

    def cell(value: float | None) -> str:
        return "-" if value is None else f"{value:.4g}"

    for entry in summary["per_size"]:
        table.add_row(
            str(entry["n"]),
            str(entry["zn"]),
            cell(entry["mean_estimate"]),
            cell(entry.get("mse")),
            cell(entry.get("coverage")),
            cell(entry.get("rejection_rate")),
        )
    console.print(table)
    if summary.get("mse_slope") is not None:
        console.print(f"log-log MSE slope: {summary['mse_slope']:.3f}")


@runs_app.command("export")
def export_run(
    run_id: Annotated[int, typer.Argument(help="Run id.")],
    output: Annotated[
        Path | None,
        typer.Option("--output", "-o", help="Write to file instead of stdout."),
    ] = None,
    db: DbOption = None,
) -> None:
    """Export a recorded run as JSON."""
    try:
        with session_scope(_db_path(db)) as session:
            service = RunService(session)
            if output:
                service.export_to_file(run_id, output)
                err_console.print(
                    f"[green]✓[/green] Exported run [bold]{run_id}[/bold] to {output}"
                )
            else:
                typer.echo(service.export_run(run_id))
    except ValueError as exc:
        raise _fail(exc, 2) from None


@runs_app.command("delete")
def delete_run(
    run_id: Annotated[int, typer.Argument(help="Run id.")],
    yes: Annotated[bool, typer.Option("--yes", "-y", help="Skip confirmation.")] = False,
    db: DbOption = None,
) -> None:
    """Delete a recorded run and its rows."""
    if not yes:
        confirm = typer.confirm(f"Delete run {run_id} and all its rows?")
        if not confirm:
            console.print("[dim]Aborted.[/dim]")
            raise typer.Exit(0)
    try:
        with session_scope(_db_path(db)) as session:
            RunService(session).delete_run(run_id)
    except ValueError as exc:
        raise _fail(exc, 2) from None
    console.print(f"[green]✓[/green] Deleted run [bold]{run_id}[/bold]")
