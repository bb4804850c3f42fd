import click

from app.core.config import QUARTERS
from app.services.Cli.Cli import CliService, cli_errors
from app.services.LagScore.LagScore import LagScoreService
from app.services.Report.Formatting import csv_table
from app.services.Report.Report import ReportService


@click.command("lag-scores")
@click.option("--quarter", type=click.IntRange(min(QUARTERS), max(QUARTERS)), required=True, help="Quarter to score")
@click.option(
    "--include-positive-lag",
    "include_positive",
    is_flag=True,
    default=None,
    help="Keep children with a positive class lag as exploratory rows",
)
@click.option("--format", "fmt", type=click.Choice(["md", "csv"]), default="md", show_default=True)
@click.pass_context
@cli_errors
def lag_scores(ctx: click.Context, quarter: int, include_positive: bool, fmt: str):
    """Improvement score of every (class lag, improvement level) cell for one quarter."""
    config = CliService.resolve_config(ctx.obj, include_positive=include_positive)
    cohort, _ = CliService.load(config)
    table = LagScoreService.lag_score_table(cohort, quarter, include_positive=config.include_positive)
    if fmt == "csv":
        text = csv_table(*ReportService.lag_score_rows(table))
    else:
        text = ReportService.lag_score_markdown(table)
    CliService.emit(text, config.out)
