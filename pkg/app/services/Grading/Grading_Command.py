import click

from app.core.config import QUARTERS
from app.services.Cli.Cli import CliService, cli_errors
from app.services.Grading.Grading import GradingService
from app.services.Grading.Grading_Schema import GroupBy
from app.services.Report.Formatting import csv_table
from app.services.Report.Report import ReportService


@click.command("grades")
@click.option("--quarter", type=click.IntRange(min(QUARTERS), max(QUARTERS)), required=True)
@click.option("--by", "by", type=click.Choice([GroupBy.SEX.value, GroupBy.STATE.value]), help="Split by group")
@click.option("--format", "fmt", type=click.Choice(["md", "csv"]), default="md", show_default=True)
@click.pass_context
@cli_errors
def grades(ctx: click.Context, quarter: int, by, fmt: str):
    """Share of children at each grade A-E in one quarter."""
    config = CliService.resolve_config(ctx.obj)
    cohort, _ = CliService.load(config)
    distributions = GradingService.grade_distribution(cohort, quarter, GroupBy(by) if by else GroupBy.OVERALL)
    if fmt == "csv":
        text = csv_table(*ReportService.grade_rows(distributions))
    else:
        text = ReportService.grades_markdown(distributions)
    CliService.emit(text, config.out)
