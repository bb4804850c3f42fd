import click

from app.core.config import QUARTERS
from app.services.Cli.Cli import CliService, cli_errors
from app.services.Grading.Grading import GradingService
from app.services.Grading.Grading_Schema import GroupBy, GroupedProgression
from app.services.Progression.Progression import ProgressionService
from app.services.Report.Formatting import csv_table
from app.services.Report.Report import ReportService

QUARTER = click.IntRange(min(QUARTERS), max(QUARTERS))


@click.command("progression")
@click.option("--from", "from_quarter", type=QUARTER, required=True, help="Earlier quarter")
@click.option("--to", "to_quarter", type=QUARTER, required=True, help="Later quarter")
@click.option("--by", "by", type=click.Choice([GroupBy.SEX.value, GroupBy.STATE.value]), help="Score each group")
@click.option("--weighted", is_flag=True, default=None, help="Weight rows by their share of children")
@click.option("--steps/--no-steps", default=True, show_default=True, help="Print the step tables")
@click.option("--format", "fmt", type=click.Choice(["md", "csv"]), default="md", show_default=True)
@click.pass_context
@cli_errors
def progression(ctx: click.Context, from_quarter: int, to_quarter: int, by, weighted, steps: bool, fmt: str):
    """Progression score S and S* between two quarters, overall or per sex / state group."""
    if to_quarter <= from_quarter:
        raise click.BadParameter("must be a later quarter than --from", param_hint="--to")
    config = CliService.resolve_config(ctx.obj, weighted=weighted)
    cohort, _ = CliService.load(config)

    if by is not None:
        scores, omitted = GradingService.grouped_progression_with_omissions(
            cohort, from_quarter, to_quarter, GroupBy(by), weighted=config.weighted
        )
        grouped = [
            GroupedProgression(
                from_quarter=from_quarter,
                to_quarter=to_quarter,
                group_by=GroupBy(by),
                scores=scores,
                omitted=omitted,
            )
        ]
        rows = ReportService.grouped_rows(grouped)
        text = csv_table(*rows) if fmt == "csv" else ReportService.grouped_markdown(grouped)
        CliService.emit(text, config.out)
        return

    result = ProgressionService.progression(cohort, from_quarter, to_quarter, weighted=config.weighted)
    step_tables = ProgressionService.progression_steps(result.matrix)
    if fmt == "csv":
        rows = ReportService.rate_rows(step_tables) if steps else ReportService.score_rows([result])
        text = csv_table(*rows)
    else:
        text = ReportService.progression_markdown(result, step_tables, with_steps=steps)
    CliService.emit(text, config.out)
