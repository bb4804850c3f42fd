import logging
from pathlib import Path

import click

from app.core.config import DATA_DIR, LOG_LEVEL
from app.services.CohortGen.CohortGen_Command import synth
from app.services.Grading.Grading_Command import grades
from app.services.Ingest.Ingest_Command import validate
from app.services.LagScore.LagScore_Command import lag_scores
from app.services.Progression.Progression_Command import progression
from app.services.Report.Report_Command import report

INPUT_FILE = click.Path(dir_okay=False, path_type=Path)


# Create the command group
@click.group()
@click.option(
    "--data-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=DATA_DIR,
    envvar="CRY_DATA_DIR",
    show_default=True,
    help="Where quarterN.csv / assessments.csv are looked up when no input is given",
)
@click.option("--q1", type=INPUT_FILE, help="Quarter 1 assessment CSV")
@click.option("--q2", type=INPUT_FILE, help="Quarter 2 assessment CSV")
@click.option("--q3", type=INPUT_FILE, help="Quarter 3 assessment CSV")
@click.option("--combined", type=INPUT_FILE, help="One CSV for all quarters, with a quarter column")
@click.option("--config", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="JSON run configuration")
@click.option("--grade-min", type=int, help="Lowest accepted class")
@click.option("--grade-max", type=int, help="Highest accepted class")
@click.option("--out", type=click.Path(path_type=Path), help="Output file (report: output directory)")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging")
@click.option("-q", "--quiet", is_flag=True, help="Warnings and errors only")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, quiet: bool, **options):
    """Learning-improvement analytics for quarterly child assessments."""
    if verbose and quiet:
        raise click.UsageError("--verbose and --quiet are mutually exclusive")
    level = logging.DEBUG if verbose else logging.WARNING if quiet else LOG_LEVEL
    # Set up logging on standard error; analysis output goes to standard output
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)
    ctx.obj = options


# Include commands
cli.add_command(validate)
cli.add_command(lag_scores)
cli.add_command(progression)
cli.add_command(grades)
cli.add_command(report)
cli.add_command(synth)

if __name__ == "__main__":
    cli()
