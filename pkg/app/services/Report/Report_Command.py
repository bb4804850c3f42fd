from pathlib import Path

import click

from app.core.config import REPORT_DIR
from app.services.Cli.Cli import CliService, cli_errors
from app.services.Report.Report import ReportService
from app.services.Report.Report_Schema import OutputFormat, Section


@click.command("report")
@click.option("--all", "all_sections", is_flag=True, help="Render every section")
@click.option(
    "--section",
    "sections",
    type=click.Choice([s.value for s in Section]),
    multiple=True,
    help="Section to render (repeatable)",
)
@click.option(
    "--format",
    "formats",
    type=click.Choice([f.value for f in OutputFormat]),
    multiple=True,
    help="Output format (repeatable, default all)",
)
@click.option("--include-positive-lag", "include_positive", is_flag=True, default=None)
@click.option("--weighted", is_flag=True, default=None)
@click.pass_context
@cli_errors
def report(ctx: click.Context, all_sections: bool, sections, formats, include_positive, weighted):
    """
    Write report tables and charts for every quarter and quarter pair under
    --out (default CRY_REPORT_DIR), with a manifest.json of sha-256 hashes.
    """
    if not all_sections and not sections:
        raise click.UsageError("choose --all or at least one --section")
    options = dict(ctx.obj)
    if options.get("out") is None:
        options["out"] = Path(REPORT_DIR)
    config = CliService.resolve_config(
        options,
        include_positive=include_positive,
        weighted=weighted,
        formats=list(formats) or None,
    )
    cohort, _ = CliService.load(config)
    chosen = list(Section) if all_sections else [Section(s) for s in sections]
    bundle = CliService.full_bundle(cohort, config, chosen)
    manifest = ReportService.render(bundle, config.out)
    click.echo(f"{len(manifest.files)} files written to {manifest.root}")
