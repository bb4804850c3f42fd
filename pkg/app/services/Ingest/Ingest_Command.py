import click

from app.services.Cli.Cli import CliService, cli_errors
from app.services.Ingest.Ingest import IngestService
from app.services.Report.Formatting import markdown_table


@click.command("validate")
@click.pass_context
@cli_errors
def validate(ctx: click.Context):
    """
    Check the assessment files and summarize them per quarter.

    Rejected rows are listed with their row number and reason; any rejection
    makes the command fail with exit code 1.
    """
    config = CliService.resolve_config(ctx.obj)
    reports = (
        [IngestService.load_combined(config.combined, config.grade_range)]
        if config.combined is not None
        else [IngestService.load_quarter(path, q, config.grade_range) for q, path in config.inputs.items()]
    )
    cohort = IngestService.build_cohort(r for report in reports for r in report.records)

    rows = [
        [
            report.source,
            str(report.quarter) if report.quarter else "all",
            str(len(report.records)),
            str(len(report.rejections)),
            str(report.skipped),
        ]
        for report in reports
    ]
    lines = [markdown_table(["Source", "Quarter", "Accepted", "Rejected", "Skipped"], rows)]
    if cohort.records:
        counts = [[str(q), str(len(cohort.for_quarter(q)))] for q in cohort.quarters]
        lines += ["\n", markdown_table(["Quarter", "Children"], counts)]

    rejections = [(report.source, rejection) for report in reports for rejection in report.rejections]
    if rejections:
        lines.append("\nRejected rows:\n")
        for source, rejection in rejections:
            child = f" [child {rejection.child_id}]" if rejection.child_id else ""
            lines.append(f"- {source} row {rejection.row}{child}: {rejection.reason}\n")
    if cohort.duplicates:
        lines.append("\nDuplicate records (first kept):\n")
        for duplicate in cohort.duplicates:
            lines.append(f"- child {duplicate.child_id}, quarter {duplicate.quarter}\n")

    CliService.emit("".join(lines), config.out)
    if rejections:
        raise click.ClickException(f"{len(rejections)} rows rejected")
