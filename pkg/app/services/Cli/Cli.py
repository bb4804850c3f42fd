import functools
import json
import logging
from itertools import combinations
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar

import click
from pydantic import ValidationError

from app.core.config import COMBINED_FILE, DATA_DIR, QUARTER_FILE_TEMPLATE, QUARTERS
from app.core.exceptions import AnalysisError, EmptyDataError
from app.services.Cli.Cli_Schema import RunConfig
from app.services.Grading.Grading import GradingService
from app.services.Grading.Grading_Schema import GroupBy, GroupedProgression
from app.services.Ingest.Ingest import IngestService
from app.services.Ingest.Ingest_Schema import Cohort, LoadReport
from app.services.LagScore.LagScore import LagScoreService
from app.services.Progression.Progression import ProgressionService
from app.services.Report.Report_Schema import ProgressionEntry, ReportBundle, Section

# Set up logging
logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])


def cli_errors(func: F) -> F:
    """Turn analysis failures into exit code 1 and bad run configuration into a usage error (exit 2)."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except ValidationError as e:
            raise click.UsageError(f"invalid run configuration: {IngestService.rejection_reason(e)}")
        except AnalysisError as e:
            logger.error(f"{type(e).__name__}: {e}")
            raise click.ClickException(str(e))

    return wrapper  # type: ignore[return-value]


class CliService:
    @staticmethod
    def discover_inputs(data_dir: Path) -> Dict[str, Any]:
        """The combined file under `data_dir` if present, otherwise every quarterN.csv found there."""
        combined = data_dir / COMBINED_FILE
        if combined.is_file():
            return {"combined": combined}
        inputs = {q: data_dir / QUARTER_FILE_TEMPLATE.format(quarter=q) for q in QUARTERS}
        return {"inputs": {q: path for q, path in inputs.items() if path.is_file()}}

    @staticmethod
    def resolve_config(options: Dict[str, Any], **overrides: Any) -> RunConfig:
        """
        Merge run configuration sources: environment defaults < JSON config file < flags.

        `options` holds the global flags; `overrides` the command's own flags.
        Flags left at None do not override anything.

        Raises:
            click.UsageError: if the config file cannot be read
            ValidationError: if the merged configuration is invalid
        """
        settings: Dict[str, Any] = {}
        config_file = options.get("config")
        if config_file:
            try:
                settings.update(json.loads(Path(config_file).read_text(encoding="utf-8")))
            except (OSError, json.JSONDecodeError) as e:
                raise click.UsageError(f"cannot read config file {config_file}: {e}")

        flagged = {q: options.get(f"q{q}") for q in QUARTERS}
        if any(flagged.values()):
            settings["inputs"] = {q: path for q, path in flagged.items() if path}
            settings.pop("combined", None)
        if options.get("combined"):
            settings["combined"] = options["combined"]
            settings.pop("inputs", None)
        if not settings.get("inputs") and not settings.get("combined"):
            settings.update(CliService.discover_inputs(Path(options.get("data_dir") or DATA_DIR)))

        for key in ("grade_min", "grade_max", "out"):
            if options.get(key) is not None:
                settings[key] = options[key]
        settings.update({key: value for key, value in overrides.items() if value is not None})

        config = RunConfig.model_validate(settings)
        logger.debug(f"Run configuration: {config.model_dump_json()}")
        return config

    @staticmethod
    def load(config: RunConfig) -> Tuple[Cohort, List[LoadReport]]:
        """
        Load every configured input and join the accepted records into one cohort.

        Raises:
            SchemaError: if an input is missing or has a wrong header
            EmptyDataError: if no row was accepted
        """
        if config.combined is not None:
            reports = [IngestService.load_combined(config.combined, config.grade_range)]
        else:
            reports = [
                IngestService.load_quarter(path, quarter, config.grade_range) for quarter, path in config.inputs.items()
            ]
        records = [record for report in reports for record in report.records]
        if not records:
            raise EmptyDataError("no valid assessment records in the inputs")
        return IngestService.build_cohort(records), reports

    @staticmethod
    def full_bundle(cohort: Cohort, config: RunConfig, sections: Optional[List[Section]] = None) -> ReportBundle:
        """
        Every analysis for every quarter and quarter pair the cohort holds.
        Analyses without data (an unpaired quarter pair, say) are skipped with a warning.
        """
        wanted = set(sections or list(Section))
        quarters = cohort.quarters
        pairs = list(combinations(quarters, 2))
        bundle = ReportBundle(formats={section: set(config.formats) for section in wanted})

        if Section.DEMOGRAPHY in wanted:
            bundle.demography = cohort.summary
            bundle.coverage = IngestService.coverage(cohort)

        if Section.LAG_SCORES in wanted:
            for quarter in quarters:
                try:
                    bundle.lag_scores.append(
                        LagScoreService.lag_score_table(cohort, quarter, include_positive=config.include_positive)
                    )
                except EmptyDataError as e:
                    logger.warning(f"Lag scores for quarter {quarter} skipped: {e}")

        if Section.PROGRESSION in wanted:
            for first, second in pairs:
                try:
                    result = ProgressionService.progression(cohort, first, second, weighted=config.weighted)
                except EmptyDataError as e:
                    logger.warning(f"Progression {first}->{second} skipped: {e}")
                    continue
                bundle.progressions.append(
                    ProgressionEntry(result=result, steps=ProgressionService.progression_steps(result.matrix))
                )

        if Section.GRADES in wanted:
            for group_by in GroupBy:
                for quarter in quarters:
                    bundle.grade_distributions.extend(GradingService.grade_distribution(cohort, quarter, group_by))

        if Section.GROUPED_SCORES in wanted:
            for group_by in (GroupBy.SEX, GroupBy.STATE):
                for first, second in pairs:
                    scores, omitted = GradingService.grouped_progression_with_omissions(
                        cohort, first, second, group_by, weighted=config.weighted
                    )
                    if scores:
                        bundle.grouped_scores.append(
                            GroupedProgression(
                                from_quarter=first,
                                to_quarter=second,
                                group_by=group_by,
                                scores=scores,
                                omitted=omitted,
                            )
                        )
        return bundle

    @staticmethod
    def emit(text: str, out: Optional[Path]) -> None:
        """Analysis output goes to standard output, or to `out` when given."""
        if out is None:
            click.echo(text, nl=False)
            return
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(text, encoding="utf-8")
        except OSError as e:
            raise click.ClickException(f"cannot write {out}: {e}")
        logger.info(f"Wrote {out}")
