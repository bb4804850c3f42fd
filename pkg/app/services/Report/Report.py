import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from app.core.exceptions import ReportError
from app.services.Grading.Grading_Schema import Grade, GradeDistribution, GroupBy, GroupedProgression
from app.services.Ingest.Ingest_Schema import CoverageReport, DemographicSummary
from app.services.LagScore.LagScore_Schema import LagScoreTable
from app.services.Progression.Progression_Schema import ProgressionResult, ProgressionSteps
from app.services.Report.Formatting import (
    csv_table,
    fmt_percent,
    fmt_proportion,
    fmt_score,
    fmt_signed,
    markdown_table,
    svg_grouped_bars,
)
from app.services.Report.Report_Schema import OutputFormat, ReportBundle, ReportManifest, Section
from app.services.Tabulate.Tabulate_Schema import ContingencyTable

# Set up logging
logger = logging.getLogger(__name__)

Table = Tuple[List[str], List[List[str]]]
MANIFEST_FILE = "manifest.json"
WEIGHTED_LABEL = "population weighted, not the standard progression score"


def _pair_name(from_quarter: int, to_quarter: int) -> str:
    return f"quarter{from_quarter}_to_quarter{to_quarter}"


def _pair_title(from_quarter: int, to_quarter: int) -> str:
    return f"Quarter {from_quarter} to Quarter {to_quarter}"


def _lag_label(index: Any) -> str:
    return index if isinstance(index, str) else fmt_signed(int(index))


def _is_weighted(grouped: GroupedProgression) -> bool:
    return any(score.weighted for score in grouped.scores.values())


def _with_totals(counts: ContingencyTable) -> pd.DataFrame:
    frame = counts.to_frame()
    frame["Total"] = frame.sum(axis=1)
    frame.loc["Total"] = frame.sum(axis=0)
    return frame


def _frame_rows(frame: pd.DataFrame, label: Callable[[Any], str], cell: Callable[[Any], str]) -> Table:
    headers = [str(column) for column in frame.columns]
    rows = [[label(index)] + [cell(value) for value in values] for index, *values in frame.itertuples()]
    return headers, rows


class ReportService:
    # ---- tables ----------------------------------------------------------

    @staticmethod
    def lag_score_rows(table: LagScoreTable) -> Table:
        headers = ["Class lag"] + [str(level) for level in table.levels]
        rows = [
            [fmt_signed(lag)] + [fmt_proportion(score) for score in scores]
            for lag, scores in zip(table.lags, table.scores)
        ]
        return headers, rows

    @staticmethod
    def lag_count_rows(table: LagScoreTable) -> Table:
        headers, rows = _frame_rows(_with_totals(table.counts), _lag_label, lambda value: str(int(value)))
        return ["Class lag"] + headers, rows

    @staticmethod
    def crosstab_rows(steps: ProgressionSteps) -> Table:
        corner = f"Q{steps.from_quarter} \\ Q{steps.to_quarter}"
        headers, rows = _frame_rows(_with_totals(steps.crosstab), str, lambda value: str(int(value)))
        return [corner] + headers, rows

    @staticmethod
    def rate_rows(steps: ProgressionSteps) -> Table:
        corner = f"Q{steps.from_quarter} \\ Q{steps.to_quarter}"
        headers, rows = _frame_rows(steps.rates.to_frame(), str, fmt_percent)
        rows.append(["Column sum"] + [fmt_percent(total) for total in steps.column_sums])
        return [corner] + headers, rows

    @staticmethod
    def score_rows(results: Sequence[ProgressionResult]) -> Table:
        headers = ["Transition", "S", "S*", "S min", "S max", "Children", "Weighted"]
        rows = []
        for result in results:
            score = result.score
            rows.append(
                [
                    _pair_title(score.from_quarter, score.to_quarter),
                    fmt_score(score.s, places=2),
                    fmt_score(score.s_star),
                    fmt_score(score.s_min, places=2),
                    fmt_score(score.s_max, places=2),
                    str(result.matrix.paired_children),
                    "yes" if score.weighted else "no",
                ]
            )
        return headers, rows

    @staticmethod
    def grade_rows(distributions: Sequence[GradeDistribution]) -> Table:
        headers = ["Quarter", "Group", "Children"] + [f"Grade {grade.value}" for grade in Grade]
        rows = [
            [str(d.quarter), d.group, str(d.population)] + [fmt_percent(d.proportion(grade)) for grade in Grade]
            for d in distributions
        ]
        return headers, rows

    @staticmethod
    def grouped_rows(grouped: Sequence[GroupedProgression]) -> Table:
        """One row per group, one S* column per transition; '-' where a group was omitted."""
        headers = ["Group"] + [
            _pair_title(g.from_quarter, g.to_quarter) + (" (weighted)" if _is_weighted(g) else "") for g in grouped
        ]
        labels = sorted({label for g in grouped for label in list(g.scores) + list(g.omitted)})
        rows = [
            [label] + [fmt_score(g.scores[label].s_star) if label in g.scores else "-" for g in grouped]
            for label in labels
        ]
        return headers, rows

    @staticmethod
    def demography_rows(summary: DemographicSummary) -> Table:
        quarters = summary.quarters
        headers = ["Dimension", "Group", "Children"] + [f"Quarter {q.quarter} records" for q in quarters]
        rows = []
        for dimension, children, per_quarter in (
            ("State", summary.by_state, [q.by_state for q in quarters]),
            ("Sex", summary.by_sex, [q.by_sex for q in quarters]),
        ):
            for group in sorted(children):
                rows.append(
                    [dimension, group, str(children[group])] + [str(counts.get(group, 0)) for counts in per_quarter]
                )
        rows.append(["Total", "", str(summary.children)] + [str(q.records) for q in quarters])
        return headers, rows

    @staticmethod
    def coverage_rows(coverage: CoverageReport) -> Table:
        headers = ["Transition", "In both", "Only earlier", "Only later"]
        rows = [
            [_pair_title(p.from_quarter, p.to_quarter), str(p.both), str(p.only_from), str(p.only_to)]
            for p in coverage.pairs
        ]
        return headers, rows

    # ---- markdown documents ---------------------------------------------

    @staticmethod
    def lag_score_markdown(table: LagScoreTable, with_counts: bool = True) -> str:
        parts = [
            f"## Quarter {table.quarter} improvement score by class lag\n",
            markdown_table(*ReportService.lag_score_rows(table)),
        ]
        if table.exploratory_lags:
            lags = ", ".join(fmt_signed(lag) for lag in table.exploratory_lags)
            parts.append(f"\nExploratory rows (positive class lag): {lags}\n")
        elif table.excluded_records:
            parts.append(f"\n{table.excluded_records} records with a positive class lag excluded.\n")
        if with_counts:
            parts += ["\n### Children per class lag and level\n", markdown_table(*ReportService.lag_count_rows(table))]
        return "".join(parts)

    @staticmethod
    def score_line(result: ProgressionResult) -> str:
        score = result.score
        label = f" ({WEIGHTED_LABEL})" if score.weighted else ""
        return f"S = {fmt_score(score.s, places=2)}, S* = {fmt_score(score.s_star)}{label}\n"

    @staticmethod
    def progression_markdown(result: ProgressionResult, steps: ProgressionSteps, with_steps: bool = True) -> str:
        matrix = result.matrix
        parts = [f"## {_pair_title(matrix.from_quarter, matrix.to_quarter)} progression\n"]
        if with_steps:
            parts += [
                "\n### Step 1: children by level in both quarters\n",
                markdown_table(*ReportService.crosstab_rows(steps)),
                "\n### Step 2: children per starting level\n",
                markdown_table(
                    ["Level", "Children"], [[str(level), str(n)] for level, n in zip(matrix.rows, steps.row_sums)]
                ),
                "\n### Step 3: progression rates\n",
                markdown_table(*ReportService.rate_rows(steps)),
                "\n",
            ]
        parts.append(ReportService.score_line(result))
        notes = []
        if matrix.dropped_rows:
            notes.append(f"starting levels without children: {', '.join(map(str, matrix.dropped_rows))}")
        if matrix.unpaired_from or matrix.unpaired_to:
            notes.append(
                f"{matrix.unpaired_from} children only in quarter {matrix.from_quarter}, "
                f"{matrix.unpaired_to} only in quarter {matrix.to_quarter}"
            )
        for note in notes:
            parts.append(f"\nNote: {note}.\n")
        return "".join(parts)

    @staticmethod
    def grades_markdown(distributions: Sequence[GradeDistribution]) -> str:
        return markdown_table(*ReportService.grade_rows(distributions))

    @staticmethod
    def grouped_markdown(grouped: Sequence[GroupedProgression]) -> str:
        text = markdown_table(*ReportService.grouped_rows(grouped))
        if any(_is_weighted(g) for g in grouped):
            text += f"\nS* values marked weighted are {WEIGHTED_LABEL}.\n"
        return text

    @staticmethod
    def demography_markdown(summary: DemographicSummary, coverage: Optional[CoverageReport] = None) -> str:
        parts = ["## Children by state and sex\n", markdown_table(*ReportService.demography_rows(summary))]
        if coverage is not None and coverage.pairs:
            parts += ["\n## Children assessed across quarters\n", markdown_table(*ReportService.coverage_rows(coverage))]
        return "".join(parts)

    # ---- charts ----------------------------------------------------------

    @staticmethod
    def grade_charts(distributions: Sequence[GradeDistribution]) -> Dict[str, str]:
        """Overall: one chart, one series per quarter. Per group: one chart per quarter, one series per group."""
        charts: Dict[str, str] = {}
        categories = [f"Grade {grade.value}" for grade in Grade]
        by_kind: Dict[GroupBy, List[GradeDistribution]] = {}
        for d in distributions:
            by_kind.setdefault(d.group_by, []).append(d)

        for group_by in GroupBy:
            members = by_kind.get(group_by, [])
            if not members:
                continue
            if group_by == GroupBy.OVERALL:
                series = [(f"Quarter {d.quarter}", [d.proportion(g) for g in Grade]) for d in members]
                charts[f"{group_by.value}.svg"] = svg_grouped_bars("Grade distribution by quarter", categories, series)
                continue
            for quarter in sorted({d.quarter for d in members}):
                series = [(d.group, [d.proportion(g) for g in Grade]) for d in members if d.quarter == quarter]
                charts[f"{group_by.value}_quarter{quarter}.svg"] = svg_grouped_bars(
                    f"Quarter {quarter} grade distribution by {group_by.value}", categories, series
                )
        return charts

    # ---- rendering -------------------------------------------------------

    @staticmethod
    def render_files(bundle: ReportBundle) -> Dict[str, str]:
        """
        Every report file as relative path -> text, in section order.
        A pure function of the bundle.
        """
        files: Dict[str, str] = {}

        def emit(section: Section, name: str, table: Table, markdown: str) -> None:
            if bundle.wants(section, OutputFormat.MARKDOWN):
                files[f"{section.value}/{name}.md"] = markdown
            if bundle.wants(section, OutputFormat.CSV):
                files[f"{section.value}/{name}.csv"] = csv_table(*table)

        if bundle.demography is not None:
            emit(
                Section.DEMOGRAPHY,
                "children",
                ReportService.demography_rows(bundle.demography),
                ReportService.demography_markdown(bundle.demography, bundle.coverage),
            )
            if bundle.coverage is not None and bundle.coverage.pairs and bundle.wants(Section.DEMOGRAPHY, OutputFormat.CSV):
                files["demography/coverage.csv"] = csv_table(*ReportService.coverage_rows(bundle.coverage))

        for table in bundle.lag_scores:
            name = f"quarter{table.quarter}"
            emit(Section.LAG_SCORES, name, ReportService.lag_score_rows(table), ReportService.lag_score_markdown(table))
            if bundle.wants(Section.LAG_SCORES, OutputFormat.CSV):
                files[f"lag_scores/{name}_counts.csv"] = csv_table(*ReportService.lag_count_rows(table))

        if bundle.progressions:
            for entry in bundle.progressions:
                matrix = entry.result.matrix
                name = _pair_name(matrix.from_quarter, matrix.to_quarter)
                emit(
                    Section.PROGRESSION,
                    name,
                    ReportService.rate_rows(entry.steps),
                    ReportService.progression_markdown(entry.result, entry.steps),
                )
                if bundle.wants(Section.PROGRESSION, OutputFormat.CSV):
                    files[f"progression/{name}_counts.csv"] = csv_table(*ReportService.crosstab_rows(entry.steps))
            results = [entry.result for entry in bundle.progressions]
            emit(
                Section.PROGRESSION,
                "scores",
                ReportService.score_rows(results),
                markdown_table(*ReportService.score_rows(results)),
            )

        if bundle.grade_distributions:
            for group_by in GroupBy:
                members = [d for d in bundle.grade_distributions if d.group_by == group_by]
                if members:
                    emit(
                        Section.GRADES,
                        group_by.value,
                        ReportService.grade_rows(members),
                        ReportService.grades_markdown(members),
                    )
            if bundle.wants(Section.GRADES, OutputFormat.SVG):
                for name, svg in ReportService.grade_charts(bundle.grade_distributions).items():
                    files[f"grades/{name}"] = svg

        for group_by in (GroupBy.SEX, GroupBy.STATE):
            members = [g for g in bundle.grouped_scores if g.group_by == group_by]
            if members:
                emit(
                    Section.GROUPED_SCORES,
                    group_by.value,
                    ReportService.grouped_rows(members),
                    ReportService.grouped_markdown(members),
                )
        return files

    @staticmethod
    def render(bundle: ReportBundle, out_dir: Union[str, Path]) -> ReportManifest:
        """
        Write the bundle under `out_dir` and a manifest.json of file -> sha-256.

        Raises:
            ReportError: if the directory or a file cannot be written
        """
        root = Path(out_dir)
        files = ReportService.render_files(bundle)
        manifest: Dict[str, str] = {}
        try:
            root.mkdir(parents=True, exist_ok=True)
            for relative, text in files.items():
                data = text.encode("utf-8")
                target = root / relative
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_bytes(data)
                manifest[relative] = hashlib.sha256(data).hexdigest()
            (root / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            logger.error(f"Could not write report to {root}: {e}")
            raise ReportError(f"cannot write report to {root}: {e}") from e

        logger.info(f"Wrote {len(manifest)} report files to {root}")
        return ReportManifest(root=str(root), files=manifest)
