import logging
from collections import Counter
from itertools import combinations
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, TextIO, Tuple, Union

import pandas as pd
from pydantic import ValidationError

from app.core.config import (
    CSV_COLUMNS,
    FLAG_COLUMNS,
    GRADE_MAX,
    GRADE_MIN,
    QUARTER_COLUMN,
    QUARTERS,
)
from app.core.exceptions import SchemaError
from app.services.Ingest.Ingest_Schema import (
    AssessmentRecord,
    Cohort,
    CoverageReport,
    DemographicSummary,
    DuplicateRecord,
    LoadReport,
    QuarterCoverage,
    QuarterDemography,
    RowRejection,
    Sex,
    State,
)

# Set up logging
logger = logging.getLogger(__name__)

FLAG_FIELDS = ("lang1_oral", "lang2_oral", "math_oral", "writing")
# Fills the cells of a row that has more fields than the header
FIELD_COUNT_MARKER = "\x00extra field"
FIELD_COUNT_REASON = "wrong number of fields"

GradeRange = Tuple[int, int]
Pair = Tuple[AssessmentRecord, AssessmentRecord]


class IngestService:
    # First data row of a CSV file; the header is row 1
    FIRST_DATA_ROW = 2

    @staticmethod
    def read_table(path: Union[str, Path], allow_quarter: bool = True) -> pd.DataFrame:
        """
        Read an assessment CSV as strings and check its header.

        Rows with the wrong number of fields stay in the frame: a row with
        extra fields has every cell except its child_id replaced by
        `FIELD_COUNT_MARKER`, a row with missing fields carries NaN there.

        Args:
            path: CSV file to read
            allow_quarter: whether a `quarter` column may be present

        Returns:
            DataFrame with one string column per schema column, indexed by CSV row number

        Raises:
            SchemaError: if the file cannot be read or the header does not match
        """
        try:
            header = [str(c).strip() for c in pd.read_csv(path, nrows=0, dtype=str, encoding="utf-8").columns]
        except FileNotFoundError:
            raise SchemaError(f"input file not found: {path}")
        except pd.errors.EmptyDataError:
            raise SchemaError(f"input file has no header row: {path}")
        except (pd.errors.ParserError, UnicodeDecodeError) as e:
            raise SchemaError(f"cannot parse {path}: {e}")

        present = set(header)
        missing = [c for c in CSV_COLUMNS if c not in present]
        allowed = set(CSV_COLUMNS) | ({QUARTER_COLUMN} if allow_quarter else set())
        unknown = sorted(present - allowed)
        if missing or unknown:
            problems = []
            if missing:
                problems.append(f"missing columns {missing}")
            if unknown:
                problems.append(f"unknown columns {unknown}")
            raise SchemaError(f"{path}: header does not match the assessment schema: {'; '.join(problems)}")

        child_position = header.index("child_id")

        def mark(fields: List[str]) -> List[str]:
            marked = [FIELD_COUNT_MARKER] * len(header)
            if child_position < len(fields):
                marked[child_position] = fields[child_position]
            return marked

        # pandas reads an over-long first data row as an index column, so such rows are skipped and marked here
        leading: List[int] = []
        while True:
            try:
                frame = pd.read_csv(
                    path,
                    dtype=str,
                    keep_default_na=False,
                    encoding="utf-8",
                    engine="python",
                    on_bad_lines=mark,
                    skiprows=[row - 1 for row in leading],
                )
            except (pd.errors.ParserError, UnicodeDecodeError) as e:
                raise SchemaError(f"cannot parse {path}: {e}")
            if frame.empty or isinstance(frame.index, pd.RangeIndex):
                break
            leading.append(IngestService.FIRST_DATA_ROW + len(leading))

        frame.columns = header
        start = IngestService.FIRST_DATA_ROW + len(leading)
        frame.index = pd.RangeIndex(start, start + len(frame))
        if leading:
            frame = pd.concat([pd.DataFrame([mark([])] * len(leading), columns=header, index=leading), frame])
        return frame

    @staticmethod
    def rejection_reason(error: ValidationError) -> str:
        reasons = []
        for detail in error.errors():
            message = detail["msg"].removeprefix("Value error, ")
            field = ".".join(str(part) for part in detail["loc"])
            reasons.append(f"{message} ({field})" if field else message)
        return "; ".join(reasons)

    @staticmethod
    def parse_row(row: Dict[str, str], quarter: int, grade_range: Optional[GradeRange] = None) -> AssessmentRecord:
        """
        Validate one CSV row into a record.

        Raises:
            ValidationError: if any field violates the record invariants
        """
        data = {
            "child_id": row["child_id"],
            "center": row["center"],
            "state": row["state"],
            "sex": row["sex"],
            "age_appropriate_class": row["age_appropriate_class"],
            "compatible_class": row["compatible_class"],
            "attendance": row["attendance"],
            "improvements": dict(zip(FLAG_FIELDS, (row[column] for column in FLAG_COLUMNS))),
            "quarter": quarter,
        }
        context = {"grade_range": grade_range or (GRADE_MIN, GRADE_MAX)}
        return AssessmentRecord.model_validate(data, context=context)

    @staticmethod
    def _accept_rows(
        frame: pd.DataFrame,
        report: LoadReport,
        quarter_of: Callable[[Dict[str, str]], Optional[int]],
        grade_range: Optional[GradeRange],
    ) -> None:
        for row_number, row in zip(frame.index.tolist(), frame.to_dict("records")):
            raw_id = row.get("child_id")
            child_id = None
            if isinstance(raw_id, str) and raw_id != FIELD_COUNT_MARKER:
                child_id = raw_id.strip() or None
            if any(not isinstance(value, str) or value == FIELD_COUNT_MARKER for value in row.values()):
                logger.debug(f"{report.source} row {row_number} rejected: {FIELD_COUNT_REASON}")
                report.rejections.append(RowRejection(row=row_number, reason=FIELD_COUNT_REASON, child_id=child_id))
                continue
            try:
                quarter = quarter_of(row)
            except ValueError as e:
                report.rejections.append(RowRejection(row=row_number, reason=str(e), child_id=child_id))
                continue
            if quarter is None:
                report.skipped += 1
                continue
            try:
                report.records.append(IngestService.parse_row(row, quarter, grade_range))
            except ValidationError as e:
                reason = IngestService.rejection_reason(e)
                logger.debug(f"{report.source} row {row_number} rejected: {reason}")
                report.rejections.append(
                    RowRejection(row=row_number, reason=reason, child_id=child_id, quarter=quarter)
                )

    @staticmethod
    def load_quarter(
        path: Union[str, Path], quarter: int, grade_range: Optional[GradeRange] = None
    ) -> LoadReport:
        """
        Load one quarter's assessments.

        A file carrying a `quarter` column contributes only its rows for the
        requested quarter; the others are counted as skipped.

        Args:
            path: CSV file in the assessment schema
            quarter: quarter the rows belong to (1-3)
            grade_range: accepted (min, max) class, defaults to the configured range

        Returns:
            LoadReport with accepted records and per-row rejections

        Raises:
            SchemaError: if the header is wrong
        """
        if quarter not in QUARTERS:
            raise ValueError(f"quarter must be one of {QUARTERS}, got {quarter}")

        frame = IngestService.read_table(path)
        report = LoadReport(source=str(path), quarter=quarter)
        has_quarter_column = QUARTER_COLUMN in frame.columns

        def quarter_of(row: Dict[str, str]) -> Optional[int]:
            if not has_quarter_column:
                return quarter
            return quarter if row[QUARTER_COLUMN].strip() == str(quarter) else None

        IngestService._accept_rows(frame, report, quarter_of, grade_range)

        logger.info(
            f"Loaded {len(report.records)} records for quarter {quarter} from {path} "
            f"({len(report.rejections)} rejected, {report.skipped} skipped)"
        )
        if report.rejections:
            logger.warning(f"{len(report.rejections)} rows of {path} were rejected")
        return report

    @staticmethod
    def load_combined(path: Union[str, Path], grade_range: Optional[GradeRange] = None) -> LoadReport:
        """
        Load a combined file holding every quarter, distinguished by its `quarter` column.
        """
        frame = IngestService.read_table(path)
        if QUARTER_COLUMN not in frame.columns:
            raise SchemaError(f"{path}: combined file needs a '{QUARTER_COLUMN}' column")
        report = LoadReport(source=str(path))

        def quarter_of(row: Dict[str, str]) -> Optional[int]:
            text = row[QUARTER_COLUMN].strip()
            if text not in {str(q) for q in QUARTERS}:
                raise ValueError(f"quarter '{text}' not in {QUARTERS[0]}-{QUARTERS[-1]} ({QUARTER_COLUMN})")
            return int(text)

        IngestService._accept_rows(frame, report, quarter_of, grade_range)

        logger.info(
            f"Loaded {len(report.records)} records from combined file {path} ({len(report.rejections)} rejected)"
        )
        if report.rejections:
            logger.warning(f"{len(report.rejections)} rows of {path} were rejected")
        return report

    @staticmethod
    def dump_records(
        records: Iterable[AssessmentRecord], target: Union[str, Path, TextIO], include_quarter: bool = False
    ) -> None:
        """
        Write records in the assessment CSV schema.

        Values are written as text exactly as held, so loading the file again
        gives back equal records.
        """
        columns = list(CSV_COLUMNS) + ([QUARTER_COLUMN] if include_quarter else [])
        rows = []
        for record in records:
            row = {
                "child_id": record.child_id,
                "center": record.center,
                "state": record.state.value,
                "sex": record.sex.value,
                "age_appropriate_class": str(record.age_appropriate_class),
                "compatible_class": str(record.compatible_class),
                "attendance": str(record.attendance),
            }
            row.update({column: str(flag) for column, flag in zip(FLAG_COLUMNS, record.improvements.as_tuple())})
            if include_quarter:
                row[QUARTER_COLUMN] = str(record.quarter)
            rows.append(row)
        frame = pd.DataFrame(rows, columns=columns, dtype=str)
        frame.to_csv(target, index=False, lineterminator="\n")

    @staticmethod
    def summarize(records: Iterable[AssessmentRecord]) -> DemographicSummary:
        """Count records per quarter and children by their first-seen state and sex."""
        records = list(records)
        per_quarter: Dict[int, List[AssessmentRecord]] = {}
        first_seen: Dict[str, AssessmentRecord] = {}
        for record in sorted(records, key=lambda r: (r.quarter, r.child_id)):
            per_quarter.setdefault(record.quarter, []).append(record)
            known = first_seen.setdefault(record.child_id, record)
            if known is not record and (known.state, known.sex) != (record.state, record.sex):
                logger.warning(
                    f"Child {record.child_id} changes demographics in quarter {record.quarter}; "
                    f"using quarter {known.quarter} values"
                )

        def counts(rows: Iterable[AssessmentRecord]) -> Tuple[Dict[str, int], Dict[str, int]]:
            rows = list(rows)
            states = Counter(r.state for r in rows)
            sexes = Counter(r.sex for r in rows)
            return (
                {state.value: states.get(state, 0) for state in State},
                {sex.value: sexes.get(sex, 0) for sex in Sex},
            )

        by_state, by_sex = counts(first_seen.values())
        quarters = []
        for quarter in sorted(per_quarter):
            quarter_states, quarter_sexes = counts(per_quarter[quarter])
            quarters.append(
                QuarterDemography(
                    quarter=quarter,
                    records=len(per_quarter[quarter]),
                    by_state=quarter_states,
                    by_sex=quarter_sexes,
                )
            )
        return DemographicSummary(
            total_records=len(records),
            children=len(first_seen),
            by_state=by_state,
            by_sex=by_sex,
            quarters=quarters,
        )

    @staticmethod
    def build_cohort(records: Iterable[AssessmentRecord]) -> Cohort:
        """
        Join validated records into a cohort.

        The first record seen for a (child_id, quarter) pair wins; later ones are
        logged and listed in `Cohort.duplicates`.
        """
        kept: Dict[Tuple[str, int], AssessmentRecord] = {}
        duplicates = []
        for record in records:
            key = (record.child_id, record.quarter)
            if key in kept:
                logger.warning(
                    f"Duplicate record for child {record.child_id} in quarter {record.quarter}; keeping the first"
                )
                duplicates.append(DuplicateRecord(child_id=record.child_id, quarter=record.quarter))
                continue
            kept[key] = record

        ordered = tuple(sorted(kept.values(), key=lambda r: (r.quarter, r.child_id)))
        cohort = Cohort(records=ordered, summary=IngestService.summarize(ordered), duplicates=tuple(duplicates))
        logger.info(
            f"Built cohort of {len(ordered)} records for {cohort.summary.children} children "
            f"across quarters {list(cohort.quarters)}"
        )
        return cohort

    @staticmethod
    def restrict(cohort: Cohort, predicate: Callable[[AssessmentRecord], bool]) -> Cohort:
        """Sub-cohort of the records satisfying `predicate`."""
        kept = tuple(r for r in cohort.records if predicate(r))
        return Cohort(records=kept, summary=IngestService.summarize(kept))

    @staticmethod
    def improvement_level(record: AssessmentRecord) -> int:
        """Number of subjects (0-4) with an improvement flag of 1."""
        return sum(record.improvements.as_tuple())

    @staticmethod
    def class_lag(record: AssessmentRecord) -> int:
        """Compatible class minus age-appropriate class; laggards are negative."""
        return record.compatible_class - record.age_appropriate_class

    @staticmethod
    def pairs(cohort: Cohort, from_quarter: int, to_quarter: int) -> List[Pair]:
        """Records of the children present in both quarters, ordered by child_id."""
        pairs = []
        for record in cohort.for_quarter(from_quarter):
            later = cohort.get(record.child_id, to_quarter)
            if later is not None:
                pairs.append((record, later))
        return pairs

    @staticmethod
    def coverage(cohort: Cohort) -> CoverageReport:
        """
        Children present in each quarter and, for every pair of quarters,
        how many appear in both or in only one of them.
        """
        children = {q: {r.child_id for r in cohort.for_quarter(q)} for q in cohort.quarters}
        pairs = []
        for first, second in combinations(cohort.quarters, 2):
            both = children[first] & children[second]
            pairs.append(
                QuarterCoverage(
                    from_quarter=first,
                    to_quarter=second,
                    both=len(both),
                    only_from=len(children[first] - both),
                    only_to=len(children[second] - both),
                )
            )
            if len(both) < len(children[first]):
                logger.info(
                    f"{len(children[first]) - len(both)} children of quarter {first} have no quarter {second} record"
                )
        return CoverageReport(children_per_quarter={q: len(ids) for q, ids in children.items()}, pairs=pairs)
