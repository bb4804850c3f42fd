import logging

import numpy as np

from app.core.config import IMPROVEMENT_LEVELS
from app.core.exceptions import EmptyDataError, QuarterMismatchError
from app.services.Ingest.Ingest import IngestService
from app.services.Ingest.Ingest_Schema import AssessmentRecord, Cohort
from app.services.LagScore.LagScore_Schema import LagScoreTable, StudentScore
from app.services.Tabulate.Tabulate import TabulateService

# Set up logging
logger = logging.getLogger(__name__)


class LagScoreService:
    @staticmethod
    def lag_score_table(cohort: Cohort, quarter: int, include_positive: bool = False) -> LagScoreTable:
        """
        Score every improvement level relative to children with the same class lag.

        Steps:
        - cross-tabulate class lag against improvement level (children whose
          compatible class is above their age-appropriate class are left out
          unless `include_positive` is set, in which case their rows are marked
          exploratory)
        - divide each row by its row sum
        - accumulate the proportions along the row and set level 0 to 0

        Args:
            cohort: validated cohort
            quarter: quarter to score
            include_positive: keep positive-lag rows as exploratory rows

        Returns:
            LagScoreTable tagged with the quarter

        Raises:
            EmptyDataError: if the quarter has no records
        """
        records = cohort.for_quarter(quarter)
        if not records:
            raise EmptyDataError(f"no records for quarter {quarter}")

        if include_positive:
            kept = list(records)
        else:
            kept = [r for r in records if IngestService.class_lag(r) <= 0]
        excluded = len(records) - len(kept)
        if excluded:
            logger.info(f"Quarter {quarter}: {excluded} records with a positive class lag excluded")
        if not kept:
            raise EmptyDataError(f"no records with a non-positive class lag in quarter {quarter}")

        table = TabulateService.tabulate(
            kept, IngestService.class_lag, IngestService.improvement_level, col_levels=IMPROVEMENT_LEVELS
        )

        # Cumulative counts over the row sum: the same value as summing the row
        # proportions, and exactly 1 at the top level.
        counts = np.asarray(table.counts, dtype=np.int64)
        cumulative = np.cumsum(counts, axis=1) / np.asarray(table.row_sums, dtype=float)[:, None]
        cumulative[:, 0] = 0.0

        exploratory = tuple(lag for lag in table.row_labels if lag > 0)
        logger.info(f"Quarter {quarter}: lag scores for lags {list(table.row_labels)}")
        return LagScoreTable(
            quarter=quarter,
            lags=table.row_labels,
            levels=table.col_labels,
            scores=tuple(tuple(float(s) for s in row) for row in cumulative),
            counts=table,
            excluded_records=excluded,
            exploratory_lags=exploratory,
        )

    @staticmethod
    def score_student(table: LagScoreTable, record: AssessmentRecord) -> StudentScore:
        """
        Look up a child's score in the table of the same quarter.

        A class lag without a row in the table gives an unscorable result
        (score None with a reason), never a silent 0.

        Raises:
            QuarterMismatchError: if the record belongs to another quarter
        """
        if record.quarter != table.quarter:
            raise QuarterMismatchError(
                f"record of quarter {record.quarter} cannot be scored with the quarter {table.quarter} table"
            )
        lag = IngestService.class_lag(record)
        level = IngestService.improvement_level(record)
        result = StudentScore(child_id=record.child_id, quarter=record.quarter, class_lag=lag, level=level)
        if lag not in table.lags:
            reason = (
                "positive class lag is excluded from scoring" if lag > 0 else f"no children with class lag {lag}"
            )
            logger.debug(f"Child {record.child_id} unscorable: {reason}")
            return result.model_copy(update={"reason": reason})
        return result.model_copy(update={"score": table.score(lag, level)})
