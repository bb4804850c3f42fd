import logging
import math

import numpy as np

from app.core.config import IMPROVEMENT_LEVELS, MAX_LEVEL, PROGRESSION_DIVISOR
from app.core.exceptions import ConsistencyError, EmptyDataError
from app.services.Ingest.Ingest import IngestService
from app.services.Ingest.Ingest_Schema import Cohort
from app.services.Progression.Progression_Schema import (
    ProgressionRateMatrix,
    ProgressionResult,
    ProgressionScore,
    ProgressionSteps,
)
from app.services.Tabulate.Tabulate import TabulateService
from app.services.Tabulate.Tabulate_Schema import RowProportionTable

# Set up logging
logger = logging.getLogger(__name__)


class ProgressionService:
    # |double sum - simplified form| must stay below this
    IDENTITY_TOLERANCE = 1e-9
    BOUND_TOLERANCE = 1e-12

    @staticmethod
    def progression_matrix(cohort: Cohort, from_quarter: int, to_quarter: int) -> ProgressionRateMatrix:
        """
        Cross-tabulate improvement levels of the children assessed in both quarters
        and divide each row by its row sum.

        Children with a record in only one of the quarters are left out and counted.

        Raises:
            EmptyDataError: if a quarter is missing or no child appears in both
        """
        for quarter in (from_quarter, to_quarter):
            if not cohort.has_quarter(quarter):
                raise EmptyDataError(f"no records for quarter {quarter}")

        pairs = IngestService.pairs(cohort, from_quarter, to_quarter)
        if not pairs:
            raise EmptyDataError(f"no children with records in both quarter {from_quarter} and {to_quarter}")

        unpaired_from = len(cohort.for_quarter(from_quarter)) - len(pairs)
        unpaired_to = len(cohort.for_quarter(to_quarter)) - len(pairs)
        if unpaired_from or unpaired_to:
            logger.warning(
                f"Quarter {from_quarter}->{to_quarter}: {unpaired_from} children only in quarter {from_quarter}, "
                f"{unpaired_to} only in quarter {to_quarter}; both groups are excluded"
            )

        table = TabulateService.tabulate(
            pairs,
            lambda pair: IngestService.improvement_level(pair[0]),
            lambda pair: IngestService.improvement_level(pair[1]),
        )
        rates = TabulateService.row_normalize(table)
        dropped_rows = tuple(level for level in IMPROVEMENT_LEVELS if level not in rates.row_labels)
        dropped_cols = tuple(level for level in IMPROVEMENT_LEVELS if level not in rates.col_labels)
        if dropped_rows or dropped_cols:
            logger.info(
                f"Quarter {from_quarter}->{to_quarter}: empty levels dropped "
                f"(rows {list(dropped_rows)}, columns {list(dropped_cols)})"
            )

        return ProgressionRateMatrix(
            from_quarter=from_quarter,
            to_quarter=to_quarter,
            rows=rates.row_labels,
            cols=rates.col_labels,
            rates=rates.proportions,
            column_sums=rates.column_sums(),
            row_sums=rates.row_sums,
            counts=table,
            dropped_rows=dropped_rows,
            dropped_cols=dropped_cols,
            paired_children=len(pairs),
            unpaired_from=unpaired_from,
            unpaired_to=unpaired_to,
        )

    @staticmethod
    def progression_score(
        matrix: ProgressionRateMatrix, weighted: bool = False, divisor: float = PROGRESSION_DIVISOR
    ) -> ProgressionScore:
        """
        S = sum_i sum_j p_ij (j - i) over the rows of the matrix, S* = S / divisor.

        The simplified form sum_j j p_.j - sum_i i is computed as a cross-check.
        With `weighted`, every row is weighted by its share of the paired children
        (the mean displacement per child) instead of counting once.

        Raises:
            ValueError: if the divisor is not a positive finite number
            ConsistencyError: if the two forms disagree or S leaves its bounds
        """
        if not math.isfinite(divisor) or divisor <= 0:
            raise ValueError(f"progression divisor must be a positive finite number, got {divisor!r}")
        rates = np.asarray(matrix.rates, dtype=float)
        rows = np.asarray(matrix.rows, dtype=float)
        cols = np.asarray(matrix.cols, dtype=float)
        if weighted:
            weights = np.asarray(matrix.row_sums, dtype=float) / float(sum(matrix.row_sums))
        else:
            weights = np.ones(len(matrix.rows))

        displacement = cols[None, :] - rows[:, None]
        s = float(np.sum(weights[:, None] * rates * displacement))

        column_mass = weights @ rates
        simplified = float(np.dot(cols, column_mass) - np.dot(weights, rows))
        if abs(s - simplified) >= ProgressionService.IDENTITY_TOLERANCE:
            raise ConsistencyError(
                f"progression score double sum {s!r} disagrees with simplified form {simplified!r}"
            )

        s_min = float(np.dot(weights, 0 - rows))
        s_max = float(np.dot(weights, MAX_LEVEL - rows))
        tolerance = ProgressionService.BOUND_TOLERANCE
        if not s_min - tolerance <= s <= s_max + tolerance:
            raise ConsistencyError(f"progression score {s!r} outside [{s_min}, {s_max}]")

        score = ProgressionScore(
            from_quarter=matrix.from_quarter,
            to_quarter=matrix.to_quarter,
            s=s,
            s_star=s / divisor,
            simplified_s=simplified,
            row_index_sum=int(sum(matrix.rows)),
            divisor=divisor,
            s_min=s_min,
            s_max=s_max,
            weighted=weighted,
        )
        logger.info(
            f"Quarter {matrix.from_quarter}->{matrix.to_quarter}: S = {score.s:.4f}, S* = {score.s_star:.4f}"
            + (" (population weighted)" if weighted else "")
        )
        return score

    @staticmethod
    def progression(
        cohort: Cohort,
        from_quarter: int,
        to_quarter: int,
        weighted: bool = False,
        divisor: float = PROGRESSION_DIVISOR,
    ) -> ProgressionResult:
        matrix = ProgressionService.progression_matrix(cohort, from_quarter, to_quarter)
        return ProgressionResult(
            matrix=matrix, score=ProgressionService.progression_score(matrix, weighted=weighted, divisor=divisor)
        )

    @staticmethod
    def progression_steps(matrix: ProgressionRateMatrix) -> ProgressionSteps:
        """Cross-tab, row sums and rate matrix with column sums, in that order."""
        return ProgressionSteps(
            from_quarter=matrix.from_quarter,
            to_quarter=matrix.to_quarter,
            crosstab=matrix.counts,
            row_sums=matrix.row_sums,
            rates=RowProportionTable(
                row_labels=matrix.rows,
                col_labels=matrix.cols,
                proportions=matrix.rates,
                row_sums=matrix.row_sums,
            ),
            column_sums=matrix.column_sums,
        )
