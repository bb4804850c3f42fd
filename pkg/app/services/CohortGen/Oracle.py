"""
Brute-force re-implementations of the lag score and the progression score.

They work record by record from the raw fields and share no computation with
the tabulation, lag score or progression services, so the property tests can
compare the two.
"""

from bisect import bisect_right
from typing import Dict, List

from app.core.config import IMPROVEMENT_LEVELS, MAX_LEVEL, PROGRESSION_DIVISOR
from app.core.exceptions import EmptyDataError
from app.services.Ingest.Ingest_Schema import AssessmentRecord, Cohort
from app.services.LagScore.LagScore_Schema import LagScoreTable
from app.services.Progression.Progression_Schema import ProgressionScore
from app.services.Tabulate.Tabulate_Schema import ContingencyTable


def _level(record: AssessmentRecord) -> int:
    flags = record.improvements
    return flags.lang1_oral + flags.lang2_oral + flags.math_oral + flags.writing


def _lag(record: AssessmentRecord) -> int:
    return record.compatible_class - record.age_appropriate_class


class OracleService:
    @staticmethod
    def oracle_lag_scores(cohort: Cohort, quarter: int) -> LagScoreTable:
        records = [r for r in cohort.records if r.quarter == quarter]
        if not records:
            raise EmptyDataError(f"no records for quarter {quarter}")

        levels_by_lag: Dict[int, List[int]] = {}
        excluded = 0
        for record in records:
            lag = _lag(record)
            if lag > 0:
                excluded += 1
                continue
            levels_by_lag.setdefault(lag, []).append(_level(record))
        if not levels_by_lag:
            raise EmptyDataError(f"no records with a non-positive class lag in quarter {quarter}")

        lags = sorted(levels_by_lag)
        counts, scores = [], []
        for lag in lags:
            observed = sorted(levels_by_lag[lag])
            n = len(observed)
            counts.append(tuple(observed.count(level) for level in IMPROVEMENT_LEVELS))
            scores.append(
                tuple(0.0 if level == 0 else bisect_right(observed, level) / n for level in IMPROVEMENT_LEVELS)
            )

        row_sums = tuple(sum(row) for row in counts)
        col_sums = tuple(sum(row[j] for row in counts) for j in range(len(IMPROVEMENT_LEVELS)))
        table = ContingencyTable(
            row_labels=tuple(lags),
            col_labels=IMPROVEMENT_LEVELS,
            counts=tuple(counts),
            row_sums=row_sums,
            col_sums=col_sums,
            total=sum(row_sums),
        )
        return LagScoreTable(
            quarter=quarter,
            lags=tuple(lags),
            levels=IMPROVEMENT_LEVELS,
            scores=tuple(scores),
            counts=table,
            excluded_records=excluded,
        )

    @staticmethod
    def oracle_progression(cohort: Cohort, from_quarter: int, to_quarter: int) -> ProgressionScore:
        """S as the sum over starting levels of the mean level change of the children starting there."""
        before = {r.child_id: r for r in cohort.records if r.quarter == from_quarter}
        after = {r.child_id: r for r in cohort.records if r.quarter == to_quarter}
        common = sorted(set(before) & set(after))
        if not common:
            raise EmptyDataError(f"no children with records in both quarter {from_quarter} and {to_quarter}")

        changes: Dict[int, List[int]] = {}
        for child_id in common:
            start = _level(before[child_id])
            changes.setdefault(start, []).append(_level(after[child_id]) - start)

        s = 0.0
        for start in sorted(changes):
            s += sum(changes[start]) / len(changes[start])

        rows = sorted(changes)
        return ProgressionScore(
            from_quarter=from_quarter,
            to_quarter=to_quarter,
            s=s,
            s_star=s / PROGRESSION_DIVISOR,
            simplified_s=s,
            row_index_sum=sum(rows),
            divisor=PROGRESSION_DIVISOR,
            s_min=float(-sum(rows)),
            s_max=float(sum(MAX_LEVEL - i for i in rows)),
        )
