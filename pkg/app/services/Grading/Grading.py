import logging
from typing import Callable, Dict, List, Tuple

from app.core.config import GRADE_LEVELS, IMPROVEMENT_LEVELS, MAX_LEVEL, PROGRESSION_DIVISOR
from app.core.exceptions import EmptyDataError
from app.services.Ingest.Ingest import IngestService
from app.services.Ingest.Ingest_Schema import AssessmentRecord, Cohort, Sex, State
from app.services.Grading.Grading_Schema import (
    OVERALL_GROUP,
    Grade,
    GradeConsistency,
    GradeDistribution,
    GroupBy,
)
from app.services.Progression.Progression import ProgressionService
from app.services.Progression.Progression_Schema import ProgressionScore

# Set up logging
logger = logging.getLogger(__name__)


def _level_grades(grade_levels: Dict[str, int]) -> Dict[int, Grade]:
    """Invert the configured grade -> level mapping, checking it is bijective and order preserving."""
    grades = {Grade(letter): int(level) for letter, level in grade_levels.items()}
    if set(grades) != set(Grade) or sorted(grades.values()) != list(IMPROVEMENT_LEVELS):
        raise ValueError(f"grade mapping must pair grades {[g.value for g in Grade]} with levels {IMPROVEMENT_LEVELS}")
    ordered = [grades[grade] for grade in Grade]
    if ordered != sorted(ordered, reverse=True):
        raise ValueError("grade mapping must give grade A the highest level")
    return {level: grade for grade, level in grades.items()}


LEVEL_GRADES = _level_grades(GRADE_LEVELS)


class GradingService:
    @staticmethod
    def grade_of(level: int) -> Grade:
        """
        Letter grade of an improvement level (4 -> A ... 0 -> E by default).

        Raises:
            ValueError: if the level is outside 0-4
        """
        if level not in LEVEL_GRADES:
            raise ValueError(f"improvement level must be in {IMPROVEMENT_LEVELS}, got {level}")
        return LEVEL_GRADES[level]

    @staticmethod
    def group_key(group_by: GroupBy) -> Callable[[AssessmentRecord], str]:
        if group_by == GroupBy.SEX:
            return lambda record: record.sex.value
        if group_by == GroupBy.STATE:
            return lambda record: record.state.value
        return lambda record: OVERALL_GROUP

    @staticmethod
    def group_labels(group_by: GroupBy) -> List[str]:
        if group_by == GroupBy.SEX:
            return sorted(sex.value for sex in Sex)
        if group_by == GroupBy.STATE:
            return sorted(state.value for state in State)
        return [OVERALL_GROUP]

    @staticmethod
    def grade_distribution(
        cohort: Cohort, quarter: int, group_by: GroupBy = GroupBy.OVERALL
    ) -> List[GradeDistribution]:
        """
        Proportion of the quarter's children at each grade, overall or per group.

        Groups are ordered by label; a group without children that quarter is
        left out with a warning.

        Raises:
            EmptyDataError: if the quarter has no records
        """
        records = cohort.for_quarter(quarter)
        if not records:
            raise EmptyDataError(f"no records for quarter {quarter}")

        key = GradingService.group_key(group_by)
        grouped: Dict[str, List[AssessmentRecord]] = {}
        for record in records:
            grouped.setdefault(key(record), []).append(record)

        distributions = []
        for label in GradingService.group_labels(group_by):
            members = grouped.get(label, [])
            if not members:
                logger.warning(f"Quarter {quarter}: no children in {group_by.value} group '{label}', omitted")
                continue
            counts = {grade.value: 0 for grade in Grade}
            for record in members:
                counts[GradingService.grade_of(IngestService.improvement_level(record)).value] += 1
            population = len(members)
            distributions.append(
                GradeDistribution(
                    quarter=quarter,
                    group_by=group_by,
                    group=label,
                    population=population,
                    counts=counts,
                    proportions={grade: count / population for grade, count in counts.items()},
                )
            )
        return distributions

    @staticmethod
    def grouped_progression(
        cohort: Cohort,
        from_quarter: int,
        to_quarter: int,
        group_by: GroupBy,
        weighted: bool = False,
        divisor: float = PROGRESSION_DIVISOR,
    ) -> Dict[str, ProgressionScore]:
        """
        Progression score of every sex or state group, computed on that group alone.

        A group without children assessed in both quarters is left out with a warning.
        """
        scores, _ = GradingService.grouped_progression_with_omissions(
            cohort, from_quarter, to_quarter, group_by, weighted, divisor
        )
        return scores

    @staticmethod
    def grouped_progression_with_omissions(
        cohort: Cohort,
        from_quarter: int,
        to_quarter: int,
        group_by: GroupBy,
        weighted: bool = False,
        divisor: float = PROGRESSION_DIVISOR,
    ) -> Tuple[Dict[str, ProgressionScore], List[str]]:
        if group_by == GroupBy.OVERALL:
            raise ValueError("grouped progression needs group_by sex or state")

        key = GradingService.group_key(group_by)
        scores: Dict[str, ProgressionScore] = {}
        omitted: List[str] = []
        for label in GradingService.group_labels(group_by):
            group = IngestService.restrict(cohort, lambda record, label=label: key(record) == label)
            try:
                matrix = ProgressionService.progression_matrix(group, from_quarter, to_quarter)
            except EmptyDataError as e:
                logger.warning(f"{group_by.value} group '{label}' omitted: {e}")
                omitted.append(label)
                continue
            scores[label] = ProgressionService.progression_score(matrix, weighted=weighted, divisor=divisor)
        return scores, omitted

    @staticmethod
    def grade_a_consistency(cohort: Cohort, from_quarter: int, to_quarter: int) -> GradeConsistency:
        """
        Grade A count of `to_quarter` next to the top-level column count of the
        `from_quarter` -> `to_quarter` cross-tab. The two agree whenever every
        child of `to_quarter` was also assessed in `from_quarter`.
        """
        overall = GradingService.grade_distribution(cohort, to_quarter)[0]
        matrix = ProgressionService.progression_matrix(cohort, from_quarter, to_quarter)
        counts = matrix.counts
        top = counts.col_sums[counts.col_labels.index(MAX_LEVEL)] if MAX_LEVEL in counts.col_labels else 0
        return GradeConsistency(
            from_quarter=from_quarter,
            to_quarter=to_quarter,
            population=overall.population,
            grade_a_count=overall.counts[GradingService.grade_of(MAX_LEVEL).value],
            top_column_count=top,
        )
