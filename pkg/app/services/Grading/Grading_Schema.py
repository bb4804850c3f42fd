from enum import Enum
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, model_validator

from app.services.Progression.Progression_Schema import ProgressionScore

PROPORTION_TOLERANCE = 1e-12


class Grade(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"


class GroupBy(str, Enum):
    OVERALL = "overall"
    SEX = "sex"
    STATE = "state"


OVERALL_GROUP = "All"


class GradeDistribution(BaseModel):
    """Share of one quarter's children at each grade, for one group."""

    model_config = ConfigDict(frozen=True)

    quarter: int
    group_by: GroupBy
    group: str
    population: int
    counts: Dict[str, int]
    proportions: Dict[str, float]

    @model_validator(mode="after")
    def _check_distribution(self) -> "GradeDistribution":
        if self.population <= 0:
            raise ValueError("a grade distribution needs a positive population")
        if sum(self.counts.values()) != self.population:
            raise ValueError("grade counts must add up to the population")
        if abs(sum(self.proportions.values()) - 1.0) > PROPORTION_TOLERANCE:
            raise ValueError("grade proportions must sum to 1")
        return self

    def proportion(self, grade: Grade) -> float:
        return self.proportions[grade.value]


class GroupedProgression(BaseModel):
    from_quarter: int
    to_quarter: int
    group_by: GroupBy
    scores: Dict[str, ProgressionScore]
    omitted: List[str] = []


class GradeConsistency(BaseModel):
    """Grade A share of a quarter two ways: from grades, and from the top column of a transition cross-tab."""

    from_quarter: int
    to_quarter: int
    population: int
    grade_a_count: int
    top_column_count: int

    @property
    def grade_a_proportion(self) -> float:
        return self.grade_a_count / self.population
