from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from app.services.Tabulate.Tabulate_Schema import ContingencyTable


class LagScoreTable(BaseModel):
    """
    Improvement score per (class lag, improvement level) for one quarter.

    The score of a level is the share of children with the same class lag at
    or below that level, with level 0 pinned to 0.
    """

    model_config = ConfigDict(frozen=True)

    quarter: int
    lags: Tuple[int, ...]
    levels: Tuple[int, ...]
    scores: Tuple[Tuple[float, ...], ...]
    counts: ContingencyTable
    excluded_records: int = 0
    exploratory_lags: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def _check_scores(self) -> "LagScoreTable":
        for lag, row in zip(self.lags, self.scores):
            if row[0] != 0.0:
                raise ValueError(f"lag {lag}: level {self.levels[0]} score must be 0")
            if row[-1] != 1.0:
                raise ValueError(f"lag {lag}: level {self.levels[-1]} score must be 1")
            if any(later < earlier for earlier, later in zip(row, row[1:])):
                raise ValueError(f"lag {lag}: scores must not decrease with the level")
        return self

    def score(self, lag: int, level: int) -> float:
        return self.scores[self.lags.index(lag)][self.levels.index(level)]

    def row(self, lag: int) -> Tuple[float, ...]:
        return self.scores[self.lags.index(lag)]


class StudentScore(BaseModel):
    child_id: str
    quarter: int
    class_lag: int
    level: int
    score: Optional[float] = None
    reason: Optional[str] = None

    @property
    def scorable(self) -> bool:
        return self.score is not None
