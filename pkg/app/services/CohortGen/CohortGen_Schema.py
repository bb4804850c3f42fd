from typing import Dict, List, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.config import IMPROVEMENT_LEVELS, QUARTERS
from app.services.Ingest.Ingest_Schema import Sex, State

PROBABILITY_TOLERANCE = 1e-9
LAG_RANGE = (-7, 1)


def _check_probabilities(values: List[float], what: str) -> None:
    if any(p < 0 for p in values):
        raise ValueError(f"{what} has a negative probability")
    if abs(sum(values) - 1.0) > PROBABILITY_TOLERANCE:
        raise ValueError(f"{what} sums to {sum(values)!r}, not 1")


class GenSpec(BaseModel):
    """
    Recipe for a synthetic cohort.

    `kernels[t][i][j]` is the probability that a child at level i in quarter
    t+1 is at level j in quarter t+2; there is one kernel per quarter after the first.
    """

    seed: int = 0
    population: int = Field(ge=0)
    quarters: int = Field(default=len(QUARTERS), ge=1, le=len(QUARTERS))
    lag_weights: Dict[int, float]
    initial_levels: List[float]
    kernels: List[List[List[float]]]
    state_weights: Dict[State, float]
    sex_weights: Dict[Sex, float]
    id_prefix: str = "S"

    @field_validator("lag_weights")
    @classmethod
    def _lags(cls, value: Dict[int, float]) -> Dict[int, float]:
        low, high = LAG_RANGE
        outside = [lag for lag in value if not low <= lag <= high]
        if outside:
            raise ValueError(f"class lags {outside} outside {low}..{high}")
        _check_probabilities(list(value.values()), "lag distribution")
        return value

    @field_validator("initial_levels")
    @classmethod
    def _initial(cls, value: List[float]) -> List[float]:
        if len(value) != len(IMPROVEMENT_LEVELS):
            raise ValueError(f"initial level distribution needs {len(IMPROVEMENT_LEVELS)} entries")
        _check_probabilities(value, "initial level distribution")
        return value

    @field_validator("kernels")
    @classmethod
    def _kernels(cls, value: List[List[List[float]]]) -> List[List[List[float]]]:
        size = len(IMPROVEMENT_LEVELS)
        for t, kernel in enumerate(value):
            if len(kernel) != size or any(len(row) != size for row in kernel):
                raise ValueError(f"kernel {t} must be {size}x{size}")
            for i, row in enumerate(kernel):
                _check_probabilities(row, f"kernel {t} row {i}")
        return value

    @field_validator("state_weights", "sex_weights")
    @classmethod
    def _mixture(cls, value: Dict) -> Dict:
        _check_probabilities(list(value.values()), "mixture weights")
        return value

    @model_validator(mode="after")
    def _kernel_count(self) -> "GenSpec":
        if len(self.kernels) != self.quarters - 1:
            raise ValueError(f"{self.quarters} quarters need {self.quarters - 1} kernels, got {len(self.kernels)}")
        return self

    @property
    def sorted_lags(self) -> Tuple[int, ...]:
        return tuple(sorted(self.lag_weights))
