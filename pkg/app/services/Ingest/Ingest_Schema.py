import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, PrivateAttr, ValidationInfo, field_validator, model_validator

from app.core.config import GRADE_MAX, GRADE_MIN, QUARTERS, SEX_ALIASES, STATE_ALIASES


class State(str, Enum):
    JAMMU_KASHMIR = "Jammu & Kashmir"
    JHARKHAND = "Jharkhand"
    MANIPUR = "Manipur"
    WEST_BENGAL = "West Bengal"


class Sex(str, Enum):
    MALE = "Male"
    FEMALE = "Female"


def _strip(value: Any) -> Any:
    return value.strip() if isinstance(value, str) else value


class Improvements(BaseModel):
    """Binary improvement flags for the four assessed subjects."""

    model_config = ConfigDict(frozen=True)

    lang1_oral: int
    lang2_oral: int
    math_oral: int
    writing: int

    @field_validator("lang1_oral", "lang2_oral", "math_oral", "writing", mode="before")
    @classmethod
    def _binary(cls, value: Any) -> int:
        text = str(_strip(value))
        if text not in ("0", "1"):
            raise ValueError("non-binary improvement flag")
        return int(text)

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.lang1_oral, self.lang2_oral, self.math_oral, self.writing)


class AssessmentRecord(BaseModel):
    """One child in one quarter."""

    model_config = ConfigDict(frozen=True)

    child_id: str
    center: str
    state: State
    sex: Sex
    age_appropriate_class: int
    compatible_class: int
    attendance: Union[int, float]
    improvements: Improvements
    quarter: int

    @field_validator("child_id", "center", mode="before")
    @classmethod
    def _text(cls, value: Any) -> Any:
        return _strip(value)

    @field_validator("child_id")
    @classmethod
    def _child_id_present(cls, value: str) -> str:
        if not value:
            raise ValueError("empty child_id")
        return value

    @field_validator("state", mode="before")
    @classmethod
    def _state_alias(cls, value: Any) -> Any:
        if isinstance(value, State):
            return value
        canonical = STATE_ALIASES.get(str(_strip(value)).lower())
        if canonical is None:
            raise ValueError(f"unknown state '{value}'")
        return canonical

    @field_validator("sex", mode="before")
    @classmethod
    def _sex_alias(cls, value: Any) -> Any:
        if isinstance(value, Sex):
            return value
        canonical = SEX_ALIASES.get(str(_strip(value)).lower())
        if canonical is None:
            raise ValueError(f"unknown sex '{value}'")
        return canonical

    @field_validator("age_appropriate_class", "compatible_class", "quarter", mode="before")
    @classmethod
    def _integer_text(cls, value: Any) -> Any:
        return _strip(value)

    @field_validator("age_appropriate_class", "compatible_class")
    @classmethod
    def _class_in_range(cls, value: int, info: ValidationInfo) -> int:
        low, high = (info.context or {}).get("grade_range", (GRADE_MIN, GRADE_MAX))
        if not low <= value <= high:
            raise ValueError(f"class {value} out of range {low}-{high}")
        return value

    @field_validator("attendance", mode="before")
    @classmethod
    def _attendance(cls, value: Any) -> Union[int, float]:
        if isinstance(value, str):
            text = value.strip()
            try:
                value = int(text)
            except ValueError:
                try:
                    value = float(text)
                except ValueError:
                    raise ValueError(f"attendance '{text}' is not a number")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"attendance must be a number, got {value!r}")
        if not math.isfinite(value):
            raise ValueError(f"attendance must be a finite number, got {value}")
        if value < 0:
            raise ValueError(f"attendance must be a non-negative number, got {value}")
        return value

    @field_validator("quarter")
    @classmethod
    def _known_quarter(cls, value: int) -> int:
        if value not in QUARTERS:
            raise ValueError(f"quarter {value} not in {QUARTERS[0]}-{QUARTERS[-1]}")
        return value


class RowRejection(BaseModel):
    row: int
    reason: str
    child_id: Optional[str] = None
    quarter: Optional[int] = None


class LoadReport(BaseModel):
    """Accepted records and per-row rejections from one CSV file."""

    source: str
    quarter: Optional[int] = None
    records: List[AssessmentRecord] = []
    rejections: List[RowRejection] = []
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return not self.rejections


class DuplicateRecord(BaseModel):
    child_id: str
    quarter: int


class QuarterDemography(BaseModel):
    quarter: int
    records: int
    by_state: Dict[str, int]
    by_sex: Dict[str, int]


class DemographicSummary(BaseModel):
    """Record counts per quarter and child counts by first-seen demographics."""

    total_records: int
    children: int
    by_state: Dict[str, int]
    by_sex: Dict[str, int]
    quarters: List[QuarterDemography] = []


class Cohort(BaseModel):
    """Validated records, at most one per (child_id, quarter)."""

    model_config = ConfigDict(frozen=True)

    records: Tuple[AssessmentRecord, ...]
    summary: DemographicSummary
    duplicates: Tuple[DuplicateRecord, ...] = ()

    _index: Dict[Tuple[str, int], AssessmentRecord] = PrivateAttr(default_factory=dict)
    _by_quarter: Dict[int, Tuple[AssessmentRecord, ...]] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def _check_records(self) -> "Cohort":
        seen = set()
        for record in self.records:
            key = (record.child_id, record.quarter)
            if key in seen:
                raise ValueError(f"duplicate record for child {record.child_id} in quarter {record.quarter}")
            seen.add(key)
        if self.summary.total_records != len(self.records):
            raise ValueError("demographic summary does not match the records")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._index = {(r.child_id, r.quarter): r for r in self.records}
        grouped: Dict[int, List[AssessmentRecord]] = {}
        for record in self.records:
            grouped.setdefault(record.quarter, []).append(record)
        self._by_quarter = {
            quarter: tuple(sorted(rows, key=lambda r: r.child_id)) for quarter, rows in grouped.items()
        }

    @property
    def quarters(self) -> Tuple[int, ...]:
        return tuple(sorted(self._by_quarter))

    def has_quarter(self, quarter: int) -> bool:
        return quarter in self._by_quarter

    def for_quarter(self, quarter: int) -> Tuple[AssessmentRecord, ...]:
        return self._by_quarter.get(quarter, ())

    def get(self, child_id: str, quarter: int) -> Optional[AssessmentRecord]:
        return self._index.get((child_id, quarter))

    @property
    def child_ids(self) -> Tuple[str, ...]:
        return tuple(sorted({r.child_id for r in self.records}))

    def __len__(self) -> int:
        return len(self.records)


class QuarterCoverage(BaseModel):
    from_quarter: int
    to_quarter: int
    both: int
    only_from: int
    only_to: int


class CoverageReport(BaseModel):
    children_per_quarter: Dict[int, int]
    pairs: List[QuarterCoverage] = []
