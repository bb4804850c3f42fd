from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.config import GRADE_MAX, GRADE_MIN, QUARTERS
from app.services.Report.Report_Schema import OutputFormat


class RunConfig(BaseModel):
    """
    Everything one command run needs. Built from environment defaults, then an
    optional JSON file (`--config`), then command-line flags, later sources winning.
    """

    inputs: Dict[int, Path] = {}
    combined: Optional[Path] = None
    grade_min: int = GRADE_MIN
    grade_max: int = GRADE_MAX
    include_positive: bool = False
    weighted: bool = False
    out: Optional[Path] = None
    formats: List[OutputFormat] = Field(default_factory=lambda: list(OutputFormat))

    @field_validator("inputs")
    @classmethod
    def _known_quarters(cls, value: Dict[int, Path]) -> Dict[int, Path]:
        unknown = sorted(q for q in value if q not in QUARTERS)
        if unknown:
            raise ValueError(f"unknown quarters {unknown}, expected {list(QUARTERS)}")
        return dict(sorted(value.items()))

    @model_validator(mode="after")
    def _check_run(self) -> "RunConfig":
        if not self.inputs and self.combined is None:
            raise ValueError("at least one quarter input is required")
        if self.inputs and self.combined is not None:
            raise ValueError("give per-quarter inputs or a combined file, not both")
        if self.grade_min > self.grade_max:
            raise ValueError(f"grade range {self.grade_min}-{self.grade_max} is empty")
        if self.out is not None:
            out = self.out.resolve()
            for source in self.sources:
                source = source.resolve()
                if out == source or out == source.parent:
                    raise ValueError(f"output {self.out} would overwrite or mix with input {source}")
        return self

    @property
    def sources(self) -> List[Path]:
        return [self.combined] if self.combined is not None else list(self.inputs.values())

    @property
    def grade_range(self) -> Tuple[int, int]:
        return self.grade_min, self.grade_max
