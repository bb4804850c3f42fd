from enum import Enum
from typing import Dict, List, Optional, Set

from pydantic import BaseModel, Field

from app.services.Grading.Grading_Schema import GradeDistribution, GroupedProgression
from app.services.Ingest.Ingest_Schema import CoverageReport, DemographicSummary
from app.services.LagScore.LagScore_Schema import LagScoreTable
from app.services.Progression.Progression_Schema import ProgressionResult, ProgressionSteps


class OutputFormat(str, Enum):
    MARKDOWN = "md"
    CSV = "csv"
    SVG = "svg"


class Section(str, Enum):
    DEMOGRAPHY = "demography"
    LAG_SCORES = "lag_scores"
    PROGRESSION = "progression"
    GRADES = "grades"
    GROUPED_SCORES = "grouped_scores"


def _all_formats() -> Dict[Section, Set[OutputFormat]]:
    return {section: set(OutputFormat) for section in Section}


class ProgressionEntry(BaseModel):
    result: ProgressionResult
    steps: ProgressionSteps


class ReportBundle(BaseModel):
    """
    Computed results to render. Sections are rendered in `Section` order and
    only from these values; nothing is recomputed while rendering.
    """

    demography: Optional[DemographicSummary] = None
    coverage: Optional[CoverageReport] = None
    lag_scores: List[LagScoreTable] = []
    progressions: List[ProgressionEntry] = []
    grade_distributions: List[GradeDistribution] = []
    grouped_scores: List[GroupedProgression] = []
    formats: Dict[Section, Set[OutputFormat]] = Field(default_factory=_all_formats)

    def wants(self, section: Section, fmt: OutputFormat) -> bool:
        return fmt in self.formats.get(section, set())


class ReportManifest(BaseModel):
    """Relative path -> sha-256 of every rendered file (manifest.json itself excluded)."""

    root: str
    files: Dict[str, str] = {}
