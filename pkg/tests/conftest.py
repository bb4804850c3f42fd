"""
Shared fixtures. Every cohort with published numbers is rebuilt child by child
from the published count tables, so each expected value below is recomputed by
the services rather than copied into them.
"""

from pathlib import Path

import pytest

from app.core.config import IMPROVEMENT_LEVELS
from app.services.CohortGen.CohortGen import CohortGenService
from app.services.Ingest.Ingest import FLAG_FIELDS, IngestService
from app.services.Ingest.Ingest_Schema import AssessmentRecord, Cohort, Sex, State
from app.services.Tabulate.Tabulate_Schema import ContingencyTable
from published_tables import LAG_COUNTS, Q1_Q2_COUNTS, Q2_Q3_COUNTS, SEX_COUNTS, STATE_COUNTS, group_cohort, merge


@pytest.fixture(scope="session")
def field_cohort() -> Cohort:
    """4000 children over three quarters matching every published cross-tab and marginal."""
    lags = sorted(LAG_COUNTS)
    lag_table = ContingencyTable.from_counts(lags, IMPROVEMENT_LEVELS, [LAG_COUNTS[lag] for lag in lags])
    q1_q2 = ContingencyTable.from_counts(IMPROVEMENT_LEVELS, (1, 2, 3, 4), Q1_Q2_COUNTS)
    q2_q3 = ContingencyTable.from_counts((1, 2, 3, 4), (1, 2, 3, 4), Q2_Q3_COUNTS)
    return CohortGenService.reconstruct(
        [q1_q2, q2_q3], lag_table=lag_table, state_counts=STATE_COUNTS, sex_counts=SEX_COUNTS, prefix="P"
    )


@pytest.fixture(scope="session")
def sex_cohort() -> Cohort:
    return merge(group_cohort("Female", "F"), group_cohort("Male", "M"))


@pytest.fixture(scope="session")
def state_cohort() -> Cohort:
    return merge(
        group_cohort("Jammu & Kashmir", "JK"),
        group_cohort("Jharkhand", "JH"),
        group_cohort("Manipur", "MN"),
        group_cohort("West Bengal", "WB"),
    )


@pytest.fixture(scope="session")
def field_data_dir(tmp_path_factory, field_cohort: Cohort) -> Path:
    """quarter1.csv .. quarter3.csv of the field cohort."""
    root = tmp_path_factory.mktemp("field")
    for quarter in field_cohort.quarters:
        IngestService.dump_records(field_cohort.for_quarter(quarter), root / f"quarter{quarter}.csv")
    return root


@pytest.fixture
def make_record():
    """Factory for single records: a child at `level` with class lag `lag`."""

    def factory(
        child_id: str = "C1",
        quarter: int = 1,
        level: int = 0,
        lag: int = 0,
        state: State = State.WEST_BENGAL,
        sex: Sex = Sex.FEMALE,
        age_class: int = 8,
    ) -> AssessmentRecord:
        flags = [1 if i < level else 0 for i in range(len(FLAG_FIELDS))]
        return AssessmentRecord(
            child_id=child_id,
            center="WB-01",
            state=state,
            sex=sex,
            age_appropriate_class=age_class,
            compatible_class=age_class + lag,
            attendance=10,
            improvements=dict(zip(FLAG_FIELDS, flags)),
            quarter=quarter,
        )

    return factory


HEADER = (
    "child_id,center,state,sex,age_appropriate_class,compatible_class,attendance,"
    "imp_lang1,imp_lang2,imp_math,imp_writing"
)


@pytest.fixture
def write_csv(tmp_path: Path):
    """Write CSV text (header added unless given) and return its path."""

    def writer(name: str, *rows: str, header: str = HEADER) -> Path:
        path = tmp_path / name
        path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
        return path

    return writer
