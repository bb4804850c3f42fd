import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.exceptions import EmptyDataError, QuarterMismatchError
from app.services.CohortGen.CohortGen import CohortGenService
from app.services.CohortGen.Oracle import OracleService
from app.services.Ingest.Ingest import IngestService
from app.services.LagScore.LagScore import LagScoreService
from app.services.Report.Formatting import fmt_proportion
from published_tables import LAG_COUNTS, LAG_SCORES


def test_quarter_one_score_table(field_cohort):
    table = LagScoreService.lag_score_table(field_cohort, 1)

    assert table.lags == tuple(range(-7, 1))
    assert table.counts.total == 3969
    assert table.excluded_records == sum(LAG_COUNTS[1])
    assert table.exploratory_lags == ()
    for lag, expected in LAG_SCORES.items():
        assert tuple(fmt_proportion(score) for score in table.row(lag)) == expected
        assert table.counts.row(lag) == LAG_COUNTS[lag]


def test_brute_force_scores_match_the_published_table(field_cohort):
    oracle = OracleService.oracle_lag_scores(field_cohort, 1)

    for lag, expected in LAG_SCORES.items():
        assert tuple(fmt_proportion(score) for score in oracle.row(lag)) == expected


def test_score_is_the_cumulative_share(field_cohort):
    table = LagScoreService.lag_score_table(field_cohort, 1)

    assert table.score(-2, 1) == pytest.approx(381 / 934)
    assert table.score(-5, 2) == pytest.approx(117 / 360)
    assert table.score(0, 0) == 0.0
    assert table.score(-7, 4) == 1.0


def test_positive_lag_rows_are_exploratory(field_cohort):
    table = LagScoreService.lag_score_table(field_cohort, 1, include_positive=True)

    assert table.lags[-1] == 1
    assert table.exploratory_lags == (1,)
    assert table.excluded_records == 0
    assert table.counts.total == 4000


def test_single_lag_single_level(make_record):
    cohort = IngestService.build_cohort([make_record(f"C{i}", level=2, lag=-1) for i in range(3)])
    table = LagScoreService.lag_score_table(cohort, 1)

    assert table.lags == (-1,)
    assert table.row(-1) == (0.0, 0.0, 1.0, 1.0, 1.0)


def test_empty_quarter_raises(make_record):
    cohort = IngestService.build_cohort([make_record("C1", quarter=1)])

    with pytest.raises(EmptyDataError):
        LagScoreService.lag_score_table(cohort, 2)

    ahead = IngestService.build_cohort([make_record("C1", lag=1)])
    with pytest.raises(EmptyDataError):
        LagScoreService.lag_score_table(ahead, 1)


def test_student_lookup(field_cohort):
    table = LagScoreService.lag_score_table(field_cohort, 1)
    record = next(r for r in field_cohort.for_quarter(1) if IngestService.class_lag(r) == -2)

    result = LagScoreService.score_student(table, record)
    assert result.scorable
    assert result.score == table.score(-2, IngestService.improvement_level(record))


def test_student_without_a_row_is_unscorable(field_cohort, make_record):
    table = LagScoreService.lag_score_table(field_cohort, 1)

    ahead = next(r for r in field_cohort.for_quarter(1) if IngestService.class_lag(r) == 1)
    result = LagScoreService.score_student(table, ahead)
    assert not result.scorable
    assert "positive class lag" in result.reason

    far_behind = make_record("Z1", lag=-8, age_class=9)
    result = LagScoreService.score_student(table, far_behind)
    assert result.score is None
    assert result.reason == "no children with class lag -8"


def test_student_from_another_quarter_is_refused(field_cohort):
    table = LagScoreService.lag_score_table(field_cohort, 1)

    with pytest.raises(QuarterMismatchError):
        LagScoreService.score_student(table, field_cohort.for_quarter(2)[0])


@given(seed=st.integers(0, 2**32 - 1), population=st.integers(1, 40))
@settings(max_examples=100, deadline=None)
def test_matches_the_brute_force_scores(seed, population):
    cohort = CohortGenService.generate(CohortGenService.default_spec(seed, population))

    for quarter in cohort.quarters:
        table = LagScoreService.lag_score_table(cohort, quarter)
        oracle = OracleService.oracle_lag_scores(cohort, quarter)
        assert table.lags == oracle.lags
        assert table.counts == oracle.counts
        assert table.scores == oracle.scores


@given(seed=st.integers(0, 2**32 - 1), population=st.integers(1, 40))
@settings(max_examples=50, deadline=None)
def test_rows_rise_from_zero_to_one(seed, population):
    cohort = CohortGenService.generate(CohortGenService.default_spec(seed, population))
    table = LagScoreService.lag_score_table(cohort, 1)

    for row in table.scores:
        assert row[0] == 0.0 and row[-1] == 1.0
        assert list(row) == sorted(row)
