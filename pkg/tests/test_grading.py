import pytest
from pydantic import ValidationError

from app.core.exceptions import EmptyDataError
from app.services.Grading.Grading import GradingService, _level_grades
from app.services.Grading.Grading_Schema import Grade, GradeDistribution, GroupBy
from app.services.Ingest.Ingest import IngestService
from published_tables import GROUP_SCORES


@pytest.mark.parametrize("level, grade", [(4, Grade.A), (3, Grade.B), (2, Grade.C), (1, Grade.D), (0, Grade.E)])
def test_grade_of_level(level, grade):
    assert GradingService.grade_of(level) == grade


def test_grade_of_unknown_level():
    with pytest.raises(ValueError):
        GradingService.grade_of(5)


def test_grade_mapping_must_be_bijective_and_ordered():
    assert _level_grades({"A": 4, "B": 3, "C": 2, "D": 1, "E": 0})[4] == Grade.A
    with pytest.raises(ValueError):
        _level_grades({"A": 4, "B": 4, "C": 2, "D": 1, "E": 0})
    with pytest.raises(ValueError):
        _level_grades({"A": 0, "B": 1, "C": 2, "D": 3, "E": 4})


@pytest.mark.parametrize("quarter, grade_a", [(1, 0.26675), (2, 0.60725), (3, 0.701)])
def test_overall_grade_a_share(field_cohort, quarter, grade_a):
    (overall,) = GradingService.grade_distribution(field_cohort, quarter)

    assert overall.population == 4000
    assert overall.group == "All"
    assert overall.proportion(Grade.A) == pytest.approx(grade_a)
    assert sum(overall.proportions.values()) == pytest.approx(1.0, abs=1e-12)


def test_no_grade_e_after_the_first_quarter(field_cohort):
    for quarter in (2, 3):
        (overall,) = GradingService.grade_distribution(field_cohort, quarter)
        assert overall.counts["E"] == 0


def test_grade_a_matches_the_top_column(field_cohort):
    check = GradingService.grade_a_consistency(field_cohort, 1, 2)

    assert check.grade_a_count == check.top_column_count == 2429
    assert check.grade_a_proportion == pytest.approx(0.60725)

    later = GradingService.grade_a_consistency(field_cohort, 2, 3)
    assert later.grade_a_count == later.top_column_count == 2804


def test_distribution_by_state(state_cohort):
    by_state = {d.group: d for d in GradingService.grade_distribution(state_cohort, 2, GroupBy.STATE)}

    assert list(by_state) == sorted(by_state)
    assert by_state["Jammu & Kashmir"].population == 280
    assert by_state["Jammu & Kashmir"].proportion(Grade.A) == pytest.approx(0.5821, abs=0.0005)
    assert by_state["West Bengal"].proportion(Grade.A) == pytest.approx(0.8139, abs=0.0005)

    third = {d.group: d for d in GradingService.grade_distribution(state_cohort, 3, GroupBy.STATE)}
    assert third["Jammu & Kashmir"].proportion(Grade.A) == pytest.approx(0.9571, abs=0.0005)
    first = {d.group: d for d in GradingService.grade_distribution(state_cohort, 1, GroupBy.STATE)}
    assert first["West Bengal"].proportion(Grade.A) == pytest.approx(0.0889, abs=0.0005)


def test_empty_groups_are_omitted(sex_cohort):
    labels = [d.group for d in GradingService.grade_distribution(sex_cohort, 1, GroupBy.STATE)]

    assert labels == ["West Bengal"]


def test_empty_quarter_raises(sex_cohort):
    with pytest.raises(EmptyDataError):
        GradingService.grade_distribution(IngestService.restrict(sex_cohort, lambda r: r.quarter == 1), 2)


def test_distribution_invariants():
    with pytest.raises(ValidationError):
        GradeDistribution(
            quarter=1,
            group_by=GroupBy.OVERALL,
            group="All",
            population=2,
            counts={"A": 1, "B": 0, "C": 0, "D": 0, "E": 0},
            proportions={"A": 1.0, "B": 0.0, "C": 0.0, "D": 0.0, "E": 0.0},
        )


@pytest.mark.parametrize("label", ["Female", "Male"])
def test_scores_by_sex(sex_cohort, label):
    first = GradingService.grouped_progression(sex_cohort, 1, 2, GroupBy.SEX)
    second = GradingService.grouped_progression(sex_cohort, 2, 3, GroupBy.SEX)

    assert first[label].s_star == pytest.approx(GROUP_SCORES[label][0], abs=0.001)
    assert second[label].s_star == pytest.approx(GROUP_SCORES[label][1], abs=0.001)


@pytest.mark.parametrize("label", ["Jammu & Kashmir", "Jharkhand", "Manipur", "West Bengal"])
def test_scores_by_state(state_cohort, label):
    first = GradingService.grouped_progression(state_cohort, 1, 2, GroupBy.STATE)
    second = GradingService.grouped_progression(state_cohort, 2, 3, GroupBy.STATE)

    assert first[label].s_star == pytest.approx(GROUP_SCORES[label][0], abs=0.001)
    assert second[label].s_star == pytest.approx(GROUP_SCORES[label][1], abs=0.001)


def test_grouped_scores_report_omitted_groups(sex_cohort):
    scores, omitted = GradingService.grouped_progression_with_omissions(sex_cohort, 1, 2, GroupBy.STATE)

    assert list(scores) == ["West Bengal"]
    assert omitted == ["Jammu & Kashmir", "Jharkhand", "Manipur"]


def test_grouped_scores_need_a_grouping(sex_cohort):
    with pytest.raises(ValueError):
        GradingService.grouped_progression(sex_cohort, 1, 2, GroupBy.OVERALL)
