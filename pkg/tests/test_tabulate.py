import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from app.core.config import IMPROVEMENT_LEVELS
from app.services.Ingest.Ingest import IngestService
from app.services.Tabulate.Tabulate import TabulateService
from app.services.Tabulate.Tabulate_Schema import ContingencyTable

pairs = st.lists(st.tuples(st.integers(-7, 1), st.integers(0, 4)), max_size=200)


def first(item):
    return item[0]


def second(item):
    return item[1]


def test_labels_follow_the_data_without_explicit_levels():
    table = TabulateService.tabulate([(-2, 1), (-2, 3), (0, 3)], first, second)

    assert table.row_labels == (-2, 0)
    assert table.col_labels == (1, 3)
    assert table.counts == ((1, 1), (0, 1))
    assert table.row_sums == (2, 1)
    assert table.col_sums == (1, 2)
    assert table.total == 3


def test_explicit_levels_zero_pad_and_drop_outsiders():
    table = TabulateService.tabulate([(0, 1), (0, 9)], first, second, col_levels=IMPROVEMENT_LEVELS)

    assert table.col_labels == IMPROVEMENT_LEVELS
    assert table.row(0) == (0, 1, 0, 0, 0)
    assert table.total == 1


def test_empty_input_gives_an_all_zero_table():
    table = TabulateService.tabulate([], first, second, row_levels=(0, 1), col_levels=(0, 1))

    assert table.empty
    assert table.counts == ((0, 0), (0, 0))
    assert table.total == 0


def test_crosstab_of_one_quarter(field_cohort):
    table = TabulateService.crosstab(
        field_cohort,
        IngestService.class_lag,
        IngestService.improvement_level,
        quarter=1,
        col_levels=IMPROVEMENT_LEVELS,
    )

    assert table.total == 4000
    assert table.row(-2) == (342, 39, 156, 202, 195)
    assert table.row_sums[table.row_labels.index(-4)] == 674


def test_crosstab_with_a_filter(field_cohort):
    table = TabulateService.crosstab(
        field_cohort,
        IngestService.class_lag,
        IngestService.improvement_level,
        record_filter=lambda r: IngestService.class_lag(r) <= 0,
        quarter=1,
    )

    assert table.total == 3969
    assert 1 not in table.row_labels


def test_row_normalize_excludes_empty_rows():
    table = ContingencyTable.from_counts((0, 1, 2), (0, 1), ((1, 3), (0, 0), (2, 2)))
    rates = TabulateService.row_normalize(table)

    assert rates.row_labels == (0, 2)
    assert rates.excluded_rows == (1,)
    assert rates.row(0) == (0.25, 0.75)
    assert rates.column_sums() == (0.75, 1.25)


def test_inconsistent_marginals_are_refused():
    with pytest.raises(ValidationError):
        ContingencyTable(
            row_labels=(0,), col_labels=(0,), counts=((1,),), row_sums=(2,), col_sums=(1,), total=1
        )
    with pytest.raises(ValidationError):
        ContingencyTable.from_counts((1, 0), (0,), ((1,), (1,)))


def test_frame_view():
    table = ContingencyTable.from_counts((0, 1), (3, 4), ((1, 2), (3, 4)))
    frame = table.to_frame()

    assert list(frame.index) == [0, 1]
    assert list(frame.columns) == [3, 4]
    assert int(frame.loc[1, 4]) == 4


@given(pairs)
@settings(max_examples=100)
def test_marginals_add_up(items):
    table = TabulateService.tabulate(items, first, second, col_levels=IMPROVEMENT_LEVELS)

    assert table.total == len(items)
    assert sum(table.row_sums) == sum(table.col_sums) == len(items)
    for label, total in zip(table.row_labels, table.row_sums):
        assert total == sum(1 for item in items if item[0] == label)


@given(pairs)
@settings(max_examples=100)
def test_normalized_rows_sum_to_one(items):
    rates = TabulateService.row_normalize(TabulateService.tabulate(items, first, second))

    for row in rates.proportions:
        assert sum(row) == pytest.approx(1.0, abs=1e-12)
        assert all(0.0 <= p <= 1.0 for p in row)


@given(pairs)
@settings(max_examples=100)
def test_rates_times_row_sums_recover_the_counts(items):
    table = TabulateService.tabulate(items, first, second)
    rates = TabulateService.row_normalize(table)

    for label, row, total in zip(rates.row_labels, rates.proportions, rates.row_sums):
        assert [round(p * total) for p in row] == list(table.row(label))
