import pytest
from pydantic import ValidationError

from app.core.exceptions import SchemaError
from app.services.Ingest.Ingest import IngestService
from app.services.Ingest.Ingest_Schema import Sex, State


def test_load_quarter_accepts_valid_rows_and_aliases(write_csv):
    path = write_csv(
        "quarter1.csv",
        "A1,WB-01,wb,f,8,6,12,1,0,1,0",
        "A2,JK-02,Jammu and Kashmir,Boy,9,9,3.5,0,0,0,0",
    )
    report = IngestService.load_quarter(path, 1)

    assert report.ok
    assert [r.child_id for r in report.records] == ["A1", "A2"]
    first, second = report.records
    assert first.state == State.WEST_BENGAL and first.sex == Sex.FEMALE
    assert second.state == State.JAMMU_KASHMIR and second.sex == Sex.MALE
    assert second.attendance == 3.5
    assert IngestService.improvement_level(first) == 2
    assert IngestService.class_lag(first) == -2
    assert all(r.quarter == 1 for r in report.records)


def test_non_binary_flag_is_rejected_with_row_number(write_csv):
    path = write_csv(
        "quarter1.csv",
        "A1,WB-01,West Bengal,Female,8,8,1,1,0,0,0",
        "A2,WB-01,West Bengal,Female,8,8,1,2,0,0,0",
    )
    report = IngestService.load_quarter(path, 1)

    assert len(report.records) == 1
    assert not report.ok
    (rejection,) = report.rejections
    assert rejection.row == 3
    assert rejection.child_id == "A2"
    assert "non-binary improvement flag" in rejection.reason


@pytest.mark.parametrize(
    "row, reason",
    [
        (",WB-01,West Bengal,Female,8,8,1,0,0,0,0", "empty child_id"),
        ("A1,WB-01,Kerala,Female,8,8,1,0,0,0,0", "unknown state"),
        ("A1,WB-01,West Bengal,X,8,8,1,0,0,0,0", "unknown sex"),
        ("A1,WB-01,West Bengal,Female,8,13,1,0,0,0,0", "out of range"),
        ("A1,WB-01,West Bengal,Female,8,8,-1,0,0,0,0", "non-negative"),
        ("A1,WB-01,West Bengal,Female,8,8,lots,0,0,0,0", "not a number"),
        ("A1,WB-01,West Bengal,Female,8,8,nan,0,0,0,0", "finite"),
        ("A1,WB-01,West Bengal,Female,8,8,inf,0,0,0,0", "finite"),
    ],
)
def test_invalid_fields_become_rejections(write_csv, row, reason):
    report = IngestService.load_quarter(write_csv("q.csv", row), 2)

    assert report.records == []
    assert reason in report.rejections[0].reason
    assert report.rejections[0].row == 2


def test_rows_with_the_wrong_field_count_are_rejected_one_by_one(write_csv):
    path = write_csv(
        "quarter1.csv",
        "A1,WB-01,West Bengal,Female,8,8,1,1,0,0,0",
        "A2,WB-01,West Bengal,Female,8,8,1,1,0,0,0,1",
        "A3,WB-01,West Bengal,Female,8,8,1",
        "A4,WB-01,West Bengal,Female,8,8,1,0,0,0,0",
    )
    report = IngestService.load_quarter(path, 1)

    assert [r.child_id for r in report.records] == ["A1", "A4"]
    assert [(r.row, r.child_id, r.reason) for r in report.rejections] == [
        (3, "A2", "wrong number of fields"),
        (4, "A3", "wrong number of fields"),
    ]


def test_an_overlong_first_row_keeps_the_rest_of_the_file(write_csv):
    path = write_csv(
        "quarter1.csv",
        "A1,WB-01,West Bengal,Female,8,8,1,1,0,0,0,1",
        "A2,WB-01,West Bengal,Female,8,8,1,1,0,0,0",
    )
    report = IngestService.load_quarter(path, 1)

    assert [r.child_id for r in report.records] == ["A2"]
    assert [(r.row, r.reason) for r in report.rejections] == [(2, "wrong number of fields")]


def test_header_only_file_has_no_records(write_csv):
    report = IngestService.load_quarter(write_csv("quarter1.csv"), 1)

    assert report.ok
    assert report.records == []


def test_field_quarter_file_loads_completely(field_data_dir):
    report = IngestService.load_quarter(field_data_dir / "quarter1.csv", 1)

    assert report.ok
    assert len(report.records) == 4000
    assert report.skipped == 0


def test_grade_range_is_configurable(write_csv):
    path = write_csv("q.csv", "A1,WB-01,West Bengal,Female,8,6,1,0,0,0,0")

    assert IngestService.load_quarter(path, 1).ok
    narrow = IngestService.load_quarter(path, 1, grade_range=(7, 10))
    assert "class 6 out of range 7-10" in narrow.rejections[0].reason


def test_header_problems_are_fatal(write_csv, tmp_path):
    missing = write_csv("q.csv", "A1,WB-01", header="child_id,center")
    with pytest.raises(SchemaError, match="missing columns"):
        IngestService.load_quarter(missing, 1)

    with pytest.raises(SchemaError, match="not found"):
        IngestService.load_quarter(tmp_path / "absent.csv", 1)

    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(SchemaError):
        IngestService.load_quarter(empty, 1)


def test_quarter_column_in_a_quarter_file_keeps_matching_rows(write_csv):
    header = "child_id,center,state,sex,age_appropriate_class,compatible_class,attendance,imp_lang1,imp_lang2,imp_math,imp_writing,quarter"
    path = write_csv(
        "mixed.csv",
        "A1,WB-01,West Bengal,Female,8,8,1,0,0,0,0,1",
        "A1,WB-01,West Bengal,Female,8,8,1,1,0,0,0,2",
        header=header,
    )
    report = IngestService.load_quarter(path, 2)

    assert [r.quarter for r in report.records] == [2]
    assert report.skipped == 1


def test_load_combined_rejects_unknown_quarters(write_csv):
    header = "child_id,center,state,sex,age_appropriate_class,compatible_class,attendance,imp_lang1,imp_lang2,imp_math,imp_writing,quarter"
    path = write_csv(
        "all.csv",
        "A1,WB-01,West Bengal,Female,8,8,1,0,0,0,0,1",
        "A1,WB-01,West Bengal,Female,8,8,1,1,1,0,0,3",
        "A1,WB-01,West Bengal,Female,8,8,1,1,1,1,0,4",
        header=header,
    )
    report = IngestService.load_combined(path)

    assert sorted(r.quarter for r in report.records) == [1, 3]
    assert report.rejections[0].row == 4
    assert "quarter '4'" in report.rejections[0].reason

    plain = write_csv("plain.csv", "A1,WB-01,West Bengal,Female,8,8,1,0,0,0,0")
    with pytest.raises(SchemaError, match="quarter"):
        IngestService.load_combined(plain)


def test_duplicates_keep_the_first_record(make_record):
    first = make_record("A1", level=1)
    repeat = make_record("A1", level=3)
    cohort = IngestService.build_cohort([first, repeat, make_record("B1")])

    assert len(cohort) == 2
    assert IngestService.improvement_level(cohort.get("A1", 1)) == 1
    assert [(d.child_id, d.quarter) for d in cohort.duplicates] == [("A1", 1)]


def test_records_are_immutable(make_record):
    record = make_record()
    with pytest.raises(ValidationError):
        record.quarter = 2


def test_dumped_records_load_back_equal(tmp_path, make_record):
    records = [make_record("A1", level=2, lag=-3), make_record("B7", level=4, state=State.MANIPUR, sex=Sex.MALE)]
    target = tmp_path / "quarter1.csv"
    IngestService.dump_records(records, target)

    assert IngestService.load_quarter(target, 1).records == records


def test_summary_counts_children_and_records(make_record):
    cohort = IngestService.build_cohort(
        [
            make_record("A1", quarter=1, state=State.MANIPUR),
            make_record("A1", quarter=2, state=State.MANIPUR),
            make_record("B1", quarter=1, sex=Sex.MALE),
        ]
    )
    summary = cohort.summary

    assert summary.total_records == 3
    assert summary.children == 2
    assert summary.by_state[State.MANIPUR.value] == 1
    assert summary.by_state[State.JHARKHAND.value] == 0
    assert summary.by_sex == {Sex.MALE.value: 1, Sex.FEMALE.value: 1}
    assert [(q.quarter, q.records) for q in summary.quarters] == [(1, 2), (2, 1)]


def test_field_demography(field_cohort):
    summary = field_cohort.summary

    assert summary.children == 4000
    assert summary.by_state == {
        "Jammu & Kashmir": 565,
        "Jharkhand": 700,
        "Manipur": 1001,
        "West Bengal": 1734,
    }
    assert summary.by_sex == {"Female": 2119, "Male": 1881}
    for quarter in summary.quarters:
        assert sum(quarter.by_state.values()) == sum(quarter.by_sex.values()) == quarter.records == 4000


def test_pairs_and_coverage(make_record):
    cohort = IngestService.build_cohort(
        [
            make_record("A1", quarter=1),
            make_record("A1", quarter=2),
            make_record("B1", quarter=1),
            make_record("C1", quarter=2),
        ]
    )

    pairs = IngestService.pairs(cohort, 1, 2)
    assert [(a.child_id, b.quarter) for a, b in pairs] == [("A1", 2)]

    (pair,) = IngestService.coverage(cohort).pairs
    assert (pair.both, pair.only_from, pair.only_to) == (1, 1, 1)
    assert IngestService.coverage(cohort).children_per_quarter == {1: 2, 2: 2}


def test_restrict_keeps_matching_children(field_cohort):
    boys = IngestService.restrict(field_cohort, lambda r: r.sex == Sex.MALE)

    assert boys.summary.children == 1881
    assert set(boys.quarters) == {1, 2, 3}
