"""
Tests for schema handling, CSV ingestion, Lending Club preprocessing and splitting.
Run with: pytest tests/test_dataset.py -v
"""
import math

import numpy as np
import pytest

from src.dataset import (
    ColumnSpec,
    FeatureSchema,
    MonthStamp,
    encode_loan_status,
    lending_club_schema,
    load_csv,
    load_dataset,
    month_counts,
    preprocess_lending_club,
    save_dataset,
    split_by_month,
    summarize,
)
from src.errors import EmptyInputError, ParseError, SchemaError
from tests.helpers import make_dataset


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


MIXED_SCHEMA = FeatureSchema(
    columns=[
        ColumnSpec(name="amount", kind="numeric"),
        ColumnSpec(name="rate", kind="numeric"),
        ColumnSpec(name="grade", kind="categorical"),
        ColumnSpec(name="target", kind="numeric", missing_allowed=False),
    ],
    label_column="target",
)


def lending_club_row(**overrides):
    row = {
        "loan_amnt": 10000, "term": " 36 months", "int_rate": "13.5%", "installment": 340.0,
        "sub_grade": "B2", "emp_length": "10+ years", "home_ownership": "RENT", "annual_inc": 65535,
        "verification_status": "Verified", "issue_d": "Jan-2018", "loan_status": "Fully Paid",
        "purpose": "credit_card", "addr_state": "CA", "dti": 18.2, "earliest_cr_line": "Jan-2001",
        "fico_range_low": 700, "fico_range_high": 704, "open_acc": 9, "pub_rec": 0, "revol_bal": 1023,
        "revol_util": "45.1%", "total_acc": 20, "initial_list_status": "w", "application_type": "Individual",
        "mort_acc": 1, "pub_rec_bankruptcies": 0,
    }
    row.update(overrides)
    return row


def write_lending_club(path, rows):
    header = lending_club_schema().names
    return write_csv(path, header, [[row[name] for name in header] for row in rows])


class TestMonthStamp:
    """Month parsing, ordering and formatting."""

    @pytest.mark.parametrize("text", ["2018-01", "2018M1", "2018m1", "Jan-2018", " 2018-1 "])
    def test_parse_formats(self, text):
        assert MonthStamp.parse(text) == MonthStamp(year=2018, month=1)

    def test_invalid_month(self):
        with pytest.raises(ParseError):
            MonthStamp.parse("2018-13")
        with pytest.raises(ParseError):
            MonthStamp.parse("January 2018")

    def test_ordering_and_round_trip(self):
        a, b = MonthStamp.parse("2018M12"), MonthStamp.parse("2019M1")
        assert a < b and b > a
        assert b.ordinal - a.ordinal == 1
        assert MonthStamp.parse(str(a)) == a
        assert MonthStamp.parse(a.compact()) == a
        assert a.shift(7) == MonthStamp(year=2019, month=7)

    def test_text_in_models(self):
        # months in config files are plain strings
        stamp = MonthStamp.model_validate("2019-06")
        assert stamp == MonthStamp(year=2019, month=6)
        assert stamp.model_dump() == "2019-06"


class TestSchema:
    """Schema validation."""

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            FeatureSchema(
                columns=[ColumnSpec(name="a", kind="numeric"), ColumnSpec(name="a", kind="numeric")],
                label_column="a",
            )

    def test_label_must_be_declared(self):
        with pytest.raises(ValueError):
            FeatureSchema(columns=[ColumnSpec(name="a", kind="numeric")], label_column="b")

    def test_lending_club_schema_has_24_features(self):
        schema = lending_club_schema()
        assert len(schema.feature_names) == 24
        assert schema.label_column == "loan_status"
        assert schema.month_column == "issue_d"


class TestLoadCsv:
    """CSV ingestion."""

    def test_four_rows(self, tmp_path):
        path = write_csv(
            tmp_path / "small.csv",
            ["grade", "amount", "rate", "target"],
            [["A", 100, "5%", 0], ["B", "", 7.5, 1], ["A", 300, 6, 0], ["", 400, 8, 1]],
        )
        ds = load_csv(path, MIXED_SCHEMA)
        assert ds.n_rows == 4
        assert ds.feature_names == ["amount", "rate", "grade"]
        assert ds.categories("grade") == ["A", "B"]
        assert np.isnan(ds.frame["amount"].iloc[1])
        assert ds.frame["rate"].tolist() == [5.0, 7.5, 6.0, 8.0]
        assert ds.frame["grade"].isna().tolist() == [False, False, False, True]
        assert ds.labels.tolist() == [0, 1, 0, 1]
        assert ds.row_ids.tolist() == [0, 1, 2, 3]

    def test_header_only(self, tmp_path):
        path = write_csv(tmp_path / "empty.csv", ["amount", "rate", "grade", "target"], [])
        with pytest.raises(EmptyInputError):
            load_csv(path, MIXED_SCHEMA)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "blank.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(EmptyInputError):
            load_csv(path, MIXED_SCHEMA)

    def test_missing_column_named(self, tmp_path):
        path = write_csv(tmp_path / "partial.csv", ["amount", "grade", "target"], [[1, "A", 0]])
        with pytest.raises(SchemaError, match="rate"):
            load_csv(path, MIXED_SCHEMA)

    def test_unparseable_number(self, tmp_path):
        path = write_csv(
            tmp_path / "bad.csv", ["amount", "rate", "grade", "target"], [[1, 2, "A", 0], ["abc", 2, "B", 1]]
        )
        with pytest.raises(ParseError) as excinfo:
            load_csv(path, MIXED_SCHEMA)
        assert excinfo.value.row == 2
        assert excinfo.value.column == "amount"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv", MIXED_SCHEMA)

    def test_row_id_column(self, tmp_path):
        path = write_csv(
            tmp_path / "ids.csv", ["row_id", "amount", "rate", "grade", "target"],
            [[10, 1, 2, "A", 0], [20, 3, 4, "B", 1]],
        )
        assert load_csv(path, MIXED_SCHEMA).row_ids.tolist() == [10, 20]

    def test_save_and_load(self, tmp_path):
        ds = make_dataset(
            [[1.5, np.nan], [2.0, 3.25], [0.1, -4.0]], [0, 1, 1],
            months=["2018-01", "2018-02", "2018-02"], row_ids=[5, 9, 11],
        )
        path = save_dataset(ds, tmp_path / "out" / "ds.csv")
        loaded = load_dataset(path)
        assert loaded.row_ids.tolist() == [5, 9, 11]
        assert loaded.labels.tolist() == [0, 1, 1]
        assert loaded.months.tolist() == ds.months.tolist()
        np.testing.assert_array_equal(loaded.frame["x1"].to_numpy(), ds.frame["x1"].to_numpy())

    def test_save_and_load_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(21)
        x = np.vstack([rng.normal(size=(500, 3)), rng.uniform(-1e6, 1e6, size=(500, 3))])
        ds = make_dataset(x, rng.integers(0, 2, size=1000))
        loaded = load_dataset(save_dataset(ds, tmp_path / "wide.csv"))
        for name in ds.feature_names:
            original = ds.frame[name].to_numpy()
            assert loaded.frame[name].to_numpy().tobytes() == original.tobytes()


class TestLendingClub:
    """Status encoding and feature transforms."""

    def test_status_encoding(self, tmp_path):
        path = write_lending_club(tmp_path / "lc.csv", [
            lending_club_row(loan_status="Fully Paid"),
            lending_club_row(loan_status="Current"),
            lending_club_row(loan_status="Charged Off"),
        ])
        ds = encode_loan_status(load_csv(path, lending_club_schema()))
        assert ds.labels.tolist() == [0, 1]
        assert ds.row_ids.tolist() == [0, 2]

    def test_all_current_gives_empty(self, tmp_path):
        path = write_lending_club(tmp_path / "lc.csv", [lending_club_row(loan_status="Current")] * 3)
        ds = encode_loan_status(load_csv(path, lending_club_schema()))
        assert ds.n_rows == 0

    def test_status_column_required(self):
        ds = make_dataset([[1.0]], [0])
        with pytest.raises(SchemaError):
            encode_loan_status(ds)

    def test_preprocess(self, tmp_path):
        path = write_lending_club(tmp_path / "lc.csv", [
            lending_club_row(),
            lending_club_row(emp_length="< 1 year", loan_status="Charged Off", annual_inc=0),
            lending_club_row(emp_length="", fico_range_low=660, fico_range_high=664),
        ])
        ds = preprocess_lending_club(encode_loan_status(load_csv(path, lending_club_schema())))
        frame = ds.frame
        assert len(ds.feature_names) == 23
        assert "fico_range_low" not in frame.columns and "annual_inc" not in frame.columns
        assert frame["fico_score"].tolist() == [702.0, 702.0, 662.0]
        assert frame["log_annual_inc"].iloc[0] == pytest.approx(math.log10(65536), abs=1e-12)
        assert frame["log_annual_inc"].iloc[0] == pytest.approx(4.8165, abs=1e-4)
        assert frame["log_annual_inc"].iloc[1] == 0.0
        assert frame["emp_length"].iloc[0] == 10.0
        assert frame["emp_length"].iloc[1] == 0.0
        assert np.isnan(frame["emp_length"].iloc[2])
        assert frame["term"].iloc[0] == 36.0
        assert frame["earliest_cr_line"].iloc[0] == 2001.0
        assert frame["int_rate"].iloc[0] == 13.5

    def test_preprocess_rejects_second_pass(self, tmp_path):
        path = write_lending_club(tmp_path / "lc.csv", [lending_club_row(), lending_club_row(loan_status="Charged Off")])
        once = preprocess_lending_club(encode_loan_status(load_csv(path, lending_club_schema())))
        with pytest.raises(SchemaError):
            preprocess_lending_club(once)


class TestSplitAndSummary:
    """Chronological split and descriptive statistics."""

    def test_split_one_two(self):
        ds = make_dataset([[1.0], [2.0], [3.0]], [0, 1, 0], months=["2018M1", "2018M2", "2018M3"])
        before, after = split_by_month(ds, MonthStamp.parse("2018M2"))
        assert before.row_ids.tolist() == [0]
        assert after.row_ids.tolist() == [1, 2]

    def test_split_before_earliest(self):
        ds = make_dataset([[1.0], [2.0]], [0, 1], months=["2018M3", "2018M4"])
        before, after = split_by_month(ds, MonthStamp.parse("2017M1"))
        assert before.n_rows == 0
        assert after.n_rows == 2

    def test_split_union_reproduces_input(self):
        months = ["2018M1", "2018M3", "2018M2", "2018M5", "2018M4", "2018M2"]
        ds = make_dataset(np.arange(6.0), [0, 1, 0, 1, 0, 1], months=months, row_ids=[3, 1, 4, 15, 9, 2])
        before, after = split_by_month(ds, MonthStamp.parse("2018M3"))
        merged = np.sort(np.concatenate([before.row_ids, after.row_ids]))
        assert merged.tolist() == sorted(ds.row_ids.tolist())

    def test_split_needs_months(self):
        with pytest.raises(SchemaError):
            split_by_month(make_dataset([[1.0]], [0]), MonthStamp.parse("2018M1"))

    def test_month_counts(self):
        ds = make_dataset(np.arange(4.0), [0, 1, 0, 1], months=["2018M2", "2018M1", "2018M2", "2018M2"])
        assert list(month_counts(ds).items()) == [
            (MonthStamp.parse("2018M1"), 1), (MonthStamp.parse("2018M2"), 3),
        ]

    def test_summary_sample_std(self):
        stats = summarize(make_dataset([[1.0], [2.0], [3.0], [4.0]], [0, 1, 0, 1]))["x0"]
        assert stats.mean == 2.5
        assert stats.std == pytest.approx(1.2910, abs=1e-4)
        assert stats.min == 1.0 and stats.max == 4.0

    def test_summary_constant_and_missing(self):
        ds = make_dataset([[5.0, np.nan], [5.0, np.nan], [5.0, 1.0]], [0, 1, 0])
        stats = summarize(ds)
        assert stats["x0"].mean == 5.0 and stats["x0"].std == 0.0
        assert stats["x1"].count == 1 and stats["x1"].std is None
        for summary in stats.values():
            assert summary.count + summary.missing == ds.n_rows

    def test_summary_empty_column(self):
        stats = summarize(make_dataset([[np.nan], [np.nan]], [0, 1]))["x0"]
        assert stats.count == 0
        assert not stats.defined
        assert stats.mean is None


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
