import numpy as np
import pytest

from shadowfit.data import CountTable, ingest_experiment_csv, read_table, table_to_csv, write_table
from shadowfit.errors import DataError
from shadowfit.qubit import Projector


def test_duplicates_are_summed_and_sorted():
    table = CountTable.from_records([(2.0, "H", 3), (1.0, "v", 1), (2.0, "h", 4), (2.0, Projector.R, 2)])
    np.testing.assert_array_equal(table.xs, [1.0, 2.0])
    np.testing.assert_array_equal(table.counts[1], [7, 0, 0, 0, 2, 0])
    np.testing.assert_array_equal(table.totals, [1, 9])


def test_fractions_skip_empty_rows():
    table = CountTable.from_records([(1.0, "H", 0), (2.0, "D", 2), (2.0, "A", 2)])
    assert table.occupied.tolist() == [False, True]
    np.testing.assert_allclose(table.fractions(), [[0, 0, 0.5, 0.5, 0, 0]])


def test_empty_table_fractions_raise():
    table = CountTable.from_records([(1.0, "H", 0)])
    with pytest.raises(DataError):
        table.fractions()


def test_negative_counts_rejected():
    with pytest.raises(DataError):
        CountTable(np.array([1.0]), np.array([[1, -1, 0, 0, 0, 0]]))


def test_csv_round_trip(tmp_path):
    table = CountTable.from_records([(810.5, p, i) for i, p in enumerate(Projector)] + [(800.0, "L", 3)])
    path = tmp_path / "t.csv"
    write_table(table, path)
    assert read_table(path) == table
    lines = path.read_text().splitlines()
    assert lines[0] == "x,projector,count"
    assert len(lines) == 1 + 2 * 6


def test_non_integer_counts_survive_round_trip(tmp_path):
    table = CountTable(np.array([1.0]), np.array([[1 / 3, 2 / 3, 0.5, 0.5, 0.1, 0.9]]))
    path = tmp_path / "t.csv"
    path.write_text(table_to_csv(table))
    assert read_table(path) == table


def test_unknown_label_reports_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,projector,count\n1,H,3\n1,Q,2\n")
    with pytest.raises(DataError, match="row 3"):
        read_table(path)


def test_negative_and_non_numeric_rows(tmp_path):
    path = tmp_path / "neg.csv"
    path.write_text("x,projector,count\n1,H,-3\n")
    with pytest.raises(DataError, match="negative"):
        read_table(path)
    path.write_text("x,projector,count\nabc,H,3\n")
    with pytest.raises(DataError, match="non-numeric x"):
        read_table(path)


def test_ingest_wide_format_and_column_map(tmp_path):
    wide = tmp_path / "wide.csv"
    wide.write_text("wavelength,h,v,d,a,r,l\n805,1,2,3,4,5,6\n805,1,0,0,0,0,0\n806,0,0,0,0,0,0\n")
    table = ingest_experiment_csv(wide, {"x": "wavelength"})
    np.testing.assert_array_equal(table.xs, [805, 806])
    np.testing.assert_array_equal(table.counts[0], [2, 2, 3, 4, 5, 6])

    long = tmp_path / "long.csv"
    long.write_text("lam,pol,n\n805,h,2\n805,H,1\n")
    table = ingest_experiment_csv(long, {"x": "lam", "projector": "pol", "count": "n"})
    np.testing.assert_array_equal(table.counts, [[3, 0, 0, 0, 0, 0]])


def test_row_lookup():
    table = CountTable.from_records([(800.1, "H", 1), (800.2, "H", 1)])
    assert table.row_index(800.2) == 1
    with pytest.raises(KeyError):
        table.row_index(800.15)
