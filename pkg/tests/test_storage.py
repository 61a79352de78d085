import numpy as np
import pytest

import storage
from grid_field import Domain1D, Grid, ScalarField, SpaceTimeField
from reports import EstimateReport


def test_fmt_cells():
    assert storage.fmt(None) == ""
    assert storage.fmt(True) == "1" and storage.fmt(np.bool_(False)) == "0"
    assert storage.fmt(np.int64(7)) == "7"
    assert storage.fmt(0.1) == "0.10000000000000001"
    assert storage.fmt("all") == "all"
    assert float(storage.fmt(1 / 3)) == 1 / 3


def test_field_csv_restores_values_and_grid(tmp_path):
    grid = Grid(Domain1D(-1.0, 1.0), 10)
    field = ScalarField.from_function(grid, np.sin)
    path = storage.write_field_csv(tmp_path / "nested" / "field.csv", field)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "x,value"
    restored = storage.read_field_csv(path)
    np.testing.assert_array_equal(restored.values, field.values)
    assert restored.grid.n_cells == 10
    assert restored.grid.h == pytest.approx(grid.h)
    assert storage.read_field_csv(path, grid.domain).grid == grid


def test_slices_csv_in_long_format(tmp_path):
    grid = Grid(Domain1D(0.0, 1.0), 4)
    times = np.array([0.0, 0.25, 0.5])
    values = np.arange(12, dtype=float).reshape(3, 4) / 7.0
    stf = SpaceTimeField.from_array(grid, times, values)
    path = storage.write_slices_csv(tmp_path / "slices.csv", stf)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,x,value"
    assert len(lines) == 1 + 12
    restored = storage.read_slices_csv(path, grid.domain)
    np.testing.assert_array_equal(restored.times, times)
    np.testing.assert_array_equal(restored.as_array(), values)


def test_missing_columns_and_file(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,val\n0.5,1\n", encoding="utf-8")
    with pytest.raises(storage.StorageError, match="value"):
        storage.read_field_csv(path)
    with pytest.raises(FileNotFoundError):
        storage.read_field_csv(tmp_path / "missing.csv")


def test_unparsable_number(tmp_path):
    path = tmp_path / "field.csv"
    path.write_text("x,value\n0.25,abc\n0.75,1\n", encoding="utf-8")
    with pytest.raises(storage.StorageError):
        storage.read_field_csv(path)


def test_ragged_slices_are_rejected(tmp_path):
    path = tmp_path / "slices.csv"
    path.write_text("t,x,value\n0,0.25,1\n0,0.75,1\n0.5,0.25,1\n", encoding="utf-8")
    with pytest.raises(storage.StorageError):
        storage.read_slices_csv(path)


def test_reports_and_details(tmp_path):
    report = EstimateReport("bv_space", 1.5, 2.0, 0.05, "p", details={"b": 2.0, "a": 1.0})
    failing = EstimateReport("tv_space_time", 3.0, 1.0, 0.05, "p")
    rows = [(0.05, report), (None, failing)]
    lines = storage.write_reports_csv(tmp_path / "reports.csv", rows).read_text(encoding="utf-8").splitlines()
    assert lines == [
        "eps,estimate,lhs,rhs,tol,pass",
        "0.050000000000000003,bv_space,1.5,2,0.050000000000000003,1",
        "all,tv_space_time,3,1,0.050000000000000003,0",
    ]
    details = storage.write_details_csv(tmp_path / "details.csv", rows).read_text(encoding="utf-8").splitlines()
    assert details[1].split(",")[2] == "a" and details[2].split(",")[2] == "b"
    assert len(details) == 3


def test_meta_roundtrip_is_sorted(tmp_path):
    path = storage.write_meta_csv(tmp_path / "meta.csv", {"flux": "burgers", "T": 0.5, "partial": True})
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines == ["key,value", "T,0.5", "flux,burgers", "partial,1"]
    assert storage.read_meta_csv(path) == {"T": "0.5", "flux": "burgers", "partial": "1"}


def test_repeated_writes_are_identical(tmp_path):
    grid = Grid(Domain1D(0.0, 1.0), 16)
    field = ScalarField.from_function(grid, lambda x: x * x / 3.0)
    a = storage.write_field_csv(tmp_path / "a.csv", field).read_bytes()
    b = storage.write_field_csv(tmp_path / "b.csv", field).read_bytes()
    assert a == b
