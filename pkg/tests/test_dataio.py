"""Loading, validation, and deterministic table round trips."""

import numpy as np
import pytest

from plfc.dataio import Curve, Dataset, load_dataset, read_table, write_table
from plfc.errors import InputError


def _curve(cid="a", n=6, x0=0.0):
    x = x0 + 10.0 * np.arange(n)
    return Curve(id=cid, x=x, y=np.sin(x))


def test_curve_validation():
    x = 10.0 * np.arange(6)
    with pytest.raises(InputError):
        Curve(id="a", x=x[:4], y=np.zeros(4))  # below the minimum length
    with pytest.raises(InputError):
        Curve(id="a", x=np.array([0.0, 10.0, 10.0, 20.0, 30.0]), y=np.zeros(5))
    with pytest.raises(InputError):
        Curve(id="a", x=x, y=np.full(6, np.nan))
    with pytest.raises(InputError):
        Curve(id="a", x=x, y=np.zeros(5))
    curve = _curve()
    assert curve.n == 6


def test_dataset_grid_detection_and_y_matrix():
    common = Dataset(curves=(_curve("a"), _curve("b")))
    assert common.common_grid is True
    assert common.y_matrix().shape == (2, 6)
    assert common.ids() == ["a", "b"]
    assert len(common) == 2

    mixed = Dataset(curves=(_curve("a"), _curve("b", x0=5.0)))
    assert mixed.common_grid is False
    with pytest.raises(InputError):
        mixed.y_matrix()


def test_dataset_rejects_duplicate_ids():
    with pytest.raises(InputError):
        Dataset(curves=(_curve("a"), _curve("a")))


def test_load_dataset_round_trip(tmp_path):
    path = tmp_path / "curves.csv"
    rows = []
    for cid in ("zebra", "apple"):  # file order, not alphabetical
        curve = _curve(cid)
        rows.extend([[cid, float(x), float(y)] for x, y in zip(curve.x, curve.y)])
    write_table(rows, path, ["curve_id", "x", "y"])
    dataset = load_dataset(path)
    assert dataset.ids() == ["zebra", "apple"]
    assert np.array_equal(dataset.curves[0].x, _curve("zebra").x)
    assert np.array_equal(dataset.curves[1].y, _curve("apple").y)


def test_load_dataset_sorts_rows_within_a_curve(tmp_path):
    path = tmp_path / "curves.csv"
    curve = _curve("a")
    rows = [[curve.id, float(x), float(y)] for x, y in zip(curve.x, curve.y)]
    rows.reverse()
    write_table(rows, path, ["curve_id", "x", "y"])
    dataset = load_dataset(path)
    assert np.array_equal(dataset.curves[0].x, curve.x)
    assert np.array_equal(dataset.curves[0].y, curve.y)


def test_load_dataset_rejects_duplicate_positions(tmp_path):
    path = tmp_path / "curves.csv"
    rows = [["a", 10.0 * i, 0.0] for i in range(6)]
    rows.append(["a", 30.0, 1.0])
    write_table(rows, path, ["curve_id", "x", "y"])
    with pytest.raises(InputError) as err:
        load_dataset(path)
    assert "row" in str(err.value)


def test_load_dataset_header_and_format_checks(tmp_path):
    path = tmp_path / "curves.csv"
    write_table([["a", 1.0, 2.0]], path, ["id", "x", "y"])
    with pytest.raises(InputError):
        load_dataset(path)
    with pytest.raises(InputError):
        load_dataset(path, format="wide_csv")
    with pytest.raises(InputError):
        load_dataset(tmp_path / "missing.csv")


def test_write_table_formats_and_round_trips(tmp_path):
    path = tmp_path / "table.csv"
    rows = [["id1", 3, 0.1, True], ["id2", -7, 2.0 / 3.0, False]]
    write_table(rows, path, ["name", "count", "value", "flag"])
    header, back = read_table(path)
    assert header == ["name", "count", "value", "flag"]
    assert back[0] == ["id1", "3", "0.1", "1"]
    assert back[1] == ["id2", "-7", repr(2.0 / 3.0), "0"]
    assert float(back[1][2]) == 2.0 / 3.0  # repr survives the round trip


def test_write_table_is_byte_deterministic(tmp_path):
    rows = [["a", 0.1 + 0.2], ["b", 1e-17]]
    p1, p2 = tmp_path / "one.csv", tmp_path / "two.csv"
    write_table(rows, p1, ["k", "v"])
    write_table(rows, p2, ["k", "v"])
    assert p1.read_bytes() == p2.read_bytes()
    assert b"\r" not in p1.read_bytes()


def test_write_table_width_mismatch(tmp_path):
    with pytest.raises(InputError):
        write_table([["a", 1.0], ["b"]], tmp_path / "bad.csv", ["k", "v"])


def test_read_table_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_bytes(b"")
    with pytest.raises(InputError):
        read_table(empty)
    with pytest.raises(InputError):
        read_table(tmp_path / "absent.csv")
