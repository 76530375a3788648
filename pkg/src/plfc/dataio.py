"""Curve containers and CSV input/output.

The single ingestion format is a long CSV with header ``curve_id,x,y``.
Every table written by the package formats floats with ``repr``, the
shortest representation that round-trips exactly through IEEE doubles,
so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

__all__ = ["Curve", "Dataset", "load_dataset", "write_table", "read_table"]

MIN_POINTS = 5

_HEADER = ["curve_id", "x", "y"]


@dataclass(frozen=True)
class Curve:
    """One observed series on strictly increasing input points."""

    id: str
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise InputError(f"curve {self.id!r}: x and y must be 1-d and equally long")
        if x.size < MIN_POINTS:
            raise InputError(
                f"curve {self.id!r}: needs at least {MIN_POINTS} points, got {x.size}"
            )
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise InputError(f"curve {self.id!r}: non-finite values")
        if not np.all(np.diff(x) > 0):
            raise InputError(f"curve {self.id!r}: x must be strictly increasing")

    @property
    def n(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True)
class Dataset:
    """Ordered curve collection.

    ``common_grid`` is computed on construction and is true when every
    curve shares an identical x sequence.
    """

    curves: tuple[Curve, ...]
    common_grid: bool = field(init=False)

    def __post_init__(self):
        curves = tuple(self.curves)
        object.__setattr__(self, "curves", curves)
        if not curves:
            raise InputError("dataset has no curves")
        ids = [c.id for c in curves]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise InputError(f"duplicate curve ids: {dupes}")
        first = curves[0].x
        common = all(c.x.shape == first.shape and np.array_equal(c.x, first) for c in curves)
        object.__setattr__(self, "common_grid", common)

    def __len__(self) -> int:
        return len(self.curves)

    def ids(self) -> list[str]:
        return [c.id for c in self.curves]

    def y_matrix(self) -> np.ndarray:
        """Stack all y vectors into one (n_curves, n) matrix.

        Only valid on a common grid; raises otherwise.
        """
        if not self.common_grid:
            raise InputError("y_matrix requires all curves on a common grid")
        return np.vstack([c.y for c in self.curves])


def load_dataset(path, format: str = "long_csv") -> Dataset:
    """Read a long CSV (``curve_id,x,y``) into a validated Dataset.

    Curves keep the order in which their id first appears; rows within a
    curve are sorted by x. Duplicate (curve_id, x) pairs, non-finite or
    unparseable values, and curves shorter than 5 points are rejected
    with the offending row or curve named.
    """
    if format != "long_csv":
        raise InputError(f"unknown format {format!r}; supported: long_csv")
    header, rows = read_table(path)
    if header != _HEADER:
        raise InputError(f"{path}: expected header {','.join(_HEADER)!r}, got {','.join(header)!r}")
    by_id: dict[str, list[tuple[float, float, int]]] = {}
    for rownum, row in enumerate(rows, start=2):
        if len(row) != 3:
            raise InputError(f"{path}: row {rownum}: expected 3 fields, got {len(row)}")
        cid, xs, ys = row
        try:
            xv = float(xs)
            yv = float(ys)
        except ValueError:
            raise InputError(f"{path}: row {rownum}: non-numeric x or y") from None
        if not (np.isfinite(xv) and np.isfinite(yv)):
            raise InputError(f"{path}: row {rownum}: non-finite value")
        by_id.setdefault(cid, []).append((xv, yv, rownum))
    curves = []
    for cid, triples in by_id.items():
        triples.sort(key=lambda t: t[0])
        xs = [t[0] for t in triples]
        for (xa, _, _), (xb, _, rb) in zip(triples, triples[1:]):
            if xa == xb:
                raise InputError(f"{path}: row {rb}: duplicate x={xb!r} for curve {cid!r}")
        curves.append(Curve(cid, np.array(xs), np.array([t[1] for t in triples])))
    return Dataset(tuple(curves))


def _format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table(rows, path, header) -> None:
    """Write a rectangular table as CSV with the given header.

    Floats are written with full round-trip precision. Rows whose width
    differs from the header are rejected.
    """
    header = list(header)
    formatted = []
    for i, row in enumerate(rows):
        row = list(row)
        if len(row) != len(header):
            raise InputError(
                f"row {i}: width {len(row)} does not match header width {len(header)}"
            )
        formatted.append([_format_cell(v) for v in row])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(formatted)


def read_table(path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV into (header, rows) of raw strings."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise InputError(f"{path}: empty file") from None
            return header, [row for row in reader]
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from None
