"""Partition agreement (adjusted Rand index) and change-point
recovery frequencies.

The ARI combinatorics run in exact integer arithmetic; only the final
ratio is a float. This keeps the score exact for inputs up to around a
million items, where naive floating-point pair sums would cancel.
"""

from __future__ import annotations

from collections import Counter
from math import comb

import numpy as np

from .errors import InputError

__all__ = ["ari", "changepoint_frequencies"]


def _as_labels(labels, name: str) -> list:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise InputError(f"{name} must be a 1-d label sequence")
    return arr.tolist()


def ari(p, q) -> float:
    """Adjusted Rand index between two partitions of the same items.

    Returns (S - E) / (M - E) where S sums C(n_ij, 2) over the
    contingency table, E is the chance term S_a * S_b / C(n, 2), and
    M is the mean of the marginal pair sums. When both partitions put
    everything in one cluster the formula is 0/0; that case returns 1
    since the partitions are trivially identical.
    """
    p = _as_labels(p, "p")
    q = _as_labels(q, "q")
    if len(p) != len(q):
        raise InputError(f"label length mismatch: {len(p)} vs {len(q)}")
    n = len(p)
    if n < 2:
        raise InputError(f"need at least 2 items, got {n}")
    joint = Counter(zip(p, q))
    a = Counter(p)
    b = Counter(q)
    s_ij = sum(comb(c, 2) for c in joint.values())
    s_a = sum(comb(c, 2) for c in a.values())
    s_b = sum(comb(c, 2) for c in b.values())
    c_n = comb(n, 2)
    # numerator and denominator scaled by 2*C(n,2) to stay integral
    num = 2 * (s_ij * c_n - s_a * s_b)
    den = (s_a + s_b) * c_n - 2 * s_a * s_b
    if den == 0:
        return 1.0
    return num / den


def changepoint_frequencies(estimated, grid) -> np.ndarray:
    """Per-position estimation frequency across replicates.

    ``estimated`` is one knot collection per replicate; every knot must
    lie on ``grid``. Returns counts divided by the number of replicates,
    aligned with ``grid``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InputError("grid must be a nonempty 1-d sequence")
    if np.unique(grid).size != grid.size:
        raise InputError("grid positions must be distinct")
    replicates = list(estimated)
    if not replicates:
        raise InputError("need at least one replicate")
    lookup = {float(g): i for i, g in enumerate(grid)}
    counts = np.zeros(grid.size)
    for r, knots in enumerate(replicates):
        for t in knots:
            t = float(t)
            if t not in lookup:
                raise InputError(f"replicate {r}: knot {t!r} is not on the grid")
            counts[lookup[t]] += 1.0
    return counts / len(replicates)
