"""Independent reference implementations used only by the tests.

Every oracle recomputes a quantity with a different algorithm and, where
possible, a different library than the package code, so the same mistake
would have to be written twice before a comparison test could pass.
"""

import itertools
import math
from collections import Counter

import numpy as np


def tf_objective(y, beta, lam):
    """Objective value of the penalized trend-filter problem."""
    y = np.asarray(y, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d2 = np.diff(beta, n=2)
    return float(np.sum((y - beta) ** 2) + lam * np.sum(np.abs(d2)))


def solve_tf_reference(y, lam):
    """Trend filter through a generic conic solver, tightened tolerances."""
    import cvxpy as cp

    y = np.asarray(y, dtype=float)
    n = y.size
    beta = cp.Variable(n)
    d2 = np.diff(np.eye(n), n=2, axis=0)
    problem = cp.Problem(
        cp.Minimize(cp.sum_squares(y - beta) + lam * cp.norm1(d2 @ beta))
    )
    problem.solve(
        solver=cp.CLARABEL,
        tol_gap_abs=1e-12,
        tol_gap_rel=1e-12,
        tol_feas=1e-12,
        tol_ktratio=1e-10,
        max_iter=500,
    )
    if beta.value is None:
        raise RuntimeError(f"reference solver failed: {problem.status}")
    return np.asarray(beta.value, dtype=float)


def pl_design_interp(x, knots):
    """Cardinal piecewise-linear basis evaluated through np.interp."""
    x = np.asarray(x, dtype=float)
    nodes = np.concatenate(([x[0]], np.sort(np.asarray(knots, dtype=float)), [x[-1]]))
    cols = []
    for j in range(nodes.size):
        unit = np.zeros(nodes.size)
        unit[j] = 1.0
        cols.append(np.interp(x, nodes, unit))
    return np.stack(cols, axis=1)


def pl_fit_interp(x, y, knots):
    """(rss, theta) of the fixed-knot continuous PL least squares.

    Returns (inf, None) when the design is rank deficient, mirroring the
    package's empty-segment convention.
    """
    design = pl_design_interp(x, knots)
    theta, _, rank, _ = np.linalg.lstsq(design, np.asarray(y, dtype=float), rcond=None)
    if rank < design.shape[1]:
        return np.inf, None
    resid = np.asarray(y, dtype=float) - design @ theta
    return float(resid @ resid), theta


def best_subsets_nested(x, y, candidates):
    """Exhaustive subset search with plain nested loops, no shared algebra."""
    cand = sorted(float(c) for c in candidates)
    m = len(cand)
    costs = np.full(m + 1, np.inf)
    subsets = [None] * (m + 1)
    for k in range(m + 1):
        for combo in itertools.combinations(cand, k):
            rss, _ = pl_fit_interp(x, y, np.asarray(combo))
            if rss < costs[k]:
                costs[k] = rss
                subsets[k] = np.asarray(combo)
    return costs, subsets


def ari_pairs(a, b):
    """Adjusted Rand index by explicit O(n^2) pair counting."""
    a = list(a)
    b = list(b)
    n = len(a)
    same_a = same_b = same_both = 0
    for i in range(n):
        for j in range(i + 1, n):
            sa = a[i] == a[j]
            sb = b[i] == b[j]
            same_a += sa
            same_b += sb
            same_both += sa and sb
    total = n * (n - 1) // 2
    expected = same_a * same_b / total
    top = 0.5 * (same_a + same_b)
    if top == expected:
        return 1.0
    return (same_both - expected) / (top - expected)


def ari_contingency(a, b):
    """Adjusted Rand index from the contingency table, exact integers."""
    pairs = Counter(zip(a, b))
    ra = Counter(a)
    rb = Counter(b)
    n = len(a)
    s_ij = sum(math.comb(v, 2) for v in pairs.values())
    s_a = sum(math.comb(v, 2) for v in ra.values())
    s_b = sum(math.comb(v, 2) for v in rb.values())
    c_n = math.comb(n, 2)
    num = 2 * (s_ij * c_n - s_a * s_b)
    den = (s_a + s_b) * c_n - 2 * s_a * s_b
    if den == 0:
        return 1.0
    return num / den


def wss_of(points, labels, centroids):
    """Within-cluster sum of squares, recomputed point by point."""
    total = 0.0
    for p, lab in zip(points, labels):
        diff = np.asarray(p, dtype=float) - centroids[lab - 1]
        total += float(diff @ diff)
    return total


def interp_curve(knots, theta, x):
    """Piecewise-linear interpolant by explicit slope arithmetic."""
    knots = [float(k) for k in knots]
    theta = [float(v) for v in theta]
    nodes_x = [0.0] + knots + [500.0]
    nodes_y = [0.0] + theta
    out = []
    for xi in np.asarray(x, dtype=float):
        if xi <= nodes_x[0]:
            out.append(nodes_y[0])
            continue
        if xi >= nodes_x[-1]:
            out.append(nodes_y[-1])
            continue
        j = max(i for i in range(len(nodes_x) - 1) if nodes_x[i] <= xi)
        x0, x1 = nodes_x[j], nodes_x[j + 1]
        y0, y1 = nodes_y[j], nodes_y[j + 1]
        out.append(y0 + (y1 - y0) * (xi - x0) / (x1 - x0))
    return np.asarray(out)
