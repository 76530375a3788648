"""Continuous piecewise-linear refits and change-point selection.

Given the candidate kink positions extracted by the trend filter, this
module finds, for every subset size k, the best continuous piecewise
linear fit whose knots are a size-k subset of the candidates, then picks
the number of knots with a penalized-contrast rule on the cost curve.

Subset search is exhaustive (the candidate count is capped at 16), but
each subset is costed in O(k): the normal equations of a hat-function
basis are tridiagonal and every entry is a difference of prefix sums, so
all subsets of one size are assembled and solved as a batched Thomas
sweep. The recorded per-size costs are then recomputed at the winning
subsets through the ordinary design-matrix least squares so they satisfy
the refit identity to machine precision.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dataio import Curve
from .errors import EmptySegmentError, InputError
from .spline_features import build_basis
from .trend_filter import (
    EPS_REL_DEFAULT,
    GRID_SIZE_DEFAULT,
    MAX_ITER_DEFAULT,
    TOL_DEFAULT,
    search_lambda,
)

__all__ = [
    "Segmentation",
    "continuous_pl_rss",
    "best_subsets",
    "select_k",
    "segment",
]

S_THRESHOLD_DEFAULT = 0.5
COST_FLOOR_REL = 1e-12
MAX_CANDIDATES = 16


@dataclass(frozen=True)
class Segmentation:
    """Selected knots and coefficients for one curve.

    ``theta`` holds the K+2 node values of the chosen fit (the order-2
    B-spline coefficients). ``cost_by_k`` is the minimal rss using
    exactly k candidate knots, indexed 0..K_max; it is None on records
    reconstructed from files.
    """

    knots: np.ndarray
    k_hat: int
    theta: np.ndarray
    rss: float
    cost_by_k: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "knots", np.asarray(self.knots, dtype=float))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))


def continuous_pl_rss(curve: Curve, knots) -> tuple[float, np.ndarray]:
    """Least-squares continuous piecewise-linear fit with fixed knots.

    Returns (rss, theta) where theta are the node values of the fit at
    (x1, knots..., xn). Raises EmptySegmentError when some basis function
    has no data support.
    """
    basis = build_basis(curve.x[0], curve.x[-1], knots)
    design = basis.design(curve.x)
    theta, _, rank, _ = np.linalg.lstsq(design, curve.y, rcond=None)
    if rank < basis.size:
        empty = np.flatnonzero(~design.any(axis=0))
        detail = f" (no data under basis function(s) {empty.tolist()})" if empty.size else ""
        raise EmptySegmentError(
            f"curve {curve.id!r}: empty segment for knots {basis.knots.tolist()}{detail}"
        )
    resid = curve.y - design @ theta
    return float(resid @ resid), theta


def _prefix_tables(curve: Curve):
    x = curve.x
    yc = curve.y - curve.y.mean()  # centering cuts cancellation in the rss identity
    def pref(v):
        out = np.zeros(v.size + 1)
        np.cumsum(v, out=out[1:])
        return out
    tables = {
        "n": pref(np.ones_like(x)),
        "x": pref(x),
        "xx": pref(x * x),
        "y": pref(yc),
        "xy": pref(x * yc),
    }
    return tables, float(yc @ yc)


def _batched_costs(tables, syy, tau, ptr):
    """rss of the continuous PL fit for a batch of knot vectors.

    tau: (B, p) knot vectors including both endpoints; ptr: (B, p) data
    index of the first point at or after each knot (0 and n at the ends).
    Returns (rss, ok) where ok flags subsets with full-rank normal
    equations; rss is computed on centered y (shift-invariant).
    """
    lo, hi = ptr[:, :-1], ptr[:, 1:]
    a, b = tau[:, :-1], tau[:, 1:]
    h = b - a
    m0 = tables["n"][hi] - tables["n"][lo]
    m1 = tables["x"][hi] - tables["x"][lo]
    m2 = tables["xx"][hi] - tables["xx"][lo]
    my = tables["y"][hi] - tables["y"][lo]
    mxy = tables["xy"][hi] - tables["xy"][lo]
    h2 = h * h
    down = (b * b * m0 - 2.0 * b * m1 + m2) / h2  # left-node hat squared
    up = (m2 - 2.0 * a * m1 + a * a * m0) / h2  # right-node hat squared
    cross = (-m2 + (a + b) * m1 - a * b * m0) / h2
    r_down = (b * my - mxy) / h
    r_up = (mxy - a * my) / h
    n_batch, p = tau.shape
    diag = np.zeros((n_batch, p))
    diag[:, :-1] += down
    diag[:, 1:] += up
    rhs = np.zeros((n_batch, p))
    rhs[:, :-1] += r_down
    rhs[:, 1:] += r_up
    theta, ok = _thomas(diag, cross, rhs.copy())
    rss = syy - np.einsum("bi,bi->b", theta, rhs)
    return np.maximum(rss, 0.0), ok


def _thomas(diag, off, rhs):
    """Batched tridiagonal solve without pivoting (SPD systems).

    Nonpositive pivots mark a rank-deficient system (empty segment); the
    corresponding batch entries are flagged instead of raising.
    """
    n_batch, p = diag.shape
    tiny = 1e-12 * np.maximum(1.0, diag.max(axis=1))
    ok = diag[:, 0] > tiny
    piv = np.where(ok, diag[:, 0], 1.0)
    cprime = np.zeros((n_batch, p - 1))
    rhs[:, 0] /= piv
    for j in range(1, p):
        cprime[:, j - 1] = off[:, j - 1] / piv
        piv = diag[:, j] - off[:, j - 1] * cprime[:, j - 1]
        ok &= piv > tiny
        piv = np.where(ok, piv, 1.0)
        rhs[:, j] = (rhs[:, j] - off[:, j - 1] * rhs[:, j - 1]) / piv
    for j in range(p - 2, -1, -1):
        rhs[:, j] -= cprime[:, j] * rhs[:, j + 1]
    return rhs, ok


def best_subsets(curve: Curve, candidates) -> tuple[np.ndarray, list]:
    """Best continuous PL fit over every subset size of the candidates.

    Returns (cost_by_k, subset_by_k): the minimal rss using exactly k of
    the candidate knots and the knot positions attaining it, for k =
    0..len(candidates). Sizes where every subset leaves an empty segment
    get cost +inf and subset None. Candidate order does not matter; the
    positions must be distinct and strictly inside the data range.
    """
    cand = np.sort(np.asarray(candidates, dtype=float))
    if cand.size > MAX_CANDIDATES:
        raise InputError(
            f"at most {MAX_CANDIDATES} candidates supported, got {cand.size}"
        )
    if cand.size and np.any(np.diff(cand) == 0):
        raise InputError("duplicate candidate positions")
    if cand.size and not (curve.x[0] < cand[0] and cand[-1] < curve.x[-1]):
        raise InputError("candidates must lie strictly inside the data range")
    tables, syy = _prefix_tables(curve)
    pos = np.searchsorted(curve.x, cand)
    n = curve.n
    m = cand.size
    costs = np.full(m + 1, np.inf)
    subsets: list = [None] * (m + 1)
    for k in range(m + 1):
        combo_list = list(itertools.combinations(range(m), k))
        combos = np.array(combo_list, dtype=int).reshape(len(combo_list), k)
        n_batch = combos.shape[0]
        tau = np.empty((n_batch, k + 2))
        tau[:, 0] = curve.x[0]
        tau[:, -1] = curve.x[-1]
        tau[:, 1:-1] = cand[combos]
        ptr = np.empty((n_batch, k + 2), dtype=int)
        ptr[:, 0] = 0
        ptr[:, -1] = n
        ptr[:, 1:-1] = pos[combos]
        rss, ok = _batched_costs(tables, syy, tau, ptr)
        rss = np.where(ok, rss, np.inf)
        best = int(np.argmin(rss))
        if np.isfinite(rss[best]):
            subsets[k] = cand[combos[best]]
    # re-cost the winners through the design-matrix path: exact refit identity
    for k, subset in enumerate(subsets):
        if subset is not None:
            costs[k] = continuous_pl_rss(curve, subset)[0]
    return costs, subsets


def select_k(cost_by_k, s_threshold: float = S_THRESHOLD_DEFAULT) -> int:
    """Number of knots from the curvature of the penalized-contrast curve.

    The contrast is the Gaussian one, the log of the fit cost; costs are
    clamped from below at ``COST_FLOOR_REL`` times the k=0 cost first so
    that numerically exact fits compare as ties instead of as noise.
    With contrasts g_0 >= ... >= g_K the normalized curve is
    J_k = (g_k - g_K) / (g_0 - g_K) * K, its curvature is
    D_k = J_{k-1} - 2 J_k + J_{k+1} for k < K and D_K = J_{K-1} - J_K,
    and the answer is the largest k with D_k above the threshold, or 0
    when none is (including the flat-cost case).
    """
    c = np.asarray(cost_by_k, dtype=float)
    if c.ndim != 1 or c.size < 1:
        raise InputError("cost_by_k must be a nonempty 1-d vector")
    if not np.isfinite(c[0]):
        raise InputError("cost at k=0 must be finite")
    if s_threshold <= 0:
        raise InputError(f"s_threshold must be positive, got {s_threshold}")
    finite = np.isfinite(c)
    if not finite.all():
        last = int(np.flatnonzero(finite)[-1])
        if not finite[: last + 1].all():
            raise InputError("infinite cost below a finite one")
        c = c[: last + 1]
    if np.any(c < 0):
        raise InputError("costs must be nonnegative")
    tol = 1e-9 * (1.0 + abs(float(c[0])))
    if np.any(np.diff(c) > tol):
        raise InputError("cost_by_k must be nonincreasing")
    k_top = c.size - 1
    if k_top == 0 or c[0] <= 0.0:
        return 0
    g = np.log(np.maximum(c, COST_FLOOR_REL * c[0]))
    denom = g[0] - g[-1]
    if denom <= 0:
        return 0
    j = (g - g[-1]) / denom * k_top
    best = 0
    for k in range(1, k_top + 1):
        if k < k_top:
            d = j[k - 1] - 2.0 * j[k] + j[k + 1]
        else:
            d = j[k - 1] - j[k]
        if d > s_threshold:
            best = k
    return best


def segment(
    curve: Curve,
    k_max: int,
    s_threshold: float = S_THRESHOLD_DEFAULT,
    grid_size: int = GRID_SIZE_DEFAULT,
    eps_rel: float = EPS_REL_DEFAULT,
    tol: float = TOL_DEFAULT,
    max_iter: int = MAX_ITER_DEFAULT,
) -> Segmentation:
    """Full per-curve stage: candidates, subset search, knot count, refit.

    An underfilled candidate search (fewer than k_max candidates found)
    simply caps the subset sizes at the available count.
    """
    if k_max > MAX_CANDIDATES:
        raise InputError(f"k_max must be at most {MAX_CANDIDATES}, got {k_max}")
    fit = search_lambda(
        curve.y, k_max, grid_size=grid_size, eps_rel=eps_rel, tol=tol, max_iter=max_iter
    )
    cand_x = curve.x[fit.candidate_indices]
    costs, subsets = best_subsets(curve, cand_x)
    k_hat = select_k(costs, s_threshold)
    knots = subsets[k_hat]
    rss, theta = continuous_pl_rss(curve, knots)
    return Segmentation(knots=knots, k_hat=int(k_hat), theta=theta, rss=rss, cost_by_k=costs)
