"""L1 trend filtering and candidate change-point extraction.

Solves ``min_beta ||y - beta||_2^2 + lambda * ||D2 beta||_1`` where D2 is
the (n-2) x n second-difference matrix with rows (1, -2, 1) on the index
grid. Kinks of the solution (nonzero second differences) mark candidate
change points in slope; ``search_lambda`` walks a geometric grid of
penalties to find a fit carrying a requested number of candidates.

Solver
------
Scaled ADMM on the split ``z = D2 beta`` with over-relaxation: the beta
step is a banded Cholesky solve of ``(2I + rho D2'D2) beta = 2y +
rho D2'(z - u)``, the z step is soft thresholding, and ``rho = lambda``
so the running dual u is itself the subgradient certificate. Every few
iterations the working kink set of z is polished by an exact
equality-constrained refit (a hat-function least squares on the index
grid), and the polished point is accepted once its KKT residual passes
the tolerance; accepted solutions are machine-accurate rather than
first-order accurate.

When the working kink set keeps flapping (borderline rows whose dual
value sits at the boundary make support identification arbitrarily
slow), the solver finishes exactly: the dual of the problem is a
bounded-variable least squares ``min ||(lambda/2) D2' v - y||  s.t.
|v| <= 1`` whose active-set solution identifies the optimal face in
finitely many steps; polishing on that face gives the machine-accurate
primal. The dual normal matrix D2 D2' is pentadiagonal and every
principal submatrix of it stays within bandwidth 2, so each active-set
step is a banded solve and the finisher costs O(n) per step.

The KKT residual is relative:
``||2(beta - y) + lambda * D2' v||_inf / max(1, ||2(beta - y)||_inf)``
with v the least-squares dual certificate clipped to [-1, 1] and pinned
to sign(D2 beta) on active rows. The normalization makes the tolerance
scale-free, so ``solve_tf(c*y, c*lambda)`` stops exactly where
``c * solve_tf(y, lambda)`` does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded, solveh_banded
from scipy.optimize import lsq_linear

from .errors import ConvergenceError, InputError

__all__ = [
    "TrendFit",
    "second_difference",
    "second_difference_transpose",
    "d2_matrix",
    "lambda_max",
    "kkt_residual",
    "solve_tf",
    "candidates",
    "search_lambda",
]

TOL_DEFAULT = 1e-8
EPS_REL_DEFAULT = 1e-4
GRID_SIZE_DEFAULT = 50
LAMBDA_MIN_RATIO = 1e-6
MAX_ITER_DEFAULT = 20000

_CHUNK = 25  # ADMM iterations between polish attempts
_ALPHA = 1.8  # over-relaxation
_ADMM_BUDGET = 50  # iterations before the exact dual finisher kicks in


@dataclass(frozen=True)
class TrendFit:
    """Solution of the penalized problem at one lambda.

    ``candidate_indices`` are 0-based grid indices in {1, ..., n-2}: row i
    of D2 is centered on grid point i+1, and a row whose magnitude exceeds
    the relative threshold contributes that grid point. ``underfilled`` is
    set by ``search_lambda`` when no grid lambda reached the requested
    candidate count.
    """

    beta: np.ndarray
    lam: float
    rss: float
    candidate_indices: np.ndarray
    underfilled: bool = False

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))
        object.__setattr__(
            self, "candidate_indices", np.asarray(self.candidate_indices, dtype=int)
        )


def second_difference(v: np.ndarray) -> np.ndarray:
    """Apply D2: second differences of a vector, length n-2."""
    v = np.asarray(v, dtype=float)
    return v[:-2] - 2.0 * v[1:-1] + v[2:]


def second_difference_transpose(w: np.ndarray) -> np.ndarray:
    """Apply D2 transpose to a length n-2 vector, yielding length n."""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.size + 2)
    out[:-2] += w
    out[1:-1] -= 2.0 * w
    out[2:] += w
    return out


def d2_matrix(n: int) -> np.ndarray:
    """Dense (n-2) x n second-difference matrix, for tests and oracles."""
    if n < 3:
        raise InputError(f"need n >= 3, got {n}")
    m = np.zeros((n - 2, n))
    idx = np.arange(n - 2)
    m[idx, idx] = 1.0
    m[idx, idx + 1] = -2.0
    m[idx, idx + 2] = 1.0
    return m


def _ddt_banded(m: int) -> np.ndarray:
    # lower banded form of D2 D2' (pentadiagonal SPD)
    ab = np.zeros((3, m))
    ab[0, :] = 6.0
    ab[1, :-1] = -4.0
    ab[2, :-2] = 1.0
    if m >= 1:
        ab[0, 0] = ab[0, -1] = 6.0
    return ab


def _dtd_banded(n: int, rho: float) -> np.ndarray:
    # lower banded form of 2 I + rho D2' D2
    d0 = np.full(n, 6.0)
    d0[0] = d0[-1] = 1.0
    if n > 3:
        d0[1] = d0[-2] = 5.0
    else:
        d0[1] = 4.0
    d1 = np.full(n - 1, -4.0)
    d1[0] = d1[-1] = -2.0
    ab = np.zeros((3, n))
    ab[0, :] = 2.0 + rho * d0
    ab[1, :-1] = rho * d1
    ab[2, :-2] = rho
    return ab


def lambda_max(y: np.ndarray) -> float:
    """Smallest lambda whose solution is the affine least-squares fit.

    Equals ``2 * ||(D2 D2')^{-1} D2 y||_inf``; for any lambda at or above
    it the penalty flattens every second difference to zero.
    """
    y = np.asarray(y, dtype=float)
    if y.size < 3:
        raise InputError(f"need n >= 3, got {y.size}")
    v = solveh_banded(
        _ddt_banded(y.size - 2), second_difference(y), lower=True, check_finite=False
    )
    return 2.0 * float(np.abs(v).max())


def kkt_residual(y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Relative KKT residual of beta for the penalized objective."""
    y = np.asarray(y, dtype=float)
    beta = np.asarray(beta, dtype=float)
    g = 2.0 * (beta - y)
    scale = max(1.0, float(np.abs(g).max()))
    if lam == 0.0:
        return float(np.abs(g).max()) / scale
    # least-squares certificate: lam * (D2 D2') v = -D2 g
    v = (
        solveh_banded(
            _ddt_banded(y.size - 2),
            -second_difference(g),
            lower=True,
            check_finite=False,
        )
        / lam
    )
    db = second_difference(beta)
    active = np.abs(db) > 1e-9 * max(1.0, float(np.abs(db).max()))
    vbar = np.clip(v, -1.0, 1.0)
    vbar[active] = np.sign(db[active])
    r = float(np.abs(g + lam * second_difference_transpose(vbar)).max())
    return r / scale


def _hat_design_index_grid(n: int, interior: np.ndarray) -> np.ndarray:
    # hat basis on the integer grid 0..n-1 with interior knots at the given
    # indices; each column is min(raising ramp, falling ramp) clipped to [0, 1],
    # with infinite sentinel outer neighbors so the boundary hats are one-sided
    knots = np.concatenate(([0], interior, [n - 1])).astype(float)
    gaps = knots[1:] - knots[:-1]
    t = np.arange(n, dtype=float)[:, None]
    k = knots.size
    left = np.empty((n, k))
    right = np.empty((n, k))
    left[:, 0] = 1.0
    right[:, -1] = 1.0
    left[:, 1:] = (t - knots[:-1]) / gaps
    right[:, :-1] = (knots[1:] - t) / gaps
    return np.clip(np.minimum(left, right), 0.0, 1.0)


def _polish(y: np.ndarray, lam: float, active: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Exact minimizer restricted to kinks at ``active`` with fixed signs.

    Solves min ||y - beta||^2 + lam * signs'(D2 beta)_active subject to
    (D2 beta)_i = 0 off the active set, which is a hat-function least
    squares against ``y - (lam/2) D2' s``.
    """
    n = y.size
    s = np.zeros(n - 2)
    s[active] = signs
    target = y - 0.5 * lam * second_difference_transpose(s)
    design = _hat_design_index_grid(n, active + 1)
    theta, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    return design @ theta


def _penta_matvec(v: np.ndarray) -> np.ndarray:
    # multiply by D2 D2', the Toeplitz pentadiagonal with stencil (1, -4, 6, -4, 1)
    out = 6.0 * v
    out[:-1] -= 4.0 * v[1:]
    out[1:] -= 4.0 * v[:-1]
    out[:-2] += v[2:]
    out[2:] += v[:-2]
    return out


def _sub_band(idx: np.ndarray) -> np.ndarray:
    # lower banded form of the principal submatrix of D2 D2' on sorted indices;
    # surviving entries need original distance <= 2, so bandwidth 2 is kept
    nf = idx.size
    ab = np.zeros((3, nf))
    ab[0] = 6.0
    if nf > 1:
        gap = idx[1:] - idx[:-1]
        ab[1, :-1] = np.where(gap == 1, -4.0, np.where(gap == 2, 1.0, 0.0))
    if nf > 2:
        gap = idx[2:] - idx[:-2]
        ab[2, :-2] = np.where(gap == 2, 1.0, 0.0)
    return ab


def _bvls_penta(c: np.ndarray, max_outer: int, state0=None, v0=None):
    """Bounded-variable least squares on the dual normal equations.

    Minimizes ``(1/2) v' G v - c' v`` over ``|v| <= 1`` with G = D2 D2',
    by the usual two-level active-set sweep: exact banded solve on the
    free variables, ratio step toward it binding whichever variables hit
    a bound first, then release of the worst Kuhn-Tucker violator among
    the bound variables. Returns (v, state, converged) with state -1/0/+1
    for lower bound, free, upper bound.

    A warm start (state0, v0) seeds the sweep with a guessed bound
    pattern; a wrong guess only costs extra sweeps.
    """
    m = c.size
    if state0 is None:
        v = solveh_banded(_ddt_banded(m), c, lower=True, check_finite=False)
        state = np.zeros(m, dtype=int)
        state[v <= -1.0] = -1
        state[v >= 1.0] = 1
        np.clip(v, -1.0, 1.0, out=v)
    else:
        state = state0.copy()
        v = np.where(state == 0, np.clip(v0, -1.0, 1.0), state.astype(float))
    for _ in range(max_outer):
        fidx = np.flatnonzero(state == 0)
        while fidx.size:
            vb = np.where(state == 0, 0.0, v)
            rhs = c[fidx] - _penta_matvec(vb)[fidx]
            x = solveh_banded(_sub_band(fidx), rhs, lower=True, check_finite=False)
            inside = np.abs(x) <= 1.0
            if inside.all():
                v[fidx] = x
                break
            cur = v[fidx]
            step = x - cur
            alpha = np.ones(fidx.size)
            hi = x > 1.0
            lo = x < -1.0
            alpha[hi] = (1.0 - cur[hi]) / step[hi]
            alpha[lo] = (-1.0 - cur[lo]) / step[lo]
            a = max(float(alpha.min()), 0.0)
            v[fidx] = cur + a * step
            hit = alpha <= a + 1e-12
            hit_idx = fidx[hit]
            bound = np.where(step[hit] > 0.0, 1, -1)
            v[hit_idx] = bound.astype(float)
            state[hit_idx] = bound
            fidx = fidx[~hit]
        g = _penta_matvec(v) - c
        gtol = 1e-12 * max(1.0, float(np.abs(g).max()))
        viol = ((state == -1) & (g < -gtol)) | ((state == 1) & (g > gtol))
        if not viol.any():
            return v, state, True
        worst = np.where(viol, np.abs(g), -np.inf)
        state[int(np.argmax(worst))] = 0
    return v, state, False


def _dual_finish(y, lam, u=None):
    """Exact solve via the dual bounded-variable least squares.

    The minimizer of ``||(lambda/2) D2' v - y||^2`` over ``|v| <= 1``
    yields the primal through ``beta = y - (lambda/2) D2' v``; the rows
    the active-set method leaves at a bound are exactly the optimal kink
    candidates, so polishing on them is machine-accurate. The banded
    sweep handles the normal equations in O(n) per step; the dense
    reference solver stays as a safety net for the rare non-terminating
    sweep. With the penalty itself as the splitting weight the running
    ADMM dual ``u`` estimates the optimal v, so it seeds the sweep.
    """
    n = y.size
    m = n - 2
    c = second_difference(y) / (0.5 * lam)
    if u is None:
        v, state, converged = _bvls_penta(c, 3 * m + 30)
    else:
        state0 = np.zeros(m, dtype=int)
        state0[u >= 1.0 - 1e-6] = 1
        state0[u <= -1.0 + 1e-6] = -1
        v, state, converged = _bvls_penta(c, 3 * m + 30, state0, u)
    if converged:
        active = np.flatnonzero(state != 0)
        signs = state[active].astype(float)
    else:
        design = 0.5 * lam * d2_matrix(n).T
        result = lsq_linear(
            design, y, bounds=(-1.0, 1.0), method="bvls", tol=1e-12, max_iter=10 * m
        )
        active = np.flatnonzero(result.active_mask != 0)
        signs = np.asarray(result.active_mask[active], dtype=float)
    return _polish(y, lam, active, signs)


def _solve_core(y, lam, tol, max_iter, z=None, u=None):
    """ADMM with periodic polish; returns (beta, z, u, iterations)."""
    n = y.size
    m = n - 2
    rho = lam
    if z is None:
        z = np.zeros(m)
    if u is None:
        u = np.zeros(m)
    factor = cholesky_banded(_dtd_banded(n, rho), lower=True, check_finite=False)
    two_y = 2.0 * y
    it = 0
    best_res = np.inf
    tried_finisher = False
    while it < max_iter:
        steps = min(_CHUNK, max_iter - it)
        for _ in range(steps):
            beta = cho_solve_banded(
                (factor, True),
                two_y + rho * second_difference_transpose(z - u),
                check_finite=False,
            )
            db = second_difference(beta)
            db_relaxed = _ALPHA * db + (1.0 - _ALPHA) * z
            w = db_relaxed + u
            z = np.sign(w) * np.maximum(np.abs(w) - lam / rho, 0.0)
            u = w - z
            it += 1
        active = np.flatnonzero(z != 0.0)
        polished = _polish(y, lam, active, np.sign(z[active]))
        res = kkt_residual(y, polished, lam)
        if res <= tol:
            return polished, z, u, it
        best_res = min(best_res, res)
        if it >= _ADMM_BUDGET and not tried_finisher:
            tried_finisher = True
            finished = _dual_finish(y, lam, u)
            res = kkt_residual(y, finished, lam)
            if res <= tol:
                return finished, z, u, it
            best_res = min(best_res, res)
    if not tried_finisher:
        finished = _dual_finish(y, lam, u)
        res = kkt_residual(y, finished, lam)
        if res <= tol:
            return finished, z, u, it
        best_res = min(best_res, res)
    raise ConvergenceError(
        f"trend filter did not reach tol={tol:g} within {max_iter} iterations "
        f"(best residual {best_res:g})",
        residual=best_res,
    )


def _make_fit(y, beta, lam, eps_rel, underfilled=False, candidate_indices=None):
    rss = float(np.sum((y - beta) ** 2))
    if candidate_indices is None:
        candidate_indices = _candidates_from_beta(beta, eps_rel)
    return TrendFit(
        beta=beta,
        lam=float(lam),
        rss=rss,
        candidate_indices=candidate_indices,
        underfilled=underfilled,
    )


def solve_tf(
    y,
    lam: float,
    tol: float = TOL_DEFAULT,
    max_iter: int = MAX_ITER_DEFAULT,
    eps_rel: float = EPS_REL_DEFAULT,
) -> TrendFit:
    """Solve the trend-filter problem at one penalty value.

    Returns a TrendFit whose beta satisfies the KKT conditions to the
    relative residual ``tol``. ``candidate_indices`` are populated with
    the relative threshold ``eps_rel``. Raises ConvergenceError, carrying
    the last residual, if ``max_iter`` ADMM iterations are not enough.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise InputError(f"need a 1-d vector with n >= 3, got shape {y.shape}")
    if not np.isfinite(y).all():
        raise InputError("y contains non-finite values")
    if lam < 0:
        raise InputError(f"lambda must be nonnegative, got {lam}")
    if tol <= 0:
        raise InputError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise InputError(f"max_iter must be at least 1, got {max_iter}")
    if lam == 0.0:
        return _make_fit(y, y.copy(), 0.0, eps_rel)
    beta, _, _, _ = _solve_core(y, lam, tol, max_iter)
    return _make_fit(y, beta, lam, eps_rel)


def _candidates_from_beta(beta: np.ndarray, eps_rel: float) -> np.ndarray:
    db = second_difference(beta)
    if db.size == 0:
        return np.zeros(0, dtype=int)
    threshold = eps_rel * max(1.0, float(np.abs(db).max()))
    return np.flatnonzero(np.abs(db) > threshold) + 1


def candidates(fit: TrendFit, eps_rel: float = EPS_REL_DEFAULT) -> np.ndarray:
    """Interior grid indices whose second difference exceeds the threshold.

    A row passes when ``|(D2 beta)_i| > eps_rel * max(1, max_j |(D2 beta)_j|)``;
    row i maps to grid index i+1.
    """
    if eps_rel <= 0:
        raise InputError(f"eps_rel must be positive, got {eps_rel}")
    return _candidates_from_beta(fit.beta, eps_rel)


def search_lambda(
    y,
    k_max: int,
    grid_size: int = GRID_SIZE_DEFAULT,
    eps_rel: float = EPS_REL_DEFAULT,
    tol: float = TOL_DEFAULT,
    max_iter: int = MAX_ITER_DEFAULT,
) -> TrendFit:
    """Pick the grid lambda whose fit carries k_max candidate kinks.

    Walks a geometric grid from lambda_max down to lambda_max * 1e-6 with
    warm starts. Among grid points with exactly k_max candidates the one
    with minimal rss wins (ties go to the smaller lambda). If no point
    hits k_max exactly, the point with the smallest count above k_max and
    minimal rss is taken and its candidate list truncated to the k_max
    largest second differences. If every count falls short, the fit with
    the largest count is returned with ``underfilled`` set.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise InputError(f"need a 1-d vector with n >= 3, got shape {y.shape}")
    n = y.size
    if not 1 <= k_max <= n - 2:
        raise InputError(f"k_max must be in [1, {n - 2}], got {k_max}")
    if grid_size < 2:
        raise InputError(f"grid_size must be at least 2, got {grid_size}")
    if eps_rel <= 0:
        raise InputError(f"eps_rel must be positive, got {eps_rel}")
    lam_top = lambda_max(y)
    if lam_top == 0.0:
        # affine input: no curvature at any penalty
        fit = solve_tf(y, 0.0, tol, max_iter, eps_rel)
        return _make_fit(y, fit.beta, 0.0, eps_rel, underfilled=True)
    ratio = LAMBDA_MIN_RATIO ** (1.0 / (grid_size - 1))
    lambdas = lam_top * ratio ** np.arange(grid_size)
    results = []
    z = u = None
    for lam in lambdas:
        beta, z, u, _ = _solve_core(y, lam, tol, max_iter, z, u)
        cand = _candidates_from_beta(beta, eps_rel)
        rss = float(np.sum((y - beta) ** 2))
        results.append((lam, beta, cand, rss))
    exact = [r for r in results if r[2].size == k_max]
    if exact:
        lam, beta, cand, rss = min(exact, key=lambda r: (r[3], r[0]))
        return _make_fit(y, beta, lam, eps_rel, candidate_indices=cand)
    over = [r for r in results if r[2].size > k_max]
    if over:
        lam, beta, cand, rss = min(over, key=lambda r: (r[2].size, r[3], r[0]))
        db = second_difference(beta)
        magnitudes = np.abs(db[cand - 1])
        keep = cand[np.argsort(-magnitudes, kind="stable")[:k_max]]
        return _make_fit(y, beta, lam, eps_rel, candidate_indices=np.sort(keep))
    lam, beta, cand, rss = min(results, key=lambda r: (-r[2].size, r[3], r[0]))
    return _make_fit(y, beta, lam, eps_rel, candidate_indices=cand, underfilled=True)
