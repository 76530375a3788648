"""Solver-level checks against an independent conic-optimization oracle."""

import numpy as np
import pytest

import oracles
from plfc.errors import ConvergenceError, InputError
from plfc.trend_filter import (
    _bvls_penta,
    candidates,
    d2_matrix,
    kkt_residual,
    lambda_max,
    search_lambda,
    second_difference,
    second_difference_transpose,
    solve_tf,
)


def _wiggly(rng, n):
    # trend plus kinks plus noise, the regime the solver is built for
    t = np.arange(n, dtype=float)
    y = 0.3 * t + 4.0 * np.maximum(t - n / 3, 0.0) / n
    y -= 6.0 * np.maximum(t - 2 * n / 3, 0.0) / n
    return y + rng.normal(0.0, 1.0, n)


def test_second_difference_matches_matrix():
    rng = np.random.default_rng(11)
    for n in (3, 7, 30):
        v = rng.normal(size=n)
        assert np.allclose(second_difference(v), d2_matrix(n) @ v, atol=1e-13)


def test_second_difference_transpose_is_adjoint():
    rng = np.random.default_rng(12)
    for n in (3, 8, 41):
        v = rng.normal(size=n)
        w = rng.normal(size=n - 2)
        lhs = float(second_difference(v) @ w)
        rhs = float(v @ second_difference_transpose(w))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_d2_matrix_stencil():
    d2 = d2_matrix(6)
    assert d2.shape == (4, 6)
    for i in range(4):
        row = np.zeros(6)
        row[i : i + 3] = (1.0, -2.0, 1.0)
        assert np.array_equal(d2[i], row)


def test_lambda_zero_returns_data_exactly():
    rng = np.random.default_rng(13)
    y = rng.normal(size=25)
    fit = solve_tf(y, 0.0)
    assert np.array_equal(fit.beta, y)
    assert fit.rss == 0.0
    assert fit.lam == 0.0


def test_lambda_at_and_above_max_gives_affine_fit():
    rng = np.random.default_rng(14)
    y = _wiggly(rng, 40)
    t = np.arange(40, dtype=float)
    slope, intercept = np.polyfit(t, y, 1)
    affine = intercept + slope * t
    lmax = lambda_max(y)
    for lam in (lmax, 2.5 * lmax):
        fit = solve_tf(y, lam)
        assert np.abs(second_difference(fit.beta)).max() <= 1e-7
        assert np.abs(fit.beta - affine).max() <= 1e-6
        assert fit.candidate_indices.size == 0


def test_lambda_max_matches_dense_formula():
    rng = np.random.default_rng(15)
    for n in (10, 51):
        y = rng.normal(size=n)
        d2 = d2_matrix(n)
        dense = 2.0 * np.abs(np.linalg.solve(d2 @ d2.T, d2 @ y)).max()
        assert np.isclose(lambda_max(y), dense, rtol=1e-10)


def test_matches_conic_oracle_across_regimes():
    rng = np.random.default_rng(16)
    for trial in range(6):
        n = (20, 51, 80)[trial % 3]
        y = _wiggly(rng, n)
        lam = lambda_max(y) * 10.0 ** rng.uniform(-3.0, -0.3)
        fit = solve_tf(y, lam)
        ref = oracles.solve_tf_reference(y, lam)
        assert np.abs(fit.beta - ref).max() <= 1e-6
        ours = oracles.tf_objective(y, fit.beta, lam)
        theirs = oracles.tf_objective(y, ref, lam)
        assert ours <= theirs + 1e-8 * max(1.0, theirs)


def test_kkt_residual_meets_tolerance():
    rng = np.random.default_rng(17)
    for _ in range(5):
        y = _wiggly(rng, 51)
        lam = lambda_max(y) * 10.0 ** rng.uniform(-3.0, -0.5)
        fit = solve_tf(y, lam, tol=1e-8)
        assert kkt_residual(y, fit.beta, lam) <= 1e-8


def test_solution_scaling_equivariance():
    rng = np.random.default_rng(18)
    y = _wiggly(rng, 51)
    lam = 0.05 * lambda_max(y)
    base = solve_tf(y, lam).beta
    for c in (3.0, 0.25):
        scaled = solve_tf(c * y, c * lam).beta
        assert np.abs(scaled - c * base).max() <= 1e-6 * max(1.0, abs(c))


def test_affine_shift_passes_through():
    # the penalty annihilates affine trends, so adding one shifts the fit by it
    rng = np.random.default_rng(19)
    y = _wiggly(rng, 51)
    t = np.arange(51, dtype=float)
    lam = 0.05 * lambda_max(y)
    base = solve_tf(y, lam).beta
    shifted = solve_tf(y + 7.0 - 0.4 * t, lam).beta
    assert np.abs(shifted - (base + 7.0 - 0.4 * t)).max() <= 1e-6


def test_candidates_mark_exact_kinks_of_pl_data():
    t = np.arange(51, dtype=float)
    y = np.minimum(2.0 * t, 20.0) + np.maximum(t - 30.0, 0.0)
    fit = solve_tf(y, 0.0)
    assert fit.candidate_indices.tolist() == [10, 30]
    # a light penalty shrinks but keeps the true kinks detectable
    light = solve_tf(y, 1e-3 * lambda_max(y))
    assert {10, 30} <= set(light.candidate_indices.tolist())


def test_candidates_eps_rel_validation():
    fit = solve_tf(np.arange(10.0) ** 2, 1.0)
    with pytest.raises(InputError):
        candidates(fit, eps_rel=0.0)
    with pytest.raises(InputError):
        candidates(fit, eps_rel=-1e-3)


def test_convergence_error_carries_residual():
    rng = np.random.default_rng(20)
    y = _wiggly(rng, 51)
    with pytest.raises(ConvergenceError) as err:
        solve_tf(y, 0.1 * lambda_max(y), tol=1e-30, max_iter=60)
    assert err.value.residual is not None
    assert float(err.value.residual) > 0.0


def test_input_validation():
    with pytest.raises(InputError):
        solve_tf(np.array([1.0, 2.0]), 1.0)
    with pytest.raises(InputError):
        solve_tf(np.array([1.0, np.nan, 2.0, 3.0]), 1.0)
    with pytest.raises(InputError):
        solve_tf(np.arange(10.0), -1.0)
    with pytest.raises(InputError):
        solve_tf(np.arange(10.0), 1.0, tol=0.0)
    with pytest.raises(InputError):
        solve_tf(np.arange(10.0), 1.0, max_iter=0)


def test_search_lambda_fills_candidate_budget_on_rich_data():
    rng = np.random.default_rng(21)
    y = _wiggly(rng, 51)
    fit = search_lambda(y, k_max=10)
    idx = fit.candidate_indices
    assert idx.size == 10
    assert not fit.underfilled
    assert np.array_equal(idx, np.unique(idx))
    assert idx.min() >= 1 and idx.max() <= 49


def test_search_lambda_flags_underfilled_on_affine_data():
    y = 3.0 + 0.5 * np.arange(51, dtype=float)
    fit = search_lambda(y, k_max=5)
    assert fit.underfilled
    assert fit.candidate_indices.size == 0


def test_search_lambda_respects_budget():
    rng = np.random.default_rng(22)
    for k_max in (1, 3, 6):
        y = _wiggly(rng, 51)
        fit = search_lambda(y, k_max=k_max)
        assert fit.candidate_indices.size <= k_max


def _dual_objective(v, c):
    g = 6.0 * v.copy()
    g[:-1] -= 4.0 * v[1:]
    g[1:] -= 4.0 * v[:-1]
    g[:-2] += v[2:]
    g[2:] += v[:-2]
    return 0.5 * float(v @ g) - float(c @ v)


def test_banded_box_solver_matches_scipy_reference():
    # the finisher's box-constrained dual solve against scipy's generic BVLS
    from scipy.optimize import lsq_linear

    rng = np.random.default_rng(23)
    for trial in range(25):
        n = int(rng.integers(5, 33))
        y = rng.normal(0.0, 10.0, n)
        lam = 10.0 ** rng.uniform(-1.0, 2.0)
        c = second_difference(y) / (0.5 * lam)
        m = c.size
        v, state, converged = _bvls_penta(c, max_outer=3 * m + 30)
        assert converged
        assert np.abs(v).max() <= 1.0 + 1e-12
        ref = lsq_linear(
            0.5 * lam * d2_matrix(n).T, y, bounds=(-1.0, 1.0), method="bvls", tol=1e-12
        )
        ours = _dual_objective(v, c)
        theirs = _dual_objective(ref.x, c)
        scale = max(1.0, abs(theirs))
        assert ours <= theirs + 1e-9 * scale
        assert abs(ours - theirs) <= 1e-8 * scale


def test_banded_box_solver_accepts_warm_starts():
    rng = np.random.default_rng(24)
    for _ in range(10):
        n = int(rng.integers(6, 30))
        c = rng.normal(0.0, 5.0, n - 2)
        m = c.size
        cold, _, ok_cold = _bvls_penta(c, max_outer=3 * m + 30)
        assert ok_cold
        state0 = rng.integers(-1, 2, m).astype(np.int8)
        v0 = rng.uniform(-2.0, 2.0, m)
        warm, _, ok_warm = _bvls_penta(c, max_outer=3 * m + 30, state0=state0, v0=v0)
        assert ok_warm
        assert abs(_dual_objective(warm, c) - _dual_objective(cold, c)) <= 1e-8 * max(
            1.0, abs(_dual_objective(cold, c))
        )
