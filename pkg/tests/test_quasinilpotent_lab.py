import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import fourier_exact, power_norm_dense, volterra_loops
from pencildae import (NotInRange, NotSquareSummable, l2_fourier_solve, linf_condition,
                       make_volterra, semigroup_solution_check, shift_semigroup, taylor_solve,
                       volterra_norm_asymptotic)
from pencildae.qnlab import QNModel, power_norms, series_bound_check, user_model

# dense spectral norms of the explicit-loop matrix, n = 2000 (k = 1, 5, 15) and n = 500 (k = 1)
FROZEN_N2000 = {1: 0.6366197396426589, 5: 0.52622101806621 / 120,
                15: 0.5085006005241544 / math.factorial(15)}
FROZEN_N500_K1 = 0.6366192487687198


def test_volterra_n1():
    np.testing.assert_array_equal(make_volterra(1).T, [[0.5]])


def test_volterra_matches_loop_construction():
    for n in (1, 7, 40):
        np.testing.assert_array_equal(make_volterra(n).T, volterra_loops(n))
        np.testing.assert_array_equal(make_volterra(n, True).T, volterra_loops(n, True))


def test_volterra_integrates_constants():
    m = make_volterra(200)
    assert np.max(np.abs(m.apply(np.ones(200)) - m.grid)) <= m.h


def test_volterra_spectral_radius():
    m = make_volterra(400)
    assert m.spectral_radius() == pytest.approx(1 / 800)
    np.testing.assert_allclose(np.diag(m.T), 1 / 800)


def test_fast_apply_matches_dense(rng):
    for neg in (False, True):
        m = make_volterra(37, neg)
        U = rng.standard_normal((37, 3))
        np.testing.assert_allclose(m.apply(U), m.T @ U, atol=1e-15)
        np.testing.assert_allclose(m.apply_adjoint(U), m.T.T @ U, atol=1e-15)


def test_user_model_rejects_non_quasinilpotent():
    with pytest.raises(ValueError):
        user_model(np.eye(2))
    assert user_model(np.diag([1.0, 1.0], -1)).n == 3


def test_shift_semigroup_examples():
    n = 400
    m = make_volterra(n)
    u = np.sin(3 * m.grid)
    np.testing.assert_array_equal(shift_semigroup(u, 0.0), u)
    np.testing.assert_array_equal(shift_semigroup(u, 1.0), 0 * u)
    np.testing.assert_array_equal(shift_semigroup(u, 1.7), 0 * u)
    ind = (m.grid < 0.5).astype(float)
    v = shift_semigroup(ind, 0.25)
    expected = ((m.grid > 0.25) & (m.grid < 0.75)).astype(float)
    assert np.sum(np.abs(v - expected)) <= 2


def test_shift_semigroup_composes():
    m = make_volterra(100)
    u = m.grid ** 2
    np.testing.assert_array_equal(shift_semigroup(shift_semigroup(u, 0.2), 0.3),
                                  shift_semigroup(u, 0.5))


def test_semigroup_check():
    m = make_volterra(400, negated=True)
    times = np.arange(0, 1.2 + 1e-12, 1e-3)
    assert semigroup_solution_check(m, np.zeros(400), times).max_residual == 0
    rep = semigroup_solution_check(m, m.grid * (1 - m.grid), times)
    assert rep.max_residual <= 5e-3
    with pytest.raises(ValueError):
        semigroup_solution_check(make_volterra(10), np.zeros(10), times)


def test_linf_zero_and_contrast():
    neg, pos = make_volterra(200, True), make_volterra(200)
    x0 = neg.grid * (1 - neg.grid)
    assert linf_condition(neg, 0 * x0).score == 0
    r = linf_condition(neg, x0)
    assert r.bounded and not r.growth_flag and r.score <= 1.05 * r.x0_norm
    r = linf_condition(pos, x0)
    assert r.growth_flag and not r.bounded


def test_laplace_bound_against_semigroup_sup():
    # ||[(T - s)^{-1} T]^{n+1} x0|| stays below the sup norm of the orbit T_t x0
    m = make_volterra(300, True)
    x0 = np.sin(np.pi * m.grid) ** 2
    orbit_sup = max(m.norm(shift_semigroup(x0, t)) for t in np.linspace(0, 1, 101))
    r = linf_condition(m, x0, n_max=32)
    assert r.score <= 1.01 * orbit_sup


def test_series_bound():
    m = make_volterra(80)
    s0 = 2.5 * np.linalg.norm(m.T, 2)
    for s in (s0, 2 * s0, 10 * s0):
        lhs, rhs = series_bound_check(m, s)
        assert lhs <= rhs
    with pytest.raises(ValueError):
        series_bound_check(m, np.linalg.norm(m.T, 2))


def test_fourier_zero_rhs_gives_zero():
    m = make_volterra(100, True)
    sol, traj = l2_fourier_solve(m, np.zeros(100), 1.0, 32)
    assert np.all(sol.c == 0) and np.all(traj.states == 0)


def test_fourier_boundary_and_oracle():
    m = make_volterra(100, True)
    y = m.apply(np.sin(np.pi * m.grid))
    t = (np.arange(400) + 0.5) / 400
    sol, traj = l2_fourier_solve(m, y, 1.0, 256, t)
    assert sol.boundary_defect <= 1e-6
    assert sol.dae_residual <= math.sqrt(sol.ell2_tail) + 1e-8
    np.testing.assert_allclose(sol.coeff(0), y / 1.0)
    X = fourier_exact(m.T, y, 1.0, t)
    err = math.sqrt(np.mean(m.norm(traj.states - X, axis=1) ** 2))
    assert err <= 2 * math.sqrt(sol.ell2_tail)


def test_fourier_coefficients_definition(rng):
    m = make_volterra(50, True)
    # smooth data; rough w makes ||c_k|| grow over such a short k window
    w = np.sin(np.outer(m.grid, np.arange(1, 4)) * np.pi) @ rng.standard_normal(3)
    y = m.apply(w)
    sol, _ = l2_fourier_solve(m, y, 2.0, 16)
    for k in (-16, -3, 0, 5, 16):
        M = np.eye(50) - 2j * np.pi * k / 2.0 * m.T
        np.testing.assert_allclose(M @ sol.coeff(k), y / 2.0, atol=1e-12)


def test_fourier_linearity_uniqueness_closure(rng):
    m = make_volterra(80, True)
    y1, y2 = m.apply(rng.standard_normal(80)), m.apply(rng.standard_normal(80))
    t = np.linspace(0.05, 0.95, 19)
    a, ta = l2_fourier_solve(m, y1, 1.0, 64, t)
    b, tb = l2_fourier_solve(m, y2, 1.0, 64, t)
    c, tc = l2_fourier_solve(m, 2 * y1 - 3 * y2, 1.0, 64, t)
    assert np.linalg.norm(tc.states - (2 * ta.states - 3 * tb.states)) <= \
        1e-9 * np.linalg.norm(tc.states)
    d, td = l2_fourier_solve(m, y1, 1.0, 64, t)
    np.testing.assert_array_equal(td.states, ta.states)
    # T x solves the boundary problem with data T y
    e, te = l2_fourier_solve(m, m.apply(y1), 1.0, 64, t)
    assert np.linalg.norm(te.states - m.apply(ta.states.T).T) <= 1e-9 * np.linalg.norm(te.states)


def test_fourier_not_in_range():
    T = np.diag([1.0, 1.0], -1)
    with pytest.raises(NotInRange):
        l2_fourier_solve(user_model(T), np.array([1.0, 0.0, 0.0]), 1.0, 16)


def test_fourier_not_square_summable():
    # a large spectral radius makes ||c_k|| grow in |k| over the window
    big = QNModel("user_matrix", np.array([[1e-4j]]))
    with pytest.raises(NotSquareSummable):
        l2_fourier_solve(big, np.array([1.0]), 1.0, 16)


def test_fourier_rejects_small_kmax():
    with pytest.raises(ValueError):
        l2_fourier_solve(make_volterra(10, True), np.zeros(10), 1.0, 4)


def test_taylor_zero():
    sol = taylor_solve(make_volterra(50, True), np.zeros(50), 10)
    assert all(np.all(c == 0) for c in sol.coeffs) and sol.radius_estimate == math.inf


def test_taylor_nilpotent_not_in_range():
    with pytest.raises(NotInRange) as ei:
        taylor_solve(user_model(np.diag([1.0, 1.0], -1)), np.array([1.0, 0.0, 0.0]), 5)
    assert ei.value.step == 1


def test_taylor_power_oracle():
    m = make_volterra(400, True)
    w = np.sin(np.pi * m.grid)
    x0 = m.apply(m.apply(m.apply(w)))
    sol = taylor_solve(m, x0, 3)
    assert np.max(sol.recursion_defects(m)) <= 1e-9
    # backward form of the oracle x_k = T^(3-k) w / k!: k! T^k x_k = x0
    for k in range(4):
        back = sol.coefficient(k)
        for _ in range(k):
            back = m.apply(back)
        assert m.norm(math.factorial(k) * back - x0) <= 1e-9 * m.norm(x0)
    np.testing.assert_allclose(sol.coefficient(0), x0)
    x1 = m.apply(m.apply(w))
    assert m.norm(sol.coefficient(1) - x1) <= 1e-6 * m.norm(x1)


def test_taylor_log_norms_avoid_overflow():
    m = make_volterra(200, True)
    sol = taylor_solve(m, np.ones(200), 200)
    assert np.all(np.isfinite(sol.log_norms))
    assert np.max(sol.recursion_defects(m)) <= 1e-9
    assert sol.window == (151, 200)
    if sol.log_norms[-1] > 700:
        from pencildae import CoefficientOverflow
        with pytest.raises(CoefficientOverflow):
            sol.coefficient(200)


def test_power_norms_routes_agree():
    big = make_volterra(600)
    pn = power_norms(big, 3)
    for k in (1, 2, 3):
        assert pn[k - 1] == pytest.approx(power_norm_dense(big.T, k), rel=1e-10)


def test_volterra_norm_k1_frozen():
    (k, f, a), = volterra_norm_asymptotic(500, [1])
    assert f == pytest.approx(FROZEN_N500_K1, rel=1e-10)
    assert f == pytest.approx(2 / math.pi, rel=1e-2)


def test_volterra_norm_asymptotic_frozen():
    rows = volterra_norm_asymptotic(2000, [1, 5, 15])
    for k, f, a in rows:
        assert f == pytest.approx(math.factorial(k) * FROZEN_N2000[k], rel=1e-9)
        assert a == pytest.approx(k * FROZEN_N2000[k] ** (1 / k), rel=1e-9)


def test_volterra_norm_requires_fine_grid():
    with pytest.raises(ValueError):
        volterra_norm_asymptotic(100, [5])


@given(st.integers(2, 60), st.floats(0.0, 2.0))
def test_shift_is_contraction(n, t):
    u = np.cos(np.arange(n))
    m = make_volterra(n)
    assert m.norm(shift_semigroup(u, t)) <= m.norm(u) + 1e-12
