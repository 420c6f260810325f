import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import index_by_rank
from pencildae import (IndexConfig, certify_regular, index_by_ascent_descent, index_by_growth,
                       index_report, operator_part, wong_ladder)
from pencildae.constructions import random_weierstrass, weierstrass_pencil
from pencildae.subspace import Subspace
from pencildae.wong import (INFINITE, fredholm_criterion, translation_defect,
                            wong_translation_check)

E1 = np.array([[1.0], [0.0]])


def test_ladder_jordan2(jordan2):
    L = wong_ladder(operator_part(jordan2))
    assert L.dims_N[:3] == [0, 1, 2] and L.dims_R[:3] == [2, 1, 0]
    assert L.N[1].equals(Subspace(E1)) and L.R[1].equals(Subspace(E1))
    assert L.index == 2


def test_ladder_zero_operator():
    p = certify_regular(np.array([[0.0]]), np.array([[1.0]]))
    L = wong_ladder(operator_part(p))
    assert L.dims_N[1] == 1 and L.dims_R[1] == 0 and L.index == 1


def test_ladder_invertible_E():
    p = certify_regular(np.eye(2), np.diag([1.0, 2.0]))
    L = wong_ladder(operator_part(p))
    assert set(L.dims_N) == {0} and set(L.dims_R) == {2} and L.index == 0


def test_translation_at_mu_and_elsewhere(jordan2):
    L = wong_ladder(operator_part(jordan2))
    assert wong_translation_check(jordan2, L, [jordan2.mu])
    assert wong_translation_check(jordan2, L, [5.0])


def test_translation_detects_corrupted_ladder(jordan2):
    L = wong_ladder(operator_part(jordan2))
    bad = Subspace(np.array([[0.0], [1.0]]))
    corrupted = type(L)(L.N, (L.R[0], bad) + L.R[2:], L.stationary_at_N, L.stationary_at_R,
                        L.rank_tol)
    assert not wong_translation_check(jordan2, corrupted, [5.0])


def test_growth_invertible_E():
    p = certify_regular(np.eye(2), np.diag([1.0, 2.0]))
    g = index_by_growth(p)
    assert g.slope == pytest.approx(-1.0, abs=0.05) and g.m == 0


def test_growth_jordan2(jordan2):
    g = index_by_growth(jordan2)
    assert g.slope == pytest.approx(1.0, abs=0.05) and g.m == 2


def test_growth_constant_resolvent():
    p = certify_regular(np.array([[0.0]]), np.array([[1.0]]))
    g = index_by_growth(p)
    assert g.slope == pytest.approx(0.0, abs=1e-12) and g.m == 1


def test_ascent_descent_examples(jordan2):
    assert index_by_ascent_descent(operator_part(jordan2)) == 2
    assert index_by_ascent_descent(operator_part(certify_regular(np.eye(2), np.diag([1.0, 2.0])))) == 0
    assert index_by_ascent_descent(operator_part(certify_regular(np.array([[0.0]]), np.array([[1.0]])))) == 1


def test_ascent_descent_infinite_when_k_max_too_small(jordan2):
    assert index_by_ascent_descent(operator_part(jordan2), k_max=1) == INFINITE


def test_fredholm_examples(jordan2):
    L = wong_ladder(operator_part(jordan2))
    assert fredholm_criterion(jordan2, L, 2)
    assert not fredholm_criterion(jordan2, L, 1)
    p = certify_regular(np.eye(2), np.diag([1.0, 2.0]))
    assert fredholm_criterion(p, wong_ladder(operator_part(p)), 0)


def test_report_weierstrass_example(rng):
    E, A = weierstrass_pencil(np.diag([1.0, 2.0, 3.0]), [2], rng=rng)
    rep = index_report(certify_regular(E, A))
    assert rep.m_wong == rep.m_ascent_descent == 2
    assert rep.agreement and rep.decomposition_ok and rep.fredholm_ok


def test_report_scalar_and_degenerate(rng):
    rep = index_report(certify_regular(np.array([[0.0]]), np.array([[1.0]])))
    assert rep.m_wong == rep.m_growth == rep.m_ascent_descent == 1
    rep = index_report(certify_regular(np.eye(3), rng.standard_normal((3, 3))))
    assert rep.m_wong == 0 and rep.m_ascent_descent == 0 and rep.degenerate


def test_report_dict_encoding(jordan2):
    d = index_report(jordan2).to_dict()
    assert d["m_wong"] == 2 and d["dims_N"][:3] == [0, 1, 2]
    assert set(d["growth_fit"]) == {"slope", "residual", "radii"}


@given(st.integers(0, 10_000))
def test_ladder_monotone_and_stationary(seed):
    rng = np.random.default_rng(seed)
    E, A, d, _ = random_weierstrass(rng, n_max=12)
    p = certify_regular(E, A)
    L = wong_ladder(operator_part(p), full=True)
    for k in range(L.levels - 1):
        assert L.N[k + 1].contains_subspace(L.N[k], 1e-6)
        assert L.R[k].contains_subspace(L.R[k + 1], 1e-6)
    m = L.index
    assert m == d
    assert len(set(L.dims_N[m:])) == 1 and len(set(L.dims_R[m:])) == 1
    # first k with R_k = R_{k+1} equals the index
    first = next(k for k in range(L.levels - 1) if L.R[k].equals(L.R[k + 1], 1e-6))
    assert first == m
    assert L.dims_N[m] + L.dims_R[m] == p.n


@given(st.integers(0, 10_000))
def test_translation_invariance_random(seed):
    rng = np.random.default_rng(seed)
    E, A, d, eigs = random_weierstrass(rng, n_max=10)
    p = certify_regular(E, A)
    L = wong_ladder(operator_part(p))
    ss = 5 * (rng.standard_normal(5) + 1j * rng.standard_normal(5)) + 20
    assert max(translation_defect(p, L, s) for s in ss) <= 1e-6


@given(st.integers(0, 10_000))
def test_index_matches_rank_oracle(seed):
    rng = np.random.default_rng(seed)
    E, A, d, _ = random_weierstrass(rng, n_max=12)
    p = certify_regular(E, A)
    rep = index_report(p)
    assert rep.m_wong == rep.m_ascent_descent == index_by_rank(E, A, p.mu) == d
    assert rep.agreement


def test_config_radii_override(jordan2):
    rep = index_report(jordan2, IndexConfig(radii=(10.0, 100.0, 1000.0)))
    assert rep.growth.radii == (10.0, 100.0, 1000.0) and rep.m_growth == 2
