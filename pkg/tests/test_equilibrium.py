import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import homogeneous
from gestalt_nash import (
    BrSolverConfig,
    SecurityGame,
    brne_direct,
    brne_iterate,
    effective_system,
    rational_ne,
)
from gestalt_nash.equilibrium import SingularSystemError, full_attention, solve_brne
from gestalt_nash.scenarios import build_scenario, resolve_config
from oracles import random_game_arrays


def uniform_m(n, value):
    m = np.full((n, n), value)
    np.fill_diagonal(m, 0.0)
    return m


def test_effective_system_full_and_zero(hom_game):
    Rs, r = effective_system(hom_game, full_attention(10))
    assert np.all(np.diag(Rs) == 20)
    off = Rs[~np.eye(10, dtype=bool)]
    assert np.all(off == -1)
    Rs0, _ = effective_system(hom_game, np.zeros((10, 10)))
    assert np.array_equal(Rs0, np.diag(np.full(10, 20.0)))
    Rs3, _ = effective_system(hom_game, uniform_m(10, 1 / 3))
    assert np.allclose(Rs3[~np.eye(10, dtype=bool)], -1 / 3)


def test_brne_direct_homogeneous(hom_game):
    assert np.allclose(brne_direct(hom_game, uniform_m(10, 1 / 3)), 25 / 17, atol=1e-12)
    assert np.allclose(brne_direct(hom_game, full_attention(10)), 25 / 11, atol=1e-12)


def test_brne_direct_two_group_reported_cognition():
    game, labels = build_scenario(resolve_config({"kind": "two-group"}))
    g1 = np.array([lab == "G1" for lab in labels])
    m = np.zeros((15, 15))
    m[np.ix_(g1, g1)] = 0.75
    m[np.ix_(~g1, g1)] = 0.6
    np.fill_diagonal(m, 0.0)
    u = brne_direct(game, m)
    assert np.allclose(u[g1], 40 / 17, atol=1e-12)
    assert np.allclose(u[~g1], 545 / 340, atol=1e-12)


def test_brne_direct_residual():
    rng = np.random.default_rng(3)
    R, r = random_game_arrays(rng, 12)
    game = SecurityGame(R, r)
    m = rng.uniform(0, 1, (12, 12))
    u = brne_direct(game, m)
    Rs, _ = effective_system(game, m)
    assert np.max(np.abs(Rs @ u - r)) < 1e-9 * (1 + np.max(np.abs(r)))


def test_singular_system_raises():
    game = SecurityGame([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0])
    with pytest.raises(SingularSystemError):
        brne_direct(game, full_attention(2))


def test_iterate_homogeneous_from_zero(hom_game):
    for method in ("jacobi", "gauss-seidel"):
        cfg = BrSolverConfig(method=method, tol=1e-10, initial=np.zeros(10))
        u, trace = brne_iterate(hom_game, uniform_m(10, 1 / 3), cfg)
        assert trace.converged
        assert np.allclose(u, 25 / 17, atol=1e-9)


def test_decoupled_converges_after_one_sweep():
    rng = np.random.default_rng(0)
    R, r = random_game_arrays(rng, 5)
    game = SecurityGame(R, r)
    cfg = BrSolverConfig(method="jacobi", initial=rng.uniform(0, 9, 5))
    u, trace = brne_iterate(game, np.zeros((5, 5)), cfg)
    assert np.allclose(trace.iterates[1], r / np.diag(R))
    assert trace.iterations_used == 2  # the second sweep only confirms the fixed point
    assert np.allclose(u, r / np.diag(R))


def test_iterate_rejects_direct(hom_game):
    with pytest.raises(ValueError):
        brne_iterate(hom_game, full_attention(10), BrSolverConfig(method="direct"))


def test_config_validation():
    with pytest.raises(ValueError):
        BrSolverConfig(tol=0)
    with pytest.raises(ValueError):
        BrSolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        BrSolverConfig(method="newton")


def test_max_iters_reports_non_convergence(hom_game):
    cfg = BrSolverConfig(method="jacobi", max_iters=2, initial=np.zeros(10))
    with pytest.warns(RuntimeWarning):
        _, trace = brne_iterate(hom_game, full_attention(10), cfg)
    assert not trace.converged


def test_rational_ne_values(hom_game):
    assert np.allclose(rational_ne(hom_game), 25 / 11, atol=1e-10)
    single = SecurityGame([[4.0]], [3.0])
    assert rational_ne(single)[0] == pytest.approx(0.75)


def test_rational_ne_heterogeneous_ranking():
    game, _ = build_scenario(resolve_config({"kind": "heterogeneous-sine"}))
    u = rational_ne(game)
    assert np.all(u > 0)
    assert set(np.argsort(u)[-3:].tolist()) == {4, 8, 9}


games = st.builds(
    lambda seed, n: (np.random.default_rng(seed), *random_game_arrays(np.random.default_rng(seed), n)),
    st.integers(0, 2**32 - 1),
    st.integers(1, 10),
)


@given(games)
def test_methods_agree(case):
    rng, R, r = case
    n = len(r)
    game = SecurityGame(R, r)
    m = rng.uniform(0, 1, (n, n))
    tol = 1e-11
    ref = brne_direct(game, m)
    for method in ("jacobi", "gauss-seidel"):
        u, trace = brne_iterate(game, m, BrSolverConfig(method=method, tol=tol, max_iters=100_000))
        assert trace.converged
        assert np.max(np.abs(u - ref)) < 10 * tol * max(1.0, np.max(ref))


@given(games)
def test_solution_positive(case):
    rng, R, r = case
    n = len(r)
    u = brne_direct(SecurityGame(R, r), rng.uniform(0, 1, (n, n)))
    assert np.all(u > 0)


@given(games, st.floats(1e-3, 0.5))
def test_monotone_in_attention(case, bump):
    rng, R, r = case
    n = len(r)
    if n < 2:
        return
    game = SecurityGame(R, r)
    m = rng.uniform(0, 0.5, (n, n))
    u = brne_direct(game, m)
    i, j = rng.choice(n, 2, replace=False)
    m2 = m.copy()
    m2[i, j] += bump
    u2 = brne_direct(game, m2)
    assert np.all(u2 >= u - 1e-12 * np.max(u))


@given(games)
def test_jacobi_from_zero_nondecreasing(case):
    rng, R, r = case
    n = len(r)
    game = SecurityGame(R, r)
    cfg = BrSolverConfig(method="jacobi", tol=1e-10, initial=np.zeros(n), max_iters=100_000)
    _, trace = brne_iterate(game, rng.uniform(0, 1, (n, n)), cfg)
    it = np.array(trace.iterates)
    assert np.all(np.diff(it, axis=0) >= -1e-14 * np.max(it))


def test_solve_brne_dispatch(hom_game):
    u, trace = solve_brne(hom_game, full_attention(10))
    assert trace.converged and np.allclose(u, 25 / 11)


def test_homogeneous_helper_values():
    assert np.allclose(rational_ne(homogeneous(n=3, ret=10.0)), 10 / 18)
