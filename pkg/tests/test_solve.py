import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genuniq.apps.sobi import sobi_column
from genuniq.apps.sources import exp_poly_model, rational_column, rational_model, vandermonde_column
from genuniq.model import eval_b
from genuniq.solve import (
    Decomposition,
    build_b,
    empirical_uniqueness_test,
    levenberg_marquardt,
    match_decompositions,
    project_onto_range,
    random_truth,
    varpro_fit,
    varpro_residual,
)
from oracles import vandermonde_distance


def rosenbrock(x):
    r = np.array([10 * (x[1] - x[0] ** 2), 1 - x[0]])
    J = np.array([[-20 * x[0], 10.0], [-1.0, 0.0]])
    return r, J


def test_lm_solves_rosenbrock_monotonically():
    res = levenberg_marquardt(rosenbrock, np.array([-1.2, 1.0]))
    assert res.converged
    np.testing.assert_allclose(res.x, [1, 1], atol=1e-8)
    assert all(b <= a for a, b in zip(res.costs, res.costs[1:]))


def test_projection_of_exact_member():
    cm = rational_column(1, 1, 8)
    z0 = np.array([0.4 + 0.2j, -1.1, 0.9 - 0.3j, 0.5j])
    res = project_onto_range(cm, eval_b(cm, z0), seed=3)
    assert res.residual < 1e-10
    np.testing.assert_allclose(eval_b(cm, res.zeta), eval_b(cm, z0), rtol=1e-9)


def test_projection_scaled_sobi_point():
    cm = sobi_column(3)
    rng = np.random.default_rng(8)
    z0 = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    lam = 1.7 - 0.6j
    assert project_onto_range(cm, lam * eval_b(cm, z0), seed=1).residual < 1e-8


def test_projection_stays_away_from_vandermonde_range():
    N = 8
    cm = vandermonde_column(N)
    rng = np.random.default_rng(4)
    for trial in range(3):
        z = rng.uniform(-3, 3, 2)
        p = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        v = eval_b(cm, [z[0]]) + eval_b(cm, [z[1]]) + p / np.linalg.norm(p)
        assert vandermonde_distance(v, N) > 0.05
        assert project_onto_range(cm, v, seed=trial, starts=20).residual > 0.05


def test_projection_rejects_non_finite_target():
    with pytest.raises(ValueError):
        project_onto_range(rational_column(1, 1, 4), np.array([1, np.inf, 0, 0]), seed=0)


def _truth(seed, p=1, q=1, N=12, K=5, R=2):
    model, _ = rational_model(p, q, N, K=K, R=R)
    return model, random_truth(model, np.random.default_rng(seed))


def test_varpro_from_truth_is_fixed_point():
    model, truth = _truth(0)
    d = varpro_fit(truth.reconstruct(), model, seed=0, init=[truth.zetas])
    assert d.residual < 1e-10
    assert match_decompositions(truth, d)


def test_varpro_random_starts_reach_small_residual():
    model, truth = _truth(1)
    d = varpro_fit(truth.reconstruct(), model, seed=5, starts=20)
    assert d.residual < 1e-8


def test_varpro_residual_recomputes():
    model, truth = _truth(2)
    Y = truth.reconstruct()
    d = varpro_fit(Y, model, seed=2, starts=3)
    assert abs(d.residual - varpro_residual(Y, build_b(model.column, d.zetas))) < 1e-12


def test_varpro_rejects_underdetermined():
    model, _ = rational_model(1, 1, 12, K=5, R=2)
    wide = model.with_dims(K=2, R=3)
    with pytest.raises(ValueError):
        varpro_fit(np.zeros((2, 12)), wide, seed=0)


def _swap_rescale(d, c):
    A = d.A[:, ::-1].copy()
    B = d.B[:, ::-1].copy()
    A[:, 0] *= c
    B[:, 0] /= c
    return Decomposition(A, d.zetas[::-1], B, d.residual)


def test_match_trivial_indeterminacy():
    _, truth = _truth(3)
    m = match_decompositions(truth, _swap_rescale(truth, 2.5 - 1j))
    assert m.matched and m.permutation == (1, 0) and m.discrepancy < 1e-12
    same = match_decompositions(truth, truth)
    assert same.permutation == (0, 1)
    np.testing.assert_allclose(same.scales, 1)


def test_match_detects_perturbed_parameter():
    model, truth = _truth(4)
    Z = truth.zetas.copy()
    Z[0, 0] += 0.3
    B = build_b(model.column, Z)
    assert not match_decompositions(truth, Decomposition(truth.A, Z, B, 0.0), tol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 0.5))
def test_match_is_symmetric(seed, eps):
    model, truth = _truth(seed % 50)
    rng = np.random.default_rng(seed)
    other = Decomposition(truth.A + eps * rng.standard_normal(truth.A.shape), truth.zetas, truth.B, 0.0)
    a, b = match_decompositions(truth, other), match_decompositions(other, truth)
    assert a.matched == b.matched
    assert abs(a.discrepancy - b.discrepancy) < 1e-12


def test_empirical_rational_consistent():
    model, _ = rational_model(1, 1, 12, K=5, R=2)
    rep = empirical_uniqueness_test(model, seed=0, restarts=10)
    assert rep.verdict == "consistent"
    assert rep.matched == rep.converged >= 3


def test_empirical_exp_poly_consistent():
    model, _ = exp_poly_model(1, (0,), 8, K=4, R=3)
    assert empirical_uniqueness_test(model, seed=0, restarts=10).verdict == "consistent"


def test_empirical_duplicated_truth_is_degenerate():
    model, truth = _truth(6)
    Z = np.vstack([truth.zetas[0], truth.zetas[0]])
    B = build_b(model.column, Z)
    dup = Decomposition(truth.A, Z, B, 0.0, rank_deficient=True)
    rep = empirical_uniqueness_test(model, seed=0, restarts=10, truth=dup)
    assert rep.degenerate and rep.verdict == "inconclusive"


def test_empirical_restart_guard():
    model, _ = rational_model(1, 1, 12, K=5, R=2)
    assert empirical_uniqueness_test(model, seed=0, restarts=1).verdict == "inconclusive"


def test_empirical_is_deterministic():
    model, _ = rational_model(1, 1, 12, K=5, R=2)
    a = empirical_uniqueness_test(model, seed=9, restarts=10).to_dict()
    b = empirical_uniqueness_test(model, seed=9, restarts=10).to_dict()
    assert a == b
