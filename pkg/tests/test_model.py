import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from families import all_families, random_point
from genuniq.apps.sobi import sobi_column, sobi_model
from genuniq.apps.sources import example_column, exp_poly_column, rational_column, vandermonde_column
from genuniq.errors import ModelError, PoleError, TransformSingular
from genuniq.model import (
    ColumnModel,
    FactorModel,
    Primitive,
    Transform,
    apply_transform,
    eval_b,
    eval_r,
    jacobian_b,
    jacobian_f,
    jacobian_r,
)
from genuniq.parser import parse_expr, parse_model, serialize_model
from oracles import example_signal, hilbert_block, mp_central_difference, relative_entry_error

W = np.array([[1, 0, 1], [0, 1, -1], [1, 1, 0]])


def linear_model():
    rows = [parse_expr("x1 + x3"), parse_expr("x2 - x3"), parse_expr("x1 + x2")]
    return ColumnModel.from_rows(rows, 3)


def test_constant_ratio_rows():
    cm = rational_column(0, 0, 5)
    np.testing.assert_allclose(eval_r(cm, [2, 4]), 0.5)


def test_geometric_rows():
    cm = exp_poly_column((0,), 3)
    np.testing.assert_allclose(eval_r(cm, [2, 1]), [2, 4, 8])


def test_rational_rows_give_hilbert_columns():
    N = 6
    cm = rational_column(0, 1, N)
    M = np.column_stack([eval_r(cm, [1, k, 1]) for k in range(N)])
    np.testing.assert_allclose(M, hilbert_block(N), rtol=1e-14)


def test_vandermonde_at_zero_is_all_ones():
    np.testing.assert_allclose(eval_b(vandermonde_column(7), [0.0]), np.ones(7))


def test_identity_transform_eval_b_equals_eval_r():
    cm = rational_column(1, 1, 6)
    x = np.array([0.3, 1.1, 2.0, -0.2])
    np.testing.assert_array_equal(eval_b(cm, x), eval_r(cm, x))


def test_example_matches_direct_trig_form():
    rng = np.random.default_rng(11)
    cm = example_column(12)
    checked = 0
    while checked < 20:
        z = rng.uniform(-2, 2, 6)
        if abs(z[2] + np.arange(1, 13)).min() < 0.05 or abs(np.cos(z[3:5] / 2)).min() < 0.05:
            continue
        np.testing.assert_allclose(eval_b(cm, z), example_signal(z, 12), rtol=1e-10, atol=1e-10)
        checked += 1


def test_linear_model_jacobian_is_w():
    rng = np.random.default_rng(0)
    for _ in range(5):
        np.testing.assert_allclose(jacobian_r(linear_model(), rng.standard_normal(3)), W)


def test_constant_row_has_zero_jacobian():
    cm = ColumnModel.from_rows([parse_expr("3"), parse_expr("x1*x2")], 2)
    J = jacobian_r(cm, [1.0, 2.0])
    np.testing.assert_array_equal(J[0], 0)
    np.testing.assert_allclose(J[1], [2, 1])


def test_sobi_null_vector():
    I = 3
    cm = sobi_column(I)
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.standard_normal(2 * I) + 1j * rng.standard_normal(2 * I)
        v = np.concatenate([x[I:], -x[:I]])
        J = jacobian_r(cm, x)
        assert np.linalg.norm(J @ v) < 1e-10 * np.linalg.norm(J) * np.linalg.norm(v)


def test_jacobian_f_examples():
    np.testing.assert_array_equal(jacobian_f(Transform.identity(3), [1, 2, 3]), np.eye(3))
    assert jacobian_f(Transform.of("tan_half"), [0.0])[0, 0] == pytest.approx(0.5)
    d = np.diag(jacobian_f(example_column(8).transform, np.ones(6)))
    assert np.all(np.abs(d) > 0.1)


def test_transform_singularity():
    with pytest.raises(TransformSingular) as info:
        apply_transform(Transform.of("id", "tan_half"), [0.0, np.pi])
    assert info.value.coord == 2


def test_primitive_validation():
    with pytest.raises(ModelError):
        Primitive("sinh")
    with pytest.raises(ModelError):
        Primitive("affine", (1.0, 0.0))
    f, df, _ = Primitive("affine", (1.0, 2.0)).apply(np.array([3.0]))
    assert (f[0], df[0]) == (7, 2)


def test_pole_guard_raises_instead_of_inf():
    cm = rational_column(0, 1, 4)
    with pytest.raises(PoleError) as info:
        eval_r(cm, [1.0, -2.0, 1.0])  # row 2 divides by -2 + 2
    assert info.value.row == 2
    with pytest.raises(PoleError):
        jacobian_r(cm, [1.0, -2.0, 1.0])


def test_identically_zero_denominator_rejected():
    with pytest.raises(ModelError):
        ColumnModel.from_rows([parse_expr("x1/(x1 - x1)")], 1)


def test_variable_index_checked():
    with pytest.raises(ModelError):
        ColumnModel.from_rows([parse_expr("x3")], 2)


def test_factor_model_dimensions():
    cm = rational_column(1, 1, 6)
    with pytest.raises(ModelError):
        FactorModel(K=3, N=5, R=2, l=4, column=cm)
    m = FactorModel(K=3, N=6, R=2, l=4, column=cm)
    assert m.n_params == 3 * 2 + 2 * 4


def test_sobi_model_round_trip_dims():
    m = sobi_model(3, 5)
    again = parse_model(serialize_model(m))
    assert (again.N, again.l, again.K) == (9, 6, 10)


@pytest.mark.parametrize("name", sorted(all_families()))
def test_jacobian_against_finite_differences(name):
    cm = all_families()[name]
    rng = np.random.default_rng(sorted(all_families()).index(name))
    for _ in range(10):
        x = random_point(cm, rng)
        J = jacobian_r(cm, x)
        assert relative_entry_error(J, mp_central_difference(name, x, cm.N)) < 1e-5


@pytest.mark.parametrize("name", sorted(all_families()))
def test_chain_rule_composition(name):
    cm = all_families()[name]
    rng = np.random.default_rng(7)
    done = 0
    while done < 20:
        z = rng.uniform(-1.5, 1.5, cm.l)
        try:
            Jb = jacobian_b(cm, z)
            Jr = jacobian_r(cm, apply_transform(cm.transform, z))
        except (PoleError, TransformSingular):
            continue
        np.testing.assert_allclose(Jb, Jr @ jacobian_f(cm.transform, z), rtol=1e-9, atol=1e-9 * np.abs(Jb).max())
        done += 1


@pytest.mark.parametrize("name", sorted(all_families()))
def test_model_file_round_trip(name):
    cm = all_families()[name]
    m = FactorModel(K=2, N=cm.N, R=1, l=cm.l, column=cm)
    again = parse_model(serialize_model(m)).column
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = random_point(cm, rng)
        np.testing.assert_allclose(eval_b(again, x), eval_b(cm, x), rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_eval_never_returns_non_finite(a, b):
    cm = rational_column(1, 1, 5)
    try:
        v = eval_r(cm, [1.0, a, b, 1.0])
    except PoleError:
        return
    assert np.all(np.isfinite(v))
