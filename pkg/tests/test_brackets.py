import numpy as np # type: ignore
import pytest # type: ignore
from hypothesis import given, settings, strategies as st # type: ignore

from models.params import ModelParams
from services.brackets import (
    ATOMS,
    RHO,
    SIGMA,
    X,
    Y,
    Z,
    PolyVectorField,
    build_hierarchy,
    commutator_of_flows,
    degree_n,
    lie_bracket,
    lorenz_fields,
    noise_fields,
    numeric_values,
    spanning_test,
)

a1, a2, a3 = ATOMS
MONOMIALS = (1, X, Y, Z, X * X, Y * Y, Z * Z, X * Y, X * Z, Y * Z)

coefficients = st.lists(st.integers(-3, 3), min_size=3 * len(MONOMIALS), max_size=3 * len(MONOMIALS))


def _field(coeffs) -> PolyVectorField:
    n = len(MONOMIALS)
    return PolyVectorField.of([
        sum(c * m for c, m in zip(coeffs[j * n:(j + 1) * n], MONOMIALS)) for j in range(3)
    ])


def test_first_bracket_with_x_noise():
    F, (G1, _, _) = lorenz_fields(None, active=[1, 2, 3])
    bracket = lie_bracket(G1, F)
    assert bracket.label == "[G1,F]"
    assert bracket == PolyVectorField.of([-a1 * SIGMA, a1 * (RHO - Z), a1 * Y])


def test_second_brackets_are_constant():
    F, (G1, G2, G3) = lorenz_fields(None, active=[1, 2, 3])
    first = lie_bracket(G1, F)
    assert lie_bracket(G2, first) == PolyVectorField.of([0, 0, a1 * a2])
    assert lie_bracket(G3, first) == PolyVectorField.of([0, -a1 * a3, 0])


def test_degree_n():
    F, (G1, G2, _) = lorenz_fields(None, active=[1, 2, 3])
    assert degree_n(G1, F) == 1
    assert degree_n(G2, PolyVectorField.of([Y * Y, 0, X])) == 2
    assert degree_n(G1, PolyVectorField.of([0, 0, 0])) == 0
    with pytest.raises(ValueError):
        degree_n(F, G1)


@pytest.mark.parametrize("gammas, spans", [
    ({"gamma1": 1.0, "gamma2": 1.0}, True),
    ({"gamma1": 1.0, "gamma3": 1.0}, True),
    ({"gamma1": 1.0}, False),
])
def test_spanning(gammas, spans):
    params = ModelParams(sigma=10.0, rho=28.0, beta=0.0, **gammas)
    F, noise = lorenz_fields(params)
    result = spanning_test(build_hierarchy(F, noise, max_level=4))
    assert result.spans is spans
    if spans:
        assert len(result.basis) == 3
        assert all(f.is_constant() for f in result.basis)


def test_hierarchy_levels_are_cumulative():
    F, noise = lorenz_fields(None, active=[1, 2])
    h = build_hierarchy(F, noise, max_level=3)
    assert [level.level for level in h.levels] == [0, 1, 2, 3]
    for before, after in zip(h.levels, h.levels[1:]):
        assert set(before.odd) <= set(after.odd)
        assert set(before.even) <= set(after.even)
    assert h.to_dict()["drift"]["label"] == "F"


def test_noise_must_be_constant():
    F, noise = lorenz_fields(None, active=[1])
    with pytest.raises(ValueError):
        build_hierarchy(F, (F,))


def test_noise_fields_follow_active_gammas():
    params = ModelParams(sigma=1.0, gamma2=0.5)
    assert [g.label for g in noise_fields(params)] == ["G2"]
    values = numeric_values(params)
    assert values[a2] == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(coefficients, coefficients)
def test_bracket_is_antisymmetric(u, w):
    U, W = _field(u), _field(w)
    assert lie_bracket(U, W) == -lie_bracket(W, U)


@settings(max_examples=10, deadline=None)
@given(coefficients, coefficients, coefficients)
def test_jacobi_identity(u, v, w):
    U, V, W = _field(u), _field(v), _field(w)
    total = (
        lie_bracket(U, lie_bracket(V, W))
        + lie_bracket(V, lie_bracket(W, U))
        + lie_bracket(W, lie_bracket(U, V))
    )
    assert total.is_zero()


def test_bracket_matches_commutator_of_flows():
    params = ModelParams(sigma=10.0, rho=28.0, beta=8.0 / 3.0, gamma1=0.5)
    F, (G1,) = lorenz_fields(params)
    values = numeric_values(params)
    point = [1.0, 2.0, 3.0]
    exact = lie_bracket(F, G1).numeric(values)(point)
    approx = commutator_of_flows(F, G1, point, t=1e-4, values=values)
    np.testing.assert_allclose(exact, [10.0, -25.0, -2.0])
    np.testing.assert_allclose(approx, exact, rtol=1e-3, atol=1e-3)


def test_bracket_of_nonlinear_fields_matches_flows():
    U = PolyVectorField.of([Y, -X, 0])
    W = PolyVectorField.of([0, X * X, Z])
    point = [0.5, -0.2, 1.0]
    exact = lie_bracket(U, W).numeric()(point)
    approx = commutator_of_flows(U, W, point, t=1e-3)
    np.testing.assert_allclose(approx, exact, rtol=1e-4, atol=1e-5)
