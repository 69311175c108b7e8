import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from magscat.errors import DomainError
from magscat.fields import (
    ClassicalSymbol,
    HomogeneousOneForm,
    HomogeneousScalar,
    PotentialDifference,
    aradial_project,
    constant_form,
    difference_lead,
    evaluate_oneform,
    linear_combination,
    pair,
    polynomial_form,
    radial,
    radial_defect,
    tangential2d,
)
from magscat.inversion import build_basis
from magscat.sphere import Geodesic, geodesic_point, geodesic_velocity, north_pole


def affine_form(rng, n, degree):
    M, c = rng.standard_normal((n, n)), rng.standard_normal(n)
    return HomogeneousOneForm(n, degree, lambda u: u @ M.T + c)


def test_scaling_law_example():
    B = constant_form([1.0, 0.0, 0.0], degree=-2)
    assert_allclose(evaluate_oneform(B, [2.0, 0.0, 0.0]), [0.25, 0.0, 0.0])


def test_tangential_form_at_north():
    c = 1.7
    assert_allclose(tangential2d(c)([0.0, 1.0]), [-c, 0.0])


@settings(max_examples=50, deadline=None)
@given(
    st.integers(0, 2**31 - 1),
    st.integers(2, 4),
    st.integers(2, 6),
    st.floats(min_value=0.1, max_value=10.0),
)
def test_homogeneity(seed, n, k, t):
    rng = np.random.default_rng(seed)
    B = affine_form(rng, n, -k)
    x = rng.standard_normal(n)
    lhs = evaluate_oneform(B, t * x)
    rhs = t ** (-k) * evaluate_oneform(B, x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_evaluation_at_origin_is_an_error():
    with pytest.raises(DomainError):
        evaluate_oneform(tangential2d(), [0.0, 0.0])
    with pytest.raises(DomainError):
        pair(tangential2d(), [0.0, 0.0], [1.0, 0.0])


def test_scalar_homogeneity():
    q = HomogeneousScalar(3, -2, lambda u: 1.0 + u[:, 0])
    x = np.array([0.3, -1.2, 0.5])
    assert q(3 * x) == pytest.approx(q(x) / 9, rel=1e-12)


def test_projection_removes_radial_form():
    P = aradial_project(radial(3, 2.5))
    u = np.random.default_rng(0).standard_normal((20, 3))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    assert np.max(np.abs(P.on_sphere(u))) <= 1e-12


def test_projection_of_constant_covector():
    phi = np.linspace(0, 2 * np.pi, 13)
    u = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    got = aradial_project(constant_form([1.0, 0.0])).on_sphere(u)
    expected = np.stack([np.sin(phi) ** 2, -np.sin(phi) * np.cos(phi)], axis=-1)
    assert_allclose(got, expected, atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_projection_is_idempotent_and_aradial(n):
    rng = np.random.default_rng(n)
    B = affine_form(rng, n, -3)
    P = aradial_project(B)
    assert P.aradial
    PP = aradial_project(HomogeneousOneForm(n, -3, P.components))
    u = rng.standard_normal((100, n))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    assert np.max(np.abs(np.sum(P.on_sphere(u) * u, axis=-1))) <= 1e-12
    assert np.max(np.abs(PP.on_sphere(u) - P.on_sphere(u))) <= 1e-12
    assert aradial_project(P) is P


def test_aradial_claim_is_checked():
    with pytest.raises(DomainError):
        HomogeneousOneForm(2, -2, lambda u: u, aradial=True)


def test_pairing_with_radial_direction_vanishes():
    B = aradial_project(affine_form(np.random.default_rng(1), 3, -2))
    x = np.array([0.4, -2.0, 1.1])
    assert abs(pair(B, x, x / np.linalg.norm(x))) <= 1e-15
    assert pair(HomogeneousOneForm.zero(3, -2), x, [1.0, 2.0, 3.0]) == 0.0


def test_tangential_pairing_is_constant_along_clockwise_geodesic():
    # oracle: c (-u2, u1) . (cos s, -sin s) with u = (sin s, cos s) is -c (cos^2 + sin^2)
    c = 0.75
    g = Geodesic([0.0, 1.0], [1.0, 0.0])
    s = np.linspace(0.0, np.pi, 101)
    vals = pair(tangential2d(c), geodesic_point(g, s), geodesic_velocity(g, s))
    assert_allclose(vals, -c, atol=1e-15)


def test_pair_is_bilinear():
    rng = np.random.default_rng(2)
    for _ in range(20):
        B1, B2 = affine_form(rng, 3, -2), affine_form(rng, 3, -2)
        a, b = rng.standard_normal(2)
        x, w = rng.standard_normal(3), rng.standard_normal(3)
        lhs = pair(linear_combination([a, b], [B1, B2]), x, w)
        assert abs(lhs - a * pair(B1, x, w) - b * pair(B2, x, w)) <= 1e-12
        assert abs(pair(a * B1 + b * B2, x, w) - lhs) <= 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_aradial_reduction_identity(n):
    # -<B, gamma'> sin s equals the n-th component of B on the geodesic from e_n with tangent e_1
    g = Geodesic(north_pole(n), np.eye(n)[0])
    s = np.linspace(0.0, np.pi, 202)[1:-1]
    p, v = geodesic_point(g, s), geodesic_velocity(g, s)
    rng = np.random.default_rng(n)
    basis = build_basis(n, 3, 3 if n == 2 else 2)
    for _ in range(20):
        B = basis.combine(rng.standard_normal(len(basis)))
        assert np.max(np.abs(-pair(B, p, v) * np.sin(s) - B.on_sphere(p)[:, -1])) <= 1e-10


def vector_potential(n, *terms, order=-2):
    return ClassicalSymbol(order, tuple(terms))


def test_difference_of_identical_potentials_is_none():
    A = vector_potential(2, tangential2d(1.0, -2), HomogeneousOneForm.zero(2, -3))
    assert difference_lead(A, A) is None


def test_difference_picks_first_nonzero_level():
    base = tangential2d(1.0, -2)
    extra = tangential2d(0.3, -3)
    A = vector_potential(2, base, extra)
    A_prime = vector_potential(2, base)
    D = difference_lead(A, A_prime)
    assert D.k == 3
    u = np.array([[0.6, 0.8]])
    assert_allclose(D.lead.on_sphere(u), extra.on_sphere(u))


def test_difference_at_order_five():
    zeros = [HomogeneousOneForm.zero(3, d) for d in (-2, -3, -4)]
    tail = aradial_project(affine_form(np.random.default_rng(5), 3, -5))
    A = vector_potential(3, *zeros, tail)
    A_prime = vector_potential(3, *zeros)
    assert difference_lead(A, A_prime).k == 5


def test_difference_dimension_mismatch():
    with pytest.raises(DomainError):
        difference_lead(vector_potential(2, tangential2d()), vector_potential(3, radial(3)))


def test_symbol_degrees_must_decrease_by_one():
    with pytest.raises(DomainError):
        ClassicalSymbol(-2, (tangential2d(1.0, -2), tangential2d(1.0, -4)))


def test_potential_difference_requires_k_at_least_two():
    with pytest.raises(DomainError):
        PotentialDifference(1, tangential2d(1.0, -1))
    with pytest.raises(DomainError):
        PotentialDifference(3, tangential2d(1.0, -2))


def test_polynomial_form_matches_tangential():
    P = polynomial_form(2, ["-u2", "u1"])
    u = np.array([[0.6, 0.8], [1.0, 0.0]])
    assert_allclose(P.on_sphere(u), tangential2d(1.0).on_sphere(u))
    assert radial_defect(P) <= 1e-15
    with pytest.raises(DomainError):
        polynomial_form(2, ["sin(u1)", "u2"])


def test_rotated_form_transports_covectors():
    rng = np.random.default_rng(7)
    B = affine_form(rng, 3, -2)
    from scipy.stats import special_ortho_group

    R = special_ortho_group.rvs(3, random_state=1)
    u = rng.standard_normal((5, 3))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    expected = np.array([R @ B.on_sphere((R.T @ x)[None])[0] for x in u])
    assert_allclose(B.rotated(R).on_sphere(u), expected, atol=1e-13)
