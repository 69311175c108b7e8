import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import special_ortho_group

from magscat.errors import DomainError, ExtrapolationError, QuadratureError
from magscat.fields import (
    HomogeneousOneForm,
    PotentialDifference,
    aradial_project,
    pair,
    radial,
    tangential2d,
)
from magscat.inversion import build_basis
from magscat.raytransform import (
    LeadTermProfile,
    SampleError,
    lead_singularity_coefficient,
    poisson_difference_lead,
    poisson_difference_lead_forcing,
    transform_grid,
    transform_values,
    weighted_transform,
)
from magscat.sphere import Geodesic, Rotation, geodesic_point, geodesic_velocity, sample_directions


def random_geodesic(rng, n):
    w = rng.standard_normal(n)
    w /= np.linalg.norm(w)
    v = rng.standard_normal(n)
    v -= v @ w * w
    return Geodesic(w, v / np.linalg.norm(v))


def random_form(rng, n, k):
    M, c = rng.standard_normal((n, n)), rng.standard_normal(n)
    return HomogeneousOneForm(n, -k, lambda u: u @ M.T + c + np.sin(u[..., :1]))


def random_aradial(rng, n, k):
    basis = build_basis(n, k, 3 if n == 2 else 2)
    return basis.combine(rng.standard_normal(len(basis)))


@pytest.mark.parametrize("c", [1.0, -0.4, 2.5])
def test_tangential_closed_forms(c):
    rng = np.random.default_rng(0)
    for _ in range(5):
        g = random_geodesic(rng, 2)
        # the planar default tangent is clockwise; the other orientation flips the sign
        sign = 1.0 if np.isclose(g.tangent @ np.array([g.omega[1], -g.omega[0]]), 1.0) else -1.0
        assert abs(weighted_transform(PotentialDifference(2, tangential2d(c, -2)), g).value + sign * 2 * c) <= 1e-12
        assert abs(weighted_transform(PotentialDifference(3, tangential2d(c, -3)), g).value
                   + sign * c * np.pi / 2) <= 1e-12


def test_against_adaptive_quadrature():
    rng = np.random.default_rng(1)
    for n, k in [(2, 2), (3, 3), (4, 5)]:
        B, g = random_form(rng, n, k), random_geodesic(rng, n)
        f = lambda s: pair(B, geodesic_point(g, s), geodesic_velocity(g, s)) * np.sin(s) ** (k - 1)
        ref, _ = quad(f, 0, np.pi, epsabs=1e-14, epsrel=1e-14)
        assert abs(weighted_transform(PotentialDifference(k, B), g).value - ref) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_radial_annihilation(n):
    rng = np.random.default_rng(n)
    B = PotentialDifference(3, radial(n, 1.7, -3))
    vals = transform_values(B.lead, [random_geodesic(rng, n) for _ in range(50)], 3)
    assert np.max(np.abs(vals)) <= 1e-12


def test_linearity():
    rng = np.random.default_rng(2)
    for _ in range(10):
        B1, B2 = random_form(rng, 3, 4), random_form(rng, 3, 4)
        a, b = rng.standard_normal(2)
        g = [random_geodesic(rng, 3) for _ in range(5)]
        lhs = transform_values(a * B1 + b * B2, g, 4)
        rhs = a * transform_values(B1, g, 4) + b * transform_values(B2, g, 4)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 5])
def test_rotational_equivariance(n):
    rng = np.random.default_rng(10 + n)
    for i in range(20):
        R = Rotation(special_ortho_group.rvs(n, random_state=100 * n + i))
        B, g = random_form(rng, n, 3), random_geodesic(rng, n)
        moved = Geodesic(R.inverse().apply(g.omega), R.inverse().apply(g.tangent))
        lhs = transform_values(B.rotated(R.matrix), [g], 3)[0]
        rhs = transform_values(B, [moved], 3)[0]
        assert abs(lhs - rhs) <= 1e-10


@pytest.mark.parametrize("k", [2, 3, 6])
def test_reversal_antisymmetry(k):
    rng = np.random.default_rng(k)
    for _ in range(20):
        B, g = random_form(rng, 3, k), random_geodesic(rng, 3)
        assert abs(transform_values(B, [g.reversed()], k)[0] + transform_values(B, [g], k)[0]) <= 1e-12


def test_invalid_order_and_dimension():
    g = Geodesic([0.0, 1.0], [1.0, 0.0])
    with pytest.raises(DomainError):
        transform_values(tangential2d(), [g], 1)
    with pytest.raises(DomainError):
        transform_values(radial(3), [g], 2)


def nan_near_north(u):
    # non-finite wherever u_2 > 0.99, i.e. near the start of any geodesic from e_2
    return np.stack([np.where(u[..., 1] > 0.99, np.nan, 1.0), u[..., 0]], axis=-1)


def test_non_finite_integrand_reports_node():
    bad = HomogeneousOneForm(2, -2, nan_near_north)
    with pytest.raises(QuadratureError) as info:
        transform_values(bad, [Geodesic([1.0, 0.0], [0.0, -1.0]), Geodesic([0.0, 1.0], [1.0, 0.0])], 2)
    assert 0 < info.value.node < np.arccos(0.99)


def test_zero_profile():
    g = Geodesic([0.0, 1.0], [1.0, 0.0])
    prof = poisson_difference_lead(PotentialDifference(3, HomogeneousOneForm.zero(2, -3)), 1.0, g)
    assert np.all(prof(np.linspace(0.1, 3.0, 9)) == 0)
    assert lead_singularity_coefficient(prof) == 0


def test_tangential_profile():
    g = Geodesic([0.0, 1.0], [1.0, 0.0])
    c = 1.5
    prof = poisson_difference_lead(PotentialDifference(2, tangential2d(c, -2)), 1.0, g)
    s = np.linspace(0.1, 3.0, 20)
    expected = 1j / (2 * np.sin(s)) * (-c) * (1 - np.cos(s))
    assert np.max(np.abs(prof(s) - expected)) <= 1e-13
    assert abs(prof(np.pi / 2) + 0.5j * c) <= 1e-13
    assert abs(lead_singularity_coefficient(prof) + 1j * c) <= 1e-8
    with pytest.raises(DomainError):
        prof(0.0)
    with pytest.raises(DomainError):
        poisson_difference_lead(PotentialDifference(2, tangential2d()), 0.0, g)


@pytest.mark.parametrize("n, k", [(2, 2), (2, 3), (3, 3), (3, 4)])
def test_limit_identity(n, k):
    rng = np.random.default_rng(20 + n + k)
    for _ in range(5):
        B, g = PotentialDifference(k, random_aradial(rng, n, k)), random_geodesic(rng, n)
        r = rng.uniform(0.5, 2.0)
        coef = lead_singularity_coefficient(poisson_difference_lead(B, r, g))
        expected = 0.5j * r ** (1 - k) * weighted_transform(B, g).value
        assert abs(coef - expected) <= 1e-8 * abs(expected)


@pytest.mark.parametrize("lam", [0.5, 1.0, 7.0])
def test_lambda_cancellation(lam):
    rng = np.random.default_rng(3)
    s = np.linspace(0.05, np.pi - 0.05, 40)
    for n, k in [(2, 2), (3, 3), (3, 4)]:
        B, g = PotentialDifference(k, random_aradial(rng, n, k)), random_geodesic(rng, n)
        a = poisson_difference_lead(B, 1.3, g)(s)
        b = poisson_difference_lead_forcing(B, 1.3, g, lam)(s)
        assert np.max(np.abs(a - b)) <= 1e-10


def test_forcing_form_requires_aradial_lead():
    # for a non-aradial lead the two forms differ; the agreement is a property of aradial fields
    g = Geodesic([0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
    B = PotentialDifference(3, random_form(np.random.default_rng(5), 3, 3))
    s = np.linspace(0.2, 2.8, 10)
    gap = np.max(np.abs(poisson_difference_lead(B, 1.0, g)(s) - poisson_difference_lead_forcing(B, 1.0, g, 1.0)(s)))
    assert gap > 1e-6
    P = PotentialDifference(3, aradial_project(B.lead))
    assert np.max(np.abs(poisson_difference_lead(P, 1.0, g)(s) - poisson_difference_lead_forcing(P, 1.0, g, 1.0)(s))) <= 1e-10


def test_extrapolation_failure_reports_history():
    g = Geodesic([0.0, 1.0], [1.0, 0.0])
    wild = LeadTermProfile(2, 1.0, g, lambda s: np.sin(1.0 / (np.pi - s)) / (np.pi - s))
    with pytest.raises(ExtrapolationError) as info:
        lead_singularity_coefficient(wild)
    assert len(info.value.ladder) > 1


def test_transform_grid_layout():
    omegas = sample_directions(3, 6)
    B = PotentialDifference(3, HomogeneousOneForm.zero(3, -3))
    table = transform_grid(B, omegas, 4)
    assert len(table) == 24
    assert all(smp.value == 0 for smp in table)
    for i, smp in enumerate(table):
        assert np.array_equal(smp.geodesic.omega, omegas[i // 4])


def test_transform_grid_equivariance_spot_checks():
    rng = np.random.default_rng(8)
    B = PotentialDifference(3, random_aradial(rng, 3, 3))
    R = Rotation(special_ortho_group.rvs(3, random_state=4))
    table = transform_grid(B, sample_directions(3, 5), 3)
    rotated = PotentialDifference(3, B.lead.rotated(R.matrix))
    for smp in table[::4]:
        g = smp.geodesic
        moved = Geodesic(R.apply(g.omega), R.apply(g.tangent))
        assert abs(weighted_transform(rotated, moved).value - smp.value) <= 1e-10


def test_transform_grid_reports_failing_sample():
    bad = PotentialDifference(2, HomogeneousOneForm(2, -2, nan_near_north))
    with pytest.raises(SampleError) as info:
        transform_grid(bad, [np.array([1.0, 0.0]), np.array([0.0, 1.0])], 1)
    assert info.value.index == 1
    assert isinstance(info.value.cause, QuadratureError)
