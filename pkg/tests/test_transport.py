import numpy as np
import pytest
from numpy.testing import assert_allclose

from magscat.errors import DomainError, ResidualError, UndefinedExponentError
from magscat.fields import (
    HomogeneousOneForm,
    HomogeneousScalar,
    PotentialDifference,
    pair,
    tangential2d,
)
from magscat.sphere import Geodesic, geodesic_point, geodesic_velocity, north_pole
from magscat.transport import (
    CascadeConfig,
    ForcingTerm,
    cascade,
    forcing_w2,
    forcing_wk,
    growth_check,
    residual,
    solve_first,
    solve_step,
)

E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
CHECK = np.linspace(0.05, np.pi - 0.2, 60)


def test_w2_zero_inputs():
    W = forcing_w2([HomogeneousScalar.zero(2, -2)] * 2, None, 1.0, E2)
    assert np.all(W(np.linspace(0, np.pi, 7), E1) == 0)


def test_w2_constant_last_component():
    comps = [HomogeneousScalar.zero(3, -2), HomogeneousScalar.zero(3, -2),
             HomogeneousScalar(3, -2, lambda u: np.ones(u.shape[:-1]))]
    W = forcing_w2(comps, None, 2.5, north_pole(3))
    assert_allclose(W(np.linspace(0, np.pi, 9), np.array([1.0, 0, 0])), -2.5)


def test_w2_linear_component():
    # gamma(s) = (sin s, cos s), so A_2 = u_1 = sin s and W = -sin s
    A = HomogeneousOneForm(2, -2, lambda u: np.stack([np.zeros(u.shape[:-1]), u[..., 0]], axis=-1))
    s = np.linspace(0, np.pi, 33)
    assert_allclose(forcing_w2(A, None, 1.0, E2)(s, E1), -np.sin(s), atol=1e-15)


def test_w2_scalar_potential_enters_with_minus_sign():
    q = HomogeneousScalar(2, -2, lambda u: 3.0 * np.ones(u.shape[:-1]))
    W = forcing_w2(HomogeneousOneForm.zero(2, -2), q, 1.0, E2)
    assert_allclose(W([0.3, 1.2], E1), -3.0)


def test_w2_degree_mismatch():
    with pytest.raises(DomainError):
        forcing_w2(tangential2d(1.0, -3), None, 1.0, E2)
    with pytest.raises(DomainError):
        forcing_w2(tangential2d(1.0, -2), None, 0.0, E2)


def test_wk_tangential():
    c, lam = 1.3, 2.0
    W = forcing_wk(PotentialDifference(3, tangential2d(c, -3)), lam, E2)
    s = np.linspace(0, np.pi, 41)
    # B_2(gamma(s)) = c u_1 = c sin s
    assert_allclose(W(s, E1), -lam * c * np.sin(s), atol=1e-14)
    assert W.level == 2


def test_wk_zero_and_bad_order():
    W = forcing_wk(PotentialDifference(2, HomogeneousOneForm.zero(2, -2)), 1.0, E2)
    assert np.all(W(np.linspace(0, np.pi, 5), E1) == 0)
    with pytest.raises(DomainError):
        forcing_wk(tangential2d(), 1.0, E2)


def test_wk_matches_aradial_pairing():
    from magscat.inversion import build_basis

    rng = np.random.default_rng(4)
    basis = build_basis(3, 4, 2)
    g = Geodesic(north_pole(3), [1.0, 0.0, 0.0])
    s = np.linspace(0, np.pi, 50)
    for lam in (0.5, 3.0):
        B = basis.combine(rng.standard_normal(len(basis)))
        W = forcing_wk(PotentialDifference(4, B), lam, g.omega)(s, g.tangent)
        expected = lam * pair(B, geodesic_point(g, s), geodesic_velocity(g, s)) * np.sin(s)
        assert np.max(np.abs(W - expected)) <= 1e-10


def test_first_level_zero_forcing():
    a = solve_first(ForcingTerm.constant(1, 0.0), 1.0)
    assert np.all(a(np.linspace(0, 3, 7)) == 0)


def test_first_level_constant_forcing():
    c = 0.7
    a = solve_first(ForcingTerm.constant(1, c), 1.0)
    assert abs(a(np.pi / 2) - 1j * c * np.pi / 4) <= 1e-13
    s = np.linspace(0.01, 3.0, 30)
    assert_allclose(a(s), 1j * c * s / (2 * np.sin(s)), rtol=1e-12)
    assert abs(a(1e-8) - 1j * c / 2) <= 1e-8
    assert a(0.0) == pytest.approx(1j * c / 2)
    assert a.limit_at_pole() == pytest.approx(1j * c / 2)


def test_first_level_requires_level_one():
    with pytest.raises(DomainError):
        solve_first(ForcingTerm.constant(2, 1.0), 1.0)


def test_step_second_level_constant():
    a = solve_step(ForcingTerm.constant(2, 1.0), 1.0)
    assert abs(a(np.pi / 2) - 0.5j) <= 1e-13
    s = np.linspace(0.05, 3.0, 25)
    assert_allclose(a(s), 1j * (1 - np.cos(s)) / (2 * np.sin(s) ** 2), rtol=1e-12)


def test_step_zero_forcing():
    a = solve_step(ForcingTerm.constant(3, 0.0), 2.0)
    assert np.all(a(np.linspace(0, 3, 5)) == 0)


def test_step_and_first_agree_at_level_one():
    d = ForcingTerm.from_function(1, lambda s: np.exp(np.cos(s)))
    s = np.linspace(0, 3.0, 40)
    assert_allclose(solve_step(d, 1.7)(s), solve_first(d, 1.7)(s), rtol=0, atol=0)


def test_solution_domain():
    a = solve_step(ForcingTerm.constant(1, 1.0), 1.0)
    with pytest.raises(DomainError):
        a(np.pi)
    with pytest.raises(DomainError):
        solve_step(ForcingTerm.constant(1, 1.0), -1.0)


def test_regular_limit_at_north_pole():
    # |a(s) - a(0)| shrinks as s -> 0 for a smooth forcing
    d = ForcingTerm.from_function(2, lambda s: 1.0 + np.sin(s))
    a = solve_step(d, 1.0)
    gaps = [abs(a(s) - a.limit_at_pole()) for s in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 1e-4


@pytest.mark.parametrize("j", [1, 2, 3, 4])
@pytest.mark.parametrize("f", [lambda s: np.ones_like(s), np.sin, lambda s: np.exp(np.cos(2 * s))])
def test_residual_of_exact_solutions(j, f):
    lam = 1.5
    d = ForcingTerm.from_function(j, f)
    a = solve_step(d, lam)
    assert residual(a, d, j, lam, np.linspace(0.1, 3.0, 80)) <= 1e-7


def test_residual_of_perturbed_solution():
    j, lam = 2, 1.0
    d = ForcingTerm.constant(j, 1.0)
    a = solve_step(d, lam)
    s = np.array([0.5, 1.0, 2.5])
    bump = lambda t: a(t) + 0.01
    h = 1e-5
    da = (bump(s - 2 * h) - 8 * bump(s - h) + 8 * bump(s + h) - bump(s + 2 * h)) / (12 * h)
    res = np.abs(2j * lam * (np.sin(s) * da + j * np.cos(s) * bump(s)) + d(s))
    assert np.all(res >= 0.01 * 2 * lam * j * np.abs(np.cos(s)) * (1 - 1e-6))


def test_residual_of_zero_solution():
    d = ForcingTerm.from_function(1, lambda s: 2 + np.sin(s))
    zero = solve_step(ForcingTerm.from_function(1, lambda s: 0 * s), 1.0)
    s = np.linspace(0.1, 3.0, 50)
    assert residual(zero, d, 1, 1.0, s) == pytest.approx(np.max(2 + np.sin(s)))


@pytest.mark.parametrize("j", [1, 2, 3])
def test_growth_of_constant_forcing(j):
    a = solve_step(ForcingTerm.constant(j, 1.0), 1.0)
    assert abs(growth_check(a) + j) <= 0.05


def test_growth_with_cancelling_forcing():
    # int_0^pi cos s ds = 0, so a_1 stays bounded at the antipode
    a = solve_step(ForcingTerm.from_function(1, np.cos), 1.0)
    assert growth_check(a) > -1 + 0.5


def test_growth_of_zero_solution_is_undefined():
    with pytest.raises(UndefinedExponentError):
        growth_check(solve_step(ForcingTerm.constant(2, 0.0), 1.0))


def test_linearity_in_forcing():
    d1 = ForcingTerm.from_function(2, np.cos)
    d2 = ForcingTerm.from_function(2, lambda s: s**2)
    s = np.linspace(0, 3.0, 31)
    lhs = solve_step(d1.scaled(2.0).plus(d2.scaled(-0.5)), 1.0)(s)
    rhs = 2.0 * solve_step(d1, 1.0)(s) - 0.5 * solve_step(d2, 1.0)(s)
    assert np.max(np.abs(lhs - rhs)) <= 1e-13


def test_cascade_singleton_matches_first_level():
    A = tangential2d(1.0, -2)
    cfg = CascadeConfig.default(2, lam=1.0, max_level=1)
    sols = cascade(cfg, lambda j, prev: forcing_w2(A, None, 1.0, cfg.omega))
    assert len(sols) == 1
    direct = solve_first(forcing_w2(A, None, 1.0, cfg.omega), 1.0)
    theta = cfg.theta_grid[0]
    assert_allclose(sols[0](cfg.s_grid, theta), direct(cfg.s_grid, theta), rtol=0, atol=0)


def test_cascade_zero_forcings():
    cfg = CascadeConfig.default(3, max_level=3, thetas=2)
    sols = cascade(cfg, lambda j, prev: ForcingTerm.constant(j, 0.0))
    assert [a.level for a in sols] == [1, 2, 3]
    for a in sols:
        assert np.all(a(cfg.s_grid, cfg.theta_grid[1]) == 0)
        assert all(np.isnan(g) for g in a.measured_growth)


def test_cascade_growth_exponents():
    cfg = CascadeConfig.default(2, max_level=3)
    sols = cascade(cfg, lambda j, prev: ForcingTerm.constant(j, 1.0))
    for a in sols:
        assert abs(a.measured_growth[0] + a.level) <= 0.1


def test_cascade_rejects_wrong_level_and_bad_residual():
    cfg = CascadeConfig.default(2, max_level=2)
    with pytest.raises(DomainError):
        cascade(cfg, lambda j, prev: ForcingTerm.constant(1, 1.0))
    # a tolerance no computation can meet reports the failing level
    with pytest.raises(ResidualError) as info:
        cascade(cfg, lambda j, prev: ForcingTerm.constant(j, 1.0), tol=1e-30)
    assert info.value.level == 1


def test_cascade_config_validation():
    with pytest.raises(DomainError):
        CascadeConfig(0.0, 1, E2, (E1,), CHECK)
    with pytest.raises(DomainError):
        CascadeConfig(1.0, 0, E2, (E1,), CHECK)
    with pytest.raises(DomainError):
        CascadeConfig(1.0, 1, E2, (E1,), np.array([0.0, 1.0]))
