"""
Transport-equation recursion along the geodesics leaving omega.

With omega at the north pole and theta a unit tangent in omega-perp, every
level is an ODE in the geodesic distance s alone:

    2 i lam [sin(s) d/ds + j cos(s)] a_j + d_{-j-1} = 0.

Its solution regular at s = 0 is

    a_j(s) = i / (2 lam sin(s)**j) * int_0^s sin(s')**(j-1) d(s') ds',

which for j = 1 fed with d = W_{-2} is the first coefficient a_{-1}.
Forcings come from the lead terms of the potentials:

    W_{-2} = -lam sum_j omega_j A_j^(-2) - q_{-2},
    W_{-k} = -lam sum_j omega_j B_j^(-k),

the latter being the change of the level-(k-1) forcing when the vector
potential changes by a symbol B of order -k.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import quadrature
from .errors import DomainError, ResidualError, UndefinedExponentError
from .fields import HomogeneousOneForm, HomogeneousScalar, PotentialDifference
from .sphere import Geodesic, geodesic_point, tangent_fan, unit_vector

FD_STEP = 1e-5
RESIDUAL_TOL = 1e-7
RESIDUAL_WINDOW = (0.05, np.pi - 0.2)


def _theta_key(theta):
    return None if theta is None else tuple(np.asarray(theta, dtype=float).tolist())


@dataclass(frozen=True, eq=False)
class ForcingTerm:
    """
    Forcing d_{-j-1}(s, theta) driving the level-``level`` coefficient.

    ``values(s, theta)`` takes an array of s and a tangent (or ``None`` for
    theta-independent forcings). ``claimed_growth`` is the exponent g with
    d = O((pi - s)**g) at the antipode.
    """

    level: int
    values: Callable
    omega: np.ndarray | None = None
    claimed_growth: int = 0
    label: str = ""

    def __post_init__(self):
        if self.level < 1:
            raise DomainError("forcing level must be >= 1")

    def along(self, theta=None) -> Callable[[np.ndarray], np.ndarray]:
        return lambda s: self.values(np.asarray(s, dtype=float), theta)

    def __call__(self, s, theta=None):
        return self.values(np.asarray(s, dtype=float), theta)

    @classmethod
    def from_function(cls, level: int, f, claimed_growth: int = 0, label: str = "") -> ForcingTerm:
        """theta-independent forcing from a vectorized function of s."""
        return cls(level, lambda s, theta=None: np.broadcast_to(f(s), np.shape(s)), claimed_growth=claimed_growth,
                   label=label)

    @classmethod
    def constant(cls, level: int, c: float) -> ForcingTerm:
        c = float(c)
        return cls.from_function(level, lambda s: np.full(np.shape(s), c), label=f"constant({c!r})")

    def scaled(self, alpha) -> ForcingTerm:
        v = self.values
        return replace(self, values=lambda s, theta=None: alpha * v(s, theta))

    def plus(self, other: ForcingTerm) -> ForcingTerm:
        if other.level != self.level:
            raise DomainError("cannot add forcings of different levels")
        v, w = self.values, other.values
        return replace(self, values=lambda s, theta=None: v(s, theta) + w(s, theta))


@dataclass(frozen=True, eq=False)
class TransportSolution:
    """
    Coefficient a_j(s, theta) of the level-j transport equation.

    Evaluation is defined on [0, pi); at s = 0 the regular limit
    i d(0) / (2 lam j) is returned.
    """

    level: int
    lam: float
    forcing: ForcingTerm
    grid: np.ndarray
    pts: int = quadrature.POINTS
    growth: int = 0
    measured_growth: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.lam <= 0:
            raise DomainError("spectral parameter lambda must be positive")
        if not self.growth:
            object.__setattr__(self, "growth", -self.level)

    def _running(self, theta):
        key = _theta_key(theta)
        with self._lock:
            cached = self._cache.get(key)
            if cached is None:
                j = self.level
                d = self.forcing.along(theta)
                cached = quadrature.cumulative(lambda s: np.sin(s) ** (j - 1) * d(s), self.grid, self.pts)
                self._cache[key] = cached
        return cached

    def __call__(self, s, theta=None) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0) or np.any(s >= np.pi):
            raise DomainError("transport solutions are defined for 0 <= s < pi")
        j = self.level
        F = self._running(theta)(s)
        at_pole = s == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 1j * F / (2.0 * self.lam * np.sin(s) ** j)
        if np.any(at_pole):
            d0 = np.asarray(self.forcing(np.zeros(1), theta))[0]
            out = np.where(at_pole, 1j * d0 / (2.0 * self.lam * j), out)
        return out

    def limit_at_pole(self, theta=None) -> complex:
        d0 = complex(np.asarray(self.forcing(np.zeros(1), theta))[0])
        return 1j * d0 / (2.0 * self.lam * self.level)


@dataclass(frozen=True)
class CascadeConfig:
    lam: float
    max_level: int
    omega: np.ndarray
    theta_grid: tuple
    s_grid: np.ndarray

    def __post_init__(self):
        if self.lam <= 0:
            raise DomainError("lambda must be positive")
        if self.max_level < 1:
            raise DomainError("max_level must be >= 1")
        omega = unit_vector(self.omega)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "theta_grid", tuple(unit_vector(t) for t in self.theta_grid))
        s = np.asarray(self.s_grid, dtype=float)
        if np.any(s <= 0.0) or np.any(s >= np.pi) or np.any(np.diff(s) <= 0.0):
            raise DomainError("s_grid must be increasing inside (0, pi)")
        object.__setattr__(self, "s_grid", s)

    @classmethod
    def default(cls, n: int, lam: float = 1.0, max_level: int = 1, thetas: int = 1, s_points: int = 63):
        omega = np.zeros(n)
        omega[-1] = 1.0
        s = np.pi * np.arange(1, s_points + 1) / (s_points + 1)
        return cls(lam, max_level, omega, tuple(tangent_fan(omega, thetas)), s)


def _along_geodesic(omega, theta, s):
    if theta is None:
        raise DomainError("this forcing depends on theta; pass a tangent direction")
    return geodesic_point(Geodesic(omega, theta), s)


def _check_lambda(lam):
    if not lam > 0:
        raise DomainError("lambda must be positive")


def forcing_w2(A_lead, q_lead: HomogeneousScalar | None, lam: float, omega) -> ForcingTerm:
    """
    Level-1 forcing W_{-2} = -lam sum_j omega_j A_j^(-2) - q_{-2} along gamma_{omega, theta}.

    ``A_lead`` is a degree -2 one-form, or a sequence of n degree -2 scalars
    (one per component).
    """
    _check_lambda(lam)
    omega = unit_vector(omega)
    n = omega.shape[0]
    if isinstance(A_lead, HomogeneousOneForm):
        if A_lead.degree != -2 or A_lead.n != n:
            raise DomainError("A lead term must be a degree -2 one-form in the dimension of omega")
        a_dot = lambda u: A_lead.on_sphere(u) @ omega
    else:
        comps = list(A_lead)
        if len(comps) != n or any(c.degree != -2 or c.n != n for c in comps):
            raise DomainError("A lead components must be n degree -2 scalars")
        a_dot = lambda u: sum(w * c.on_sphere(u) for w, c in zip(omega, comps))
    if q_lead is None:
        q_lead = HomogeneousScalar.zero(n, -2)
    if q_lead.degree != -2 or q_lead.n != n:
        raise DomainError("q lead term must be a degree -2 scalar")

    def values(s, theta=None):
        u = _along_geodesic(omega, theta, s)
        return -lam * a_dot(u) - q_lead.on_sphere(u)

    return ForcingTerm(1, values, omega=omega, label="W_-2")


def forcing_wk(B: PotentialDifference, lam: float, omega) -> ForcingTerm:
    """Level k-1 forcing W_{-k} = -lam sum_j omega_j B_j^(-k) along gamma_{omega, theta}."""
    if not isinstance(B, PotentialDifference):
        raise DomainError("forcing_wk needs a PotentialDifference")
    if B.k < 2:
        raise DomainError("difference order must satisfy k >= 2")
    _check_lambda(lam)
    omega = unit_vector(omega)
    form = B.lead

    def values(s, theta=None):
        u = _along_geodesic(omega, theta, s)
        return -lam * (form.on_sphere(u) @ omega)

    return ForcingTerm(B.k - 1, values, omega=omega, label=f"W_-{B.k}")


def solve_step(d: ForcingTerm, lam: float, grid=None, pts: int = quadrature.POINTS) -> TransportSolution:
    """a_j = i / (2 lam sin^j s) * int_0^s sin^(j-1) d, with j = d.level."""
    _check_lambda(lam)
    grid = quadrature.default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid[0] != 0.0:
        raise DomainError("transport grids must start at s = 0")
    return TransportSolution(d.level, float(lam), d, grid, pts)


def solve_first(W: ForcingTerm, lam: float, grid=None, pts: int = quadrature.POINTS) -> TransportSolution:
    """a_{-1} = i / (2 lam sin s) * int_0^s W_{-2}."""
    if W.level != 1:
        raise DomainError("solve_first needs a level-1 forcing")
    return solve_step(W, lam, grid, pts)


def _derivative(f, s, h):
    # five-point centred stencil
    return (f(s - 2 * h) - 8 * f(s - h) + 8 * f(s + h) - f(s + 2 * h)) / (12 * h)


def residual(a: TransportSolution, d: ForcingTerm, j: int, lam: float, s_grid, theta=None, h: float = FD_STEP) -> float:
    """max over s_grid of |2 i lam (sin s a' + j cos s a) + d|, a' by finite differences."""
    s = np.asarray(s_grid, dtype=float)
    f = lambda t: a(t, theta)
    da = _derivative(f, s, h)
    lhs = 2j * lam * (np.sin(s) * da + j * np.cos(s) * f(s)) + d(s, theta)
    return float(np.max(np.abs(lhs)))


def growth_check(a: TransportSolution, theta=None, window=(np.pi - 1e-2, np.pi - 1e-6), samples: int = 24) -> float:
    """Fitted exponent of |a_j| at the antipode; -j for a non-cancelling forcing."""
    return quadrature.endpoint_exponent(lambda s: a(s, theta), window, samples)


def residual_grid(s_grid) -> np.ndarray:
    s = np.asarray(s_grid, dtype=float)
    lo, hi = RESIDUAL_WINDOW
    return s[(s >= lo) & (s <= hi)]


def cascade(
    config: CascadeConfig,
    forcing_source: Callable[[int, Sequence[TransportSolution]], ForcingTerm],
    tol: float = RESIDUAL_TOL,
) -> list[TransportSolution]:
    """
    Solve levels 1..max_level; ``forcing_source(j, previous)`` supplies d_{-j-1}.

    Each level is residual-checked on the part of ``config.s_grid`` inside
    [0.05, pi - 0.2] for every theta, and its antipodal growth exponent is
    recorded per theta (NaN where the solution vanishes).
    """
    solutions: list[TransportSolution] = []
    check = residual_grid(config.s_grid)
    for j in range(1, config.max_level + 1):
        d = forcing_source(j, tuple(solutions))
        if d.level != j:
            raise DomainError(f"forcing source returned level {d.level} for level {j}")
        a = solve_first(d, config.lam) if j == 1 else solve_step(d, config.lam)
        growth = []
        for theta in config.theta_grid:
            if check.size:
                res = residual(a, d, j, config.lam, check, theta)
                if not res <= tol:
                    raise ResidualError(j, res, tol)
            try:
                growth.append(growth_check(a, theta))
            except UndefinedExponentError:
                growth.append(float("nan"))
        solutions.append(replace(a, measured_growth=tuple(growth), _cache={}, _lock=threading.Lock()))
    return solutions
