"""
Weighted geodesic transform of a lead one-form and the antipodal lead term
of the Poisson-operator difference.

    I_k[B](gamma) = int_0^pi <B(gamma(s)), gamma'(s)> sin(s)**(k-1) ds

The lead term of the difference of two Poisson operators along gamma is

    i r^(1-k) / (2 sin(s)^(k-1)) * int_0^s <B(gamma), gamma'> sin^(k-1) ds'

and (pi - s)^(k-1) times it tends to (i r^(1-k) / 2) I_k[B] as s -> pi-.
The absolute normalisation of the scattering-matrix symbol is not fixed
here; only I_k and this coefficient are reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import quadrature
from .errors import DomainError, ExtrapolationError, MagscatError
from .fields import HomogeneousOneForm, PotentialDifference
from .sphere import Geodesic, tangent_fan
from .transport import forcing_wk, solve_step

LADDER = tuple(range(6, 17))
EXTRAPOLATION_TOL = 1e-9


@dataclass(frozen=True)
class RayTransformSample:
    geodesic: Geodesic
    k: int
    value: float


@dataclass(frozen=True, eq=False)
class LeadTermProfile:
    """Complex profile s -> lead term on (0, pi) for one geodesic and radius r."""

    k: int
    r: float
    geodesic: Geodesic
    evaluator: Callable[[np.ndarray], np.ndarray]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s <= 0.0) or np.any(s >= np.pi):
            raise DomainError("lead-term profiles are defined for 0 < s < pi")
        return self.evaluator(s)


def _pairing_integrand(form: HomogeneousOneForm, omegas, tangents, k):
    """Integrand <B(gamma_g(s)), gamma_g'(s)> sin^(k-1) s for G geodesics at once; s has shape (m,)."""
    omegas = np.asarray(omegas, dtype=float)
    tangents = np.asarray(tangents, dtype=float)

    def f(s):
        s = np.asarray(s, dtype=float)
        c = np.cos(s)[..., None, None]
        sn = np.sin(s)[..., None, None]
        pts = c * omegas + sn * tangents  # (..., G, n)
        vel = -sn * omegas + c * tangents
        b = form.on_sphere(pts)
        return np.sum(b * vel, axis=-1) * np.sin(s)[..., None] ** (k - 1)

    return f


def transform_values(form: HomogeneousOneForm, geodesics: Sequence[Geodesic], k: int,
                     panels: int = quadrature.PANELS, pts: int = quadrature.POINTS) -> np.ndarray:
    """I_k of ``form`` on every geodesic, shape (G,)."""
    if k < 2:
        raise DomainError("transform weight order must satisfy k >= 2")
    if not geodesics:
        return np.zeros(0)
    omegas = np.array([g.omega for g in geodesics])
    tangents = np.array([g.tangent for g in geodesics])
    if omegas.shape[1] != form.n:
        raise DomainError("geodesic and one-form dimensions differ")
    rule = quadrature.composite_rule(0.0, float(np.pi), panels, pts)
    vals = _pairing_integrand(form, omegas, tangents, k)(rule.nodes)  # (m, G)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        node, gi = np.argwhere(bad)[0]
        raise quadrature.QuadratureError(float(rule.nodes[node]), vals[node, gi])
    return np.sum(rule.weights[:, None] * vals, axis=0)


def weighted_transform(B: PotentialDifference, g: Geodesic, panels: int = quadrature.PANELS,
                       pts: int = quadrature.POINTS) -> RayTransformSample:
    value = transform_values(B.lead, [g], B.k, panels, pts)[0]
    return RayTransformSample(g, B.k, float(value))


def _check_radius(r):
    if not r > 0:
        raise DomainError("radius must be positive")


def poisson_difference_lead(B: PotentialDifference, r: float, g: Geodesic, grid=None,
                            pts: int = quadrature.POINTS) -> LeadTermProfile:
    """Lambda-free form of the lead term, built from the pairing <B, gamma'>."""
    _check_radius(r)
    k = B.k
    grid = quadrature.default_grid() if grid is None else grid
    f1 = _pairing_integrand(B.lead, [g.omega], [g.tangent], k)
    running = quadrature.cumulative(lambda s: f1(s)[..., 0], grid, pts)
    scale = 0.5j * r ** (1 - k)

    def evaluator(s):
        return scale * running(s) / np.sin(s) ** (k - 1)

    return LeadTermProfile(k, float(r), g, evaluator)


def poisson_difference_lead_forcing(B: PotentialDifference, r: float, g: Geodesic, lam: float,
                                    grid=None, pts: int = quadrature.POINTS) -> LeadTermProfile:
    """
    The same lead term from the difference forcing:
    r^(1-k) a_{k-1}(s, theta) with a_{k-1} solving the transport step for W_{-k}.
    Agrees with ``poisson_difference_lead`` when B is aradial.
    """
    _check_radius(r)
    k = B.k
    a = solve_step(forcing_wk(B, lam, g.omega), lam, grid, pts)
    theta = g.tangent
    factor = r ** (1 - k)
    return LeadTermProfile(k, float(r), g, lambda s: factor * a(s, theta))


def lead_singularity_coefficient(profile: LeadTermProfile, ladder: Sequence[int] = LADDER,
                                 tol: float = EXTRAPOLATION_TOL) -> complex:
    """
    lim_{s -> pi-} (pi - s)^(k-1) profile(s), by Neville-Richardson
    extrapolation in h = pi - s over h = 2^-m.
    """
    k = profile.k
    s = np.pi - np.exp2(-np.asarray(ladder, dtype=float))
    h = np.pi - s  # exact in floating point; matches the s actually evaluated
    g = h ** (k - 1) * np.asarray(profile(s))
    if np.all(g == 0):
        return 0j
    table = [g[0]]
    previous = g[0]
    history = [complex(g[0])]
    for i in range(1, len(g)):
        row = [g[i]]
        for j in range(1, i + 1):
            ratio = h[i - j] / h[i]
            row.append(row[j - 1] + (row[j - 1] - table[j - 1]) / (ratio - 1.0))
        table = row
        estimate = row[-1]
        history.append(complex(estimate))
        if abs(estimate - previous) <= tol * max(1.0, abs(estimate)):
            return complex(estimate)
        previous = estimate
    raise ExtrapolationError("lead singularity extrapolation did not converge", history)


def transform_grid(B: PotentialDifference, omegas, tangents_per_omega: int,
                   panels: int = quadrature.PANELS, pts: int = quadrature.POINTS) -> list[RayTransformSample]:
    """I_k[B] over omega x tangent_fan(omega), omega-major."""
    geodesics = [Geodesic(w, v) for w in omegas for v in tangent_fan(w, tangents_per_omega)]
    try:
        values = transform_values(B.lead, geodesics, B.k, panels, pts)
    except MagscatError:
        # locate the failing sample
        for i, g in enumerate(geodesics):
            try:
                transform_values(B.lead, [g], B.k, panels, pts)
            except MagscatError as exc:
                raise SampleError(i, g, exc) from exc
        raise
    return [RayTransformSample(g, B.k, float(v)) for g, v in zip(geodesics, values)]


class SampleError(MagscatError):
    """A transform sample failed; carries its table index."""

    def __init__(self, index, geodesic, cause):
        super().__init__(f"sample {index} (omega={geodesic.omega.tolist()}, tangent={geodesic.tangent.tolist()}): {cause}")
        self.index = index
        self.geodesic = geodesic
        self.cause = cause
