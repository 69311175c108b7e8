"""
Least-squares recovery of an aradial lead one-form from samples of its
weighted geodesic transform.

Hypothesis classes:

* n = 2: t(u) cos(m phi), t(u) sin(m phi) with t(u) = (-u2, u1),
  m = 0..max_degree (the m = 0 sine is omitted).
* n = 3: surface gradients ``grad`` and their rotations ``rot = u x grad``
  of real spherical harmonics of degree 1..max_degree.

Both families are tangent to the sphere, hence aradial.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, pi, sqrt
from typing import Sequence

import numpy as np

from . import quadrature
from .errors import DomainError, MagscatError, RankDeficientError, UnsupportedDimensionError
from .fields import HomogeneousOneForm, PotentialDifference, linear_combination, sphere_samples
from .raytransform import transform_values
from .sphere import Geodesic, circle_points, fibonacci_sphere, tangent_fan

RANK_FLOOR = 1e-13
GRAM_FLOOR = 1e-8


# -- bases -------------------------------------------------------------------


def fourier_form(m: int, branch: str, degree: int = -2) -> HomogeneousOneForm:
    """t(u) * cos(m phi) or t(u) * sin(m phi) on the plane, phi = atan2(u2, u1)."""
    if branch not in ("cos", "sin"):
        raise DomainError(f"unknown Fourier branch {branch!r}")
    trig = np.cos if branch == "cos" else np.sin

    def components(u):
        phi = np.arctan2(u[:, 1], u[:, 0])
        w = trig(m * phi)
        return np.stack([-u[:, 1] * w, u[:, 0] * w], axis=-1)

    return HomogeneousOneForm(2, degree, components, aradial=True, label=f"t*{branch}({m}phi)")


@lru_cache(maxsize=None)
def _harmonic_gradient(l: int, m: int):
    """Lambdified gradient of the real solid harmonic of degree l, order m (orthonormal on S^2)."""
    import sympy

    x, y, z, t = sympy.symbols("x y z t", real=True)
    am = abs(m)
    if am > l:
        raise DomainError(f"harmonic order |m| = {am} exceeds degree l = {l}")
    r2 = x**2 + y**2 + z**2
    dP = sympy.Poly(sympy.diff(sympy.legendre(l, t), t, am), t)
    # r^(l-m) * P_l^(m)(z/r) as a polynomial: only powers with l - m - i even occur
    radial = sum(c * z**i * r2 ** ((l - am - i) // 2) for (i,), c in dP.terms())
    azimuthal = sympy.expand((x + sympy.I * y) ** am)
    azimuthal = sympy.re(azimuthal) if m >= 0 else sympy.im(azimuthal)
    norm = sqrt((2 * l + 1) / (4 * pi) * factorial(l - am) / factorial(l + am))
    if m != 0:
        norm *= sqrt(2.0)
    poly = sympy.expand(norm * radial * azimuthal)
    grads = [sympy.diff(poly, v) for v in (x, y, z)]
    return sympy.lambdify((x, y, z), grads, "numpy")


def harmonic_form(l: int, m: int, variant: str, degree: int = -2) -> HomogeneousOneForm:
    """Tangential field on S^2 from the real harmonic Y_lm: its surface gradient or u x gradient."""
    if l < 1:
        raise DomainError("harmonic degree must be >= 1 (degree 0 has no tangential part)")
    if variant not in ("grad", "rot"):
        raise DomainError(f"unknown harmonic variant {variant!r}")
    grad = _harmonic_gradient(l, m)

    def components(u):
        cols = grad(u[:, 0], u[:, 1], u[:, 2])
        g = np.stack([np.broadcast_to(np.asarray(c, dtype=float), (u.shape[0],)) for c in cols], axis=-1)
        if variant == "rot":
            return np.cross(u, g)
        return g - np.sum(g * u, axis=-1, keepdims=True) * u

    return HomogeneousOneForm(3, degree, components, aradial=True, label=f"{variant} Y({l},{m})")


@dataclass(frozen=True)
class AradialBasis:
    n: int
    k: int
    elements: tuple
    labels: tuple

    def __len__(self):
        return len(self.elements)

    def combine(self, coefficients) -> HomogeneousOneForm:
        return linear_combination(coefficients, self.elements)

    def gram_min_eigenvalue(self, samples: int = 400) -> float:
        u = sphere_samples(self.n, samples)
        X = np.stack([e.on_sphere(u).ravel() for e in self.elements], axis=-1) / np.sqrt(samples)
        return float(np.linalg.eigvalsh(X.T @ X)[0])


def build_basis(n: int, k: int, max_degree: int) -> AradialBasis:
    """Aradial basis of degree -k one-forms; see module docstring for the families."""
    if n not in (2, 3):
        raise UnsupportedDimensionError(f"inversion bases exist for n = 2, 3 only, not n = {n}")
    if k < 2:
        raise DomainError("k must be >= 2")
    if max_degree < 0:
        raise DomainError("max_degree must be >= 0")
    elements = []
    if n == 2:
        elements.append(fourier_form(0, "cos", -k))
        for m in range(1, max_degree + 1):
            elements.append(fourier_form(m, "cos", -k))
            elements.append(fourier_form(m, "sin", -k))
    else:
        for l in range(1, max_degree + 1):
            for variant in ("grad", "rot"):
                for m in range(-l, l + 1):
                    elements.append(harmonic_form(l, m, variant, -k))
    if not elements:
        raise DomainError(f"no basis elements for n = {n}, max_degree = {max_degree}")
    basis = AradialBasis(n, k, tuple(elements), tuple(e.label for e in elements))
    if basis.gram_min_eigenvalue() <= GRAM_FLOOR:
        raise DomainError("basis elements are numerically dependent")
    return basis


def sample_geodesics(n: int, count: int, tangents_per_omega: int | None = None) -> list[Geodesic]:
    """
    ``count`` well-spread geodesics with no reversed duplicates.

    n = 2 uses uniform start angles with the clockwise tangent; n = 3 uses a
    Fibonacci lattice of starts with ``tangents_per_omega`` (default 4)
    uniform tangents each.
    """
    if n == 2:
        return [Geodesic(w, v) for w in circle_points(count) for v in tangent_fan(w, 1)]
    if n == 3:
        per = tangents_per_omega or 4
        n_omega = -(-count // per)
        out = [Geodesic(w, v) for w in fibonacci_sphere(n_omega) for v in tangent_fan(w, per)]
        return out[:count]
    raise UnsupportedDimensionError(f"geodesic sampler supports n = 2, 3, not n = {n}")


# -- design matrix and solver ------------------------------------------------


@dataclass(frozen=True)
class DesignMatrix:
    rows: tuple
    columns: tuple
    entries: np.ndarray


class AssemblyError(MagscatError):
    def __init__(self, i, j, cause):
        super().__init__(f"design matrix entry ({i}, {j}) failed: {cause}")
        self.row = i
        self.column = j


def assemble(basis: AradialBasis, geodesics: Sequence[Geodesic], panels: int = quadrature.PANELS,
             pts: int = quadrature.POINTS) -> DesignMatrix:
    """M[i, j] = I_k[element j](geodesic i)."""
    if len(basis) == 0:
        raise DomainError("empty basis")
    geodesics = tuple(geodesics)
    cols = []
    for j, e in enumerate(basis.elements):
        try:
            cols.append(transform_values(e, geodesics, basis.k, panels, pts))
        except MagscatError as exc:
            for i, g in enumerate(geodesics):
                try:
                    transform_values(e, [g], basis.k, panels, pts)
                except MagscatError as inner:
                    raise AssemblyError(i, j, inner) from inner
            raise
    entries = np.stack(cols, axis=-1) if geodesics else np.zeros((0, len(basis)))
    entries.setflags(write=False)
    return DesignMatrix(geodesics, basis.labels, entries)


@dataclass(frozen=True)
class ReconstructionResult:
    coefficients: np.ndarray
    residual_norm: float
    singular_values: np.ndarray
    condition: float
    rank: int


def solve(M: DesignMatrix, data, ridge: float = 0.0) -> ReconstructionResult:
    """
    Minimise |M c - data|^2 + ridge |c|^2 by SVD.

    Singular values below max(shape) * eps * s_max are treated as zero
    (minimum-norm solution in those directions).
    """
    A = np.asarray(M.entries, dtype=float)
    b = np.asarray(data, dtype=float)
    if b.shape != (A.shape[0],):
        raise DomainError(f"data has length {b.size}, design matrix has {A.shape[0]} rows")
    if ridge < 0:
        raise DomainError("ridge must be non-negative")
    U, sv, Vt = np.linalg.svd(A, full_matrices=False)
    if sv.size == 0 or np.all(sv < RANK_FLOOR):
        raise RankDeficientError("all singular values are below 1e-13")
    cutoff = max(A.shape) * np.finfo(float).eps * sv[0]
    keep = sv > cutoff
    beta = U.T @ b
    filt = np.zeros_like(sv)
    filt[keep] = sv[keep] / (sv[keep] ** 2 + ridge)
    c = Vt.T @ (filt * beta)
    res = float(np.linalg.norm(A @ c - b))
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    return ReconstructionResult(c, res, sv, cond, int(np.count_nonzero(keep)))


@dataclass(frozen=True)
class ReconstructionReport:
    coefficient_error: float | None
    field_error: float
    data_norm: float


def field_sup_error(basis: AradialBasis, coefficients, truth: HomogeneousOneForm, samples: int = 500) -> float:
    """sup over sphere samples of |sum_j c_j e_j(u) - truth(u)|."""
    u = sphere_samples(basis.n, samples)
    recon = basis.combine(coefficients).on_sphere(u)
    return float(np.max(np.linalg.norm(recon - truth.on_sphere(u), axis=-1)))


def reconstruct(B_true: PotentialDifference, basis: AradialBasis, geodesics: Sequence[Geodesic],
                noise: float = 0.0, true_coefficients=None, ridge: float = 0.0, seed: int = 0,
                panels: int = quadrature.PANELS, pts: int = quadrature.POINTS):
    """
    Forward-then-invert round trip: transform data of ``B_true`` (plus
    uniform noise of amplitude ``noise``), assembled design matrix, solve.
    Returns ``(result, report)``.
    """
    if B_true.k != basis.k or B_true.n != basis.n:
        raise DomainError("truth and basis disagree on n or k")
    geodesics = list(geodesics() if callable(geodesics) else geodesics)
    data = transform_values(B_true.lead, geodesics, B_true.k, panels, pts)
    if noise:
        data = data + noise * np.random.default_rng(seed).uniform(-1.0, 1.0, data.shape)
    M = assemble(basis, geodesics, panels, pts)
    result = solve(M, data, ridge)
    coef_err = None
    if true_coefficients is not None:
        c0 = np.asarray(true_coefficients, dtype=float)
        coef_err = float(np.linalg.norm(result.coefficients - c0) / max(np.linalg.norm(c0), np.finfo(float).tiny))
    report = ReconstructionReport(coef_err, field_sup_error(basis, result.coefficients, B_true.lead),
                                  float(np.linalg.norm(data)))
    return result, report
