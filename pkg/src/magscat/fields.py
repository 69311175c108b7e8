"""
Homogeneous one-forms and scalars, classical symbol expansions, and the
difference of two vector potentials.

A homogeneous term of degree ``d`` is stored by its restriction to the unit
sphere. Evaluation at ``x != 0`` uses ``F(x) = |x|**d * F(x/|x|)``. Component
maps take an (m, n) array of unit vectors and return (m, n) covector
components (one-forms) or (m,) values (scalars).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

ARADIAL_TOL = 1e-10
ARADIAL_SAMPLES = 100


def sphere_samples(n: int, count: int = ARADIAL_SAMPLES) -> np.ndarray:
    """Deterministic quasi-random unit vectors, shape (count, n)."""
    from .sphere import halton_sphere

    return np.array(halton_sphere(n, count))


def _split(x):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise DomainError("homogeneous terms of negative degree are singular at x = 0")
    return x, r


def _call_rows(func, u, width):
    """Evaluate a component map on u of shape (..., n), flattening leading axes."""
    u = np.asarray(u, dtype=float)
    lead = u.shape[:-1]
    flat = u.reshape(-1, u.shape[-1])
    out = np.asarray(func(flat), dtype=float)
    if width is None:
        return np.broadcast_to(out, (flat.shape[0],)).reshape(lead)
    return np.broadcast_to(out, (flat.shape[0], width)).reshape(lead + (width,))


@dataclass(frozen=True, eq=False)
class HomogeneousOneForm:
    """
    One-form sum_j B_j(x) dx_j on R^n minus the origin, homogeneous of degree ``degree``.

    ``aradial=True`` asserts that the covector is orthogonal to x; the claim
    is verified on 100 quasi-random sphere points at construction.
    """

    n: int
    degree: int
    components: Callable[[np.ndarray], np.ndarray]
    aradial: bool = False
    label: str = ""
    is_zero: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("dimension must be >= 2")
        if self.aradial and not self.is_zero:
            err = radial_defect(self)
            if err > ARADIAL_TOL:
                raise DomainError(f"one-form {self.label!r} is not aradial: radial pairing {err:.3e}")

    @classmethod
    def zero(cls, n: int, degree: int) -> HomogeneousOneForm:
        return cls(n, degree, lambda u: np.zeros_like(u), aradial=True, label="0", is_zero=True)

    def on_sphere(self, u) -> np.ndarray:
        """Components at unit vectors ``u`` (no homogeneity rescaling)."""
        return _call_rows(self.components, u, self.n)

    def __call__(self, x) -> np.ndarray:
        return evaluate_oneform(self, x)

    def _combine(self, other, a, b):
        if not isinstance(other, HomogeneousOneForm):
            return NotImplemented
        if other.n != self.n or other.degree != self.degree:
            raise DomainError("cannot combine one-forms of different dimension or degree")
        f, g = self.components, other.components
        return HomogeneousOneForm(
            self.n,
            self.degree,
            lambda u: a * np.asarray(f(u)) + b * np.asarray(g(u)),
            aradial=self.aradial and other.aradial,
            is_zero=self.is_zero and other.is_zero,
        )

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, c):
        c = float(c)
        f = self.components
        return HomogeneousOneForm(
            self.n, self.degree, lambda u: c * np.asarray(f(u)), aradial=self.aradial, label=self.label,
            is_zero=self.is_zero,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def with_degree(self, degree: int) -> HomogeneousOneForm:
        """Same sphere restriction, different homogeneity degree."""
        return HomogeneousOneForm(self.n, degree, self.components, self.aradial, self.label, self.is_zero)

    def rotated(self, rotation) -> HomogeneousOneForm:
        """Push forward by a rotation R: x -> R B(R^T x)."""
        m = np.asarray(getattr(rotation, "matrix", rotation), dtype=float)
        f = self.components
        return HomogeneousOneForm(
            self.n, self.degree, lambda u: np.asarray(f(u @ m)) @ m.T, aradial=self.aradial,
            label=self.label, is_zero=self.is_zero,
        )


@dataclass(frozen=True, eq=False)
class HomogeneousScalar:
    """Scalar function on R^n minus the origin, homogeneous of degree ``degree``."""

    n: int
    degree: int
    value: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    is_zero: bool = False

    @classmethod
    def zero(cls, n: int, degree: int) -> HomogeneousScalar:
        return cls(n, degree, lambda u: np.zeros(u.shape[0]), label="0", is_zero=True)

    def on_sphere(self, u) -> np.ndarray:
        return _call_rows(self.value, u, None)

    def __call__(self, x) -> np.ndarray:
        x, r = _split(x)
        return r**self.degree * self.on_sphere(x / r[..., None])


@dataclass(frozen=True)
class ClassicalSymbol:
    """
    Expansion sum_i terms[i] with degrees order, order - 1, ... .

    Missing orders are explicit zero terms. Terms are either all
    ``HomogeneousOneForm`` (a vector potential) or all ``HomogeneousScalar``.
    """

    order: int
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise DomainError("a classical symbol needs at least one term")
        for i, t in enumerate(terms):
            if t.degree != self.order - i:
                raise DomainError(
                    f"term {i} has degree {t.degree}, expected {self.order - i} (degrees must decrease by 1)"
                )
        if len({t.n for t in terms}) != 1:
            raise DomainError("terms of a classical symbol must share the dimension n")
        object.__setattr__(self, "terms", terms)

    @property
    def n(self) -> int:
        return self.terms[0].n

    def term(self, degree: int):
        """The homogeneous term of the given degree (zero outside the stored range)."""
        i = self.order - degree
        if 0 <= i < len(self.terms):
            return self.terms[i]
        t0 = self.terms[0]
        if isinstance(t0, HomogeneousOneForm):
            return HomogeneousOneForm.zero(self.n, degree)
        return HomogeneousScalar.zero(self.n, degree)


@dataclass(frozen=True)
class PotentialDifference:
    """Lead term B^(-k) of a difference of vector potentials of order -k, k >= 2."""

    k: int
    lead: HomogeneousOneForm

    def __post_init__(self):
        if self.k < 2:
            raise DomainError(f"difference order k = {self.k} violates the hypothesis k >= 2")
        if self.lead.degree != -self.k:
            raise DomainError(f"lead term has degree {self.lead.degree}, expected {-self.k}")

    @property
    def n(self) -> int:
        return self.lead.n

    @classmethod
    def of(cls, form: HomogeneousOneForm, k: int) -> PotentialDifference:
        """Wrap a sphere one-form as a degree -k lead term."""
        return cls(k, form.with_degree(-k))


def evaluate_oneform(B: HomogeneousOneForm, x) -> np.ndarray:
    x, r = _split(x)
    return (r**B.degree)[..., None] * B.on_sphere(x / r[..., None])


def radial_defect(B: HomogeneousOneForm, samples: int = ARADIAL_SAMPLES) -> float:
    """max |<B(u), u>| over quasi-random unit vectors u."""
    u = sphere_samples(B.n, samples)
    return float(np.max(np.abs(np.sum(B.on_sphere(u) * u, axis=-1))))


def aradial_project(B: HomogeneousOneForm) -> HomogeneousOneForm:
    """Remove the radial part: B(u) - <B(u), u> u."""
    if B.aradial:
        return B
    f = B.components

    def projected(u):
        b = np.asarray(f(u), dtype=float)
        b = np.broadcast_to(b, u.shape)
        return b - np.sum(b * u, axis=-1, keepdims=True) * u

    return HomogeneousOneForm(B.n, B.degree, projected, aradial=True, label=B.label, is_zero=B.is_zero)


def pair(B: HomogeneousOneForm, x, w) -> np.ndarray:
    """<B(x), w>; broadcasts over leading axes of ``x`` and ``w``."""
    return np.sum(evaluate_oneform(B, x) * np.asarray(w, dtype=float), axis=-1)


def _is_zero_term(t, tol=1e-14) -> bool:
    if t.is_zero:
        return True
    u = sphere_samples(t.n)
    vals = t.on_sphere(u)
    return bool(np.max(np.abs(vals)) <= tol)


def difference_lead(A: ClassicalSymbol, A_prime: ClassicalSymbol) -> PotentialDifference | None:
    """
    First non-vanishing homogeneous level of ``A - A_prime``.

    Both arguments are one-form valued symbols of order <= -2. Returns
    ``None`` when the two expansions agree at every stored order.
    """
    if A.n != A_prime.n:
        raise DomainError(f"potentials live in different dimensions ({A.n} vs {A_prime.n})")
    for s in (A, A_prime):
        if s.order > -2:
            raise DomainError(f"vector potentials must have order <= -2, got {s.order}")
        if not isinstance(s.terms[0], HomogeneousOneForm):
            raise DomainError("vector potentials must be one-form valued symbols")
    top = max(A.order, A_prime.order)
    bottom = min(A.order - len(A.terms) + 1, A_prime.order - len(A_prime.terms) + 1)
    for degree in range(top, bottom - 1, -1):
        a, b = A.term(degree), A_prime.term(degree)
        if a.is_zero and b.is_zero:
            continue
        diff = a - b
        if not _is_zero_term(diff):
            return PotentialDifference(-degree, diff)
    return None


# -- concrete forms -----------------------------------------------------------


def tangential2d(c: float = 1.0, degree: int = -2) -> HomogeneousOneForm:
    """c * (-u_2, u_1) on the plane; aradial."""
    c = float(c)
    return HomogeneousOneForm(
        2, degree, lambda u: c * np.stack([-u[:, 1], u[:, 0]], axis=-1), aradial=True, label=f"tangential2d(c={c!r})"
    )


def radial(n: int, f: float = 1.0, degree: int = -2) -> HomogeneousOneForm:
    """f * u: purely radial covector field."""
    f = float(f)
    return HomogeneousOneForm(n, degree, lambda u: f * u, label=f"radial(f={f!r})")


def constant_form(covector, degree: int = -2) -> HomogeneousOneForm:
    c = np.asarray(covector, dtype=float)
    return HomogeneousOneForm(c.shape[0], degree, lambda u: np.broadcast_to(c, u.shape).copy(), label="constant")


def linear_combination(coefficients: Sequence[float], forms: Sequence[HomogeneousOneForm]) -> HomogeneousOneForm:
    """sum_i c_i forms_i, without the pairwise closure chain of repeated ``+``."""
    if not forms:
        raise DomainError("empty combination")
    coeffs = [float(c) for c in coefficients]
    if len(coeffs) != len(forms):
        raise DomainError("coefficient count does not match form count")
    n, degree = forms[0].n, forms[0].degree
    if any(f.n != n or f.degree != degree for f in forms):
        raise DomainError("forms must share dimension and degree")
    funcs = [f.components for f in forms]

    def combined(u):
        out = np.zeros(u.shape)
        for c, f in zip(coeffs, funcs):
            if c != 0.0:
                out = out + c * np.asarray(f(u))
        return out

    return HomogeneousOneForm(n, degree, combined, aradial=all(f.aradial for f in forms))


def polynomial_form(n: int, expressions: Sequence[str], degree: int = -2, label: str = "custom") -> HomogeneousOneForm:
    """
    One-form whose sphere components are polynomials in u1..un.

    ``expressions`` holds one polynomial string per component, e.g.
    ``["-u2", "u1"]``.
    """
    import sympy

    if len(expressions) != n:
        raise DomainError(f"expected {n} component expressions, got {len(expressions)}")
    syms = sympy.symbols(" ".join(f"u{i + 1}" for i in range(n)))
    local = {str(s): s for s in syms}
    funcs = []
    for text in expressions:
        try:
            expr = sympy.parse_expr(str(text), local_dict=local, evaluate=True)
            sympy.Poly(expr, *syms)
        except (sympy.SympifyError, sympy.PolynomialError, SyntaxError, TypeError) as exc:
            raise DomainError(f"component {text!r} is not a polynomial in u1..u{n}") from exc
        funcs.append(sympy.lambdify(syms, expr, "numpy"))

    def components(u):
        cols = [np.broadcast_to(np.asarray(f(*u.T), dtype=float), (u.shape[0],)) for f in funcs]
        return np.stack(cols, axis=-1)

    return HomogeneousOneForm(n, degree, components, label=label)
