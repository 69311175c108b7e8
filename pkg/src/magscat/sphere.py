"""
Geometry of the unit sphere S^{n-1} in R^n.

Unit vectors are plain read-only numpy arrays of shape (n,). A great-circle
geodesic is fixed by its start direction ``omega`` and a unit tangent
``tangent`` orthogonal to it,

    gamma(s) = cos(s) * omega + sin(s) * tangent,    0 <= s <= pi,

so it runs from ``omega`` to the antipode ``-omega``. Beam coordinates
``(r, s, theta)`` of a point ``x`` relative to ``omega`` are the radius, the
geodesic distance of ``x/|x|`` from ``omega`` and the unit direction of the
component of ``x`` orthogonal to ``omega``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

UNIT_TOL = 1e-12
AXIS_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def unit_vector(x, tol: float = UNIT_TOL) -> np.ndarray:
    """Validate ``x`` as a unit vector of dimension n >= 2 and return a read-only copy."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DomainError(f"unit vector must be 1-D with n >= 2 components, got shape {x.shape}")
    norm = np.linalg.norm(x)
    if abs(norm - 1.0) > tol:
        raise DomainError(f"vector has norm {norm!r}, not 1")
    return _frozen(x)


def normalize(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise DomainError("cannot normalize the zero vector")
    return _frozen(x / norm)


def basis_vector(n: int, i: int) -> np.ndarray:
    """The i-th standard basis vector (0-based) of R^n; ``basis_vector(n, -1)`` is the north pole."""
    e = np.zeros(n)
    e[i] = 1.0
    return _frozen(e)


def north_pole(n: int) -> np.ndarray:
    return basis_vector(n, n - 1)


@dataclass(frozen=True)
class Rotation:
    """Proper orthogonal n x n matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"rotation matrix must be square, got shape {m.shape}")
        gram = m.T @ m
        if np.max(np.abs(gram - np.eye(m.shape[0]))) > 1e-12:
            raise DomainError("rotation matrix is not orthogonal")
        if abs(np.linalg.det(m) - 1.0) > 1e-10:
            raise DomainError("rotation matrix does not have determinant +1")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x) -> np.ndarray:
        """Rotate a vector, or each row of an (m, n) array."""
        return np.asarray(x, dtype=float) @ self.matrix.T

    def inverse(self) -> Rotation:
        return Rotation(self.matrix.T)


def _householder(v):
    return np.eye(v.shape[0]) - 2.0 * np.outer(v, v) / np.dot(v, v)


def rotate_to_north(omega) -> Rotation:
    """
    Proper rotation R with R @ omega = e_n.

    A Householder reflection carries ``omega`` to the pole that avoids
    cancellation in ``omega -/+ e_n``; a second reflection fixing that image
    restores det = +1. ``e_n`` maps to the identity and ``-e_n`` to the
    rotation by pi in the (e_1, e_n) plane.
    """
    omega = unit_vector(omega)
    n = omega.shape[0]
    e_n = north_pole(n)
    flip = np.eye(n)
    if omega[-1] >= 0.0:
        # H @ omega = -e_n; flipping the last axis sends it to +e_n
        h = _householder(omega + e_n)
        flip[-1, -1] = -1.0
    else:
        h = _householder(omega - e_n)
        flip[0, 0] = -1.0
    return Rotation(flip @ h)


@dataclass(frozen=True)
class Geodesic:
    """Great circle from ``omega`` to ``-omega`` with initial velocity ``tangent``."""

    omega: np.ndarray
    tangent: np.ndarray

    def __post_init__(self):
        omega = unit_vector(self.omega)
        tangent = unit_vector(self.tangent)
        if omega.shape != tangent.shape:
            raise DomainError("omega and tangent have different dimensions")
        if abs(np.dot(omega, tangent)) > UNIT_TOL:
            raise DomainError("tangent is not orthogonal to omega")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "tangent", tangent)

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    def reversed(self) -> Geodesic:
        """The same arc traversed from ``-omega``: s -> gamma(pi - s)."""
        return Geodesic(-self.omega, self.tangent)

    def rotated(self, rotation: Rotation) -> Geodesic:
        return Geodesic(rotation.apply(self.omega), rotation.apply(self.tangent))


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > np.pi) or np.any(~np.isfinite(s)):
        raise DomainError("geodesic parameter s must lie in [0, pi]")
    return s


def geodesic_point(g: Geodesic, s) -> np.ndarray:
    """gamma(s); for array ``s`` of shape (m,) the result has shape (m, n)."""
    s = _check_s(s)
    c = np.cos(s)[..., None]
    sn = np.sin(s)[..., None]
    return c * g.omega + sn * g.tangent


def geodesic_velocity(g: Geodesic, s) -> np.ndarray:
    """gamma'(s) = -sin(s) omega + cos(s) tangent."""
    s = _check_s(s)
    c = np.cos(s)[..., None]
    sn = np.sin(s)[..., None]
    return -sn * g.omega + c * g.tangent


@dataclass(frozen=True)
class BeamCoords:
    """
    Beam coordinates of a point relative to a direction omega.

    ``theta`` is ``None`` when the point lies within 1e-9 of the axis
    (s = 0 or s = pi), where the angular coordinate is undefined.
    """

    r: float
    s: float
    theta: np.ndarray | None

    @property
    def singular(self) -> bool:
        return self.theta is None


def beam_coords(x, omega) -> BeamCoords:
    omega = unit_vector(omega)
    x = np.asarray(x, dtype=float)
    if x.shape != omega.shape:
        raise DomainError("x and omega have different dimensions")
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise DomainError("beam coordinates are undefined at the origin")
    u = x / r
    axial = float(np.dot(u, omega))
    perp = u - axial * omega
    perp_norm = float(np.linalg.norm(perp))
    s = float(np.arctan2(perp_norm, axial))
    if s < AXIS_TOL or np.pi - s < AXIS_TOL:
        return BeamCoords(r, s, None)
    return BeamCoords(r, s, _frozen(perp / perp_norm))


# -- deterministic direction samplers ---------------------------------------


def circle_points(count: int) -> list[np.ndarray]:
    """``count`` points on S^1 at uniform angles starting from (1, 0)."""
    phi = 2.0 * np.pi * np.arange(count) / count
    return [_frozen([np.cos(p), np.sin(p)]) for p in phi]


def fibonacci_sphere(count: int) -> list[np.ndarray]:
    """Fibonacci lattice of ``count`` points on S^2."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
    return [normalize(p) for p in pts]


def halton_sphere(n: int, count: int) -> list[np.ndarray]:
    """Quasi-random points on S^{n-1}: unscrambled Halton mapped through the normal quantile."""
    from scipy.stats import norm, qmc

    u = qmc.Halton(d=n, scramble=False).random(count + 1)[1:]
    g = norm.ppf(u)
    return [normalize(p) for p in g]


def sample_directions(n: int, count: int) -> list[np.ndarray]:
    """Well-spread unit vectors: uniform angles (n=2), Fibonacci (n=3), Halton otherwise."""
    if n == 2:
        return circle_points(count)
    if n == 3:
        return fibonacci_sphere(count)
    return halton_sphere(n, count)


def clockwise_tangent(omega) -> np.ndarray:
    """For n = 2, the unit tangent (omega_2, -omega_1) obtained by turning omega clockwise."""
    omega = unit_vector(omega)
    if omega.shape[0] != 2:
        raise DomainError("clockwise tangent is only defined for n = 2")
    return _frozen([omega[1], -omega[0]])


def tangent_fan(omega, count: int) -> list[np.ndarray]:
    """
    ``count`` unit tangents in the orthogonal complement of ``omega``.

    n = 2: the clockwise tangent, then (for count = 2) its negative.
    n = 3: uniform angles in the plane omega-perp, in the frame given by
    ``rotate_to_north(omega)``. n >= 4: Halton directions on that frame's
    S^{n-2}.
    """
    omega = unit_vector(omega)
    n = omega.shape[0]
    if count < 1:
        raise DomainError("tangent count must be >= 1")
    if n == 2:
        if count > 2:
            raise DomainError("omega-perp in n = 2 contains only two unit tangents")
        v = clockwise_tangent(omega)
        return [v, _frozen(-v)][:count]
    frame = rotate_to_north(omega).matrix.T  # columns 0..n-2 span omega-perp
    if n == 3:
        alpha = 2.0 * np.pi * np.arange(count) / count
        local = np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)
    else:
        local = np.array(halton_sphere(n - 1, count))
    out = []
    for w in local:
        v = frame[:, : n - 1] @ w
        v = v - np.dot(v, omega) * omega
        out.append(normalize(v))
    return out


def geodesic_family(n: int, n_omegas: int, tangents_per_omega: int) -> list[Geodesic]:
    """
    Geodesics over ``sample_directions(n, n_omegas)`` x ``tangent_fan``,
    omega-major, dropping any geodesic whose reversal is already present.
    """
    out: list[Geodesic] = []
    for omega in sample_directions(n, n_omegas):
        for v in tangent_fan(omega, tangents_per_omega):
            g = Geodesic(omega, v)
            if any(
                np.allclose(h.omega, -g.omega, atol=1e-12) and np.allclose(h.tangent, g.tangent, atol=1e-12)
                for h in out
            ):
                continue
            out.append(g)
    return out
