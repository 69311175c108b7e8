"""
Composite Gauss-Legendre quadrature on subintervals of [0, pi], running
integrals, and power-law exponent fits at the antipodal endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureError, UndefinedExponentError

PANELS = 64
POINTS = 10


@lru_cache(maxsize=None)
def gauss_legendre(pts: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]; read-only, shared."""
    if pts < 1:
        raise DomainError("need at least one Gauss point")
    x, w = np.polynomial.legendre.leggauss(pts)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _evaluate(f, nodes):
    vals = np.asarray(f(nodes))
    vals = np.broadcast_to(vals, nodes.shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = np.flatnonzero(bad.ravel())[0]
        raise QuadratureError(float(nodes.ravel()[i]), vals.ravel()[i])
    return vals


@dataclass(frozen=True)
class QuadratureRule:
    """Composite rule with ``panels`` equal panels of ``pts`` Gauss points on [a, b]."""

    a: float
    b: float
    panels: int
    pts: int
    nodes: np.ndarray
    weights: np.ndarray

    def apply(self, f):
        return np.sum(self.weights * _evaluate(f, self.nodes))


@lru_cache(maxsize=256)
def composite_rule(a: float, b: float, panels: int = PANELS, pts: int = POINTS) -> QuadratureRule:
    if not a <= b:
        raise DomainError(f"integration bounds out of order: [{a}, {b}]")
    if panels < 1:
        raise DomainError("need at least one panel")
    x, w = gauss_legendre(pts)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(float(a), float(b), panels, pts, nodes, weights)


def integrate(f, a: float, b: float, panels: int = PANELS, pts: int = POINTS):
    """Composite Gauss-Legendre approximation of the integral of vectorized ``f`` over [a, b]."""
    return composite_rule(float(a), float(b), panels, pts).apply(f)


@dataclass(frozen=True, eq=False)
class CumulativeIntegral:
    """
    F(s) = integral of f from ``breakpoints[0]`` to s.

    ``values`` holds F at the breakpoints. Off-grid points add a
    ``pts``-point Gauss integral over [breakpoint, s] within the containing
    panel, so F keeps the accuracy of the panel rule everywhere.
    """

    f: object
    breakpoints: np.ndarray
    values: np.ndarray
    pts: int

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        bp = self.breakpoints
        if np.any(s < bp[0]) or np.any(s > bp[-1]):
            raise DomainError(f"s outside the cumulative grid [{bp[0]}, {bp[-1]}]")
        flat = s.ravel()
        idx = np.clip(np.searchsorted(bp, flat, side="right") - 1, 0, len(bp) - 2)
        left = bp[idx]
        x, w = gauss_legendre(self.pts)
        half = 0.5 * (flat - left)
        nodes = (left + half)[:, None] + half[:, None] * x
        vals = _evaluate(self.f, nodes)
        partial = np.sum(vals * w, axis=-1) * half
        return (self.values[idx] + partial).reshape(s.shape)


def cumulative(f, s_grid, pts: int = POINTS) -> CumulativeIntegral:
    """Running integral of ``f`` over an increasing grid in [0, pi]."""
    grid = np.array(s_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("cumulative grid needs at least two breakpoints")
    if np.any(np.diff(grid) <= 0.0):
        raise DomainError("cumulative grid must be strictly increasing")
    if grid[0] < 0.0 or grid[-1] > np.pi:
        raise DomainError("cumulative grid must lie in [0, pi]")
    x, w = gauss_legendre(pts)
    half = 0.5 * np.diff(grid)
    mid = 0.5 * (grid[1:] + grid[:-1])
    nodes = mid[:, None] + half[:, None] * x
    vals = _evaluate(f, nodes)
    panel = np.sum(vals * w, axis=-1) * half
    values = np.concatenate([[0.0], np.cumsum(panel)])
    grid.setflags(write=False)
    values.setflags(write=False)
    return CumulativeIntegral(f, grid, values, pts)


def default_grid(panels: int = PANELS) -> np.ndarray:
    return np.linspace(0.0, np.pi, panels + 1)


def endpoint_ladder(window=(np.pi - 1e-2, np.pi - 1e-6), samples: int = 24) -> np.ndarray:
    """Distances pi - s spaced geometrically across the window."""
    s_lo, s_hi = window
    if not (np.pi - 1e-2 <= s_lo < s_hi <= np.pi - 1e-8):
        raise DomainError(f"exponent window {window!r} must satisfy pi-1e-2 <= s_lo < s_hi <= pi-1e-8")
    return np.geomspace(np.pi - s_lo, np.pi - s_hi, samples)


def endpoint_exponent(f, window=(np.pi - 1e-2, np.pi - 1e-6), samples: int = 24) -> float:
    """
    Exponent alpha in f(s) ~ C (pi - s)**alpha as s -> pi-.

    Least-squares slope of log|f| against log(pi - s) on a geometric ladder.
    """
    h = endpoint_ladder(window, samples)
    s = np.pi - h
    vals = np.abs(np.asarray(f(s)))
    if np.any(~np.isfinite(vals)) or np.any(vals == 0.0):
        raise UndefinedExponentError("function vanishes or is non-finite on the exponent window")
    slope, _ = np.polyfit(np.log(np.pi - s), np.log(vals), 1)
    return float(slope)
