"""Direct numerical evaluation of squeezed and phase-diffused Wigner functions.

This is the quadrature-based counterpart of the sampling pipeline and serves
as its independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import trapezoid

from .exceptions import GridCoverageError
from .phase_space import SqueezedStateSpec, diffused_variances

MIN_POINTS = 16
COVERAGE_SD = 6.0
PHASE_CUTOFF_SD = 5.0
NEGATIVE_TOL = 1e-12


@dataclass(frozen=True)
class GridGeometry:
    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    np: int

    def __post_init__(self):
        if self.nx < MIN_POINTS or self.np < MIN_POINTS:
            raise GridCoverageError(f"grid needs at least {MIN_POINTS} points per axis")
        if not (self.x_min < self.x_max and self.p_min < self.p_max):
            raise GridCoverageError("grid bounds must be increasing")

    @classmethod
    def square(cls, extent: float, nx: int, np_: int | None = None) -> "GridGeometry":
        return cls(-extent, extent, -extent, extent, nx, nx if np_ is None else np_)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np)

    @property
    def half_width(self) -> float:
        return min(-self.x_min, self.x_max, -self.p_min, self.p_max)


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Wigner density sampled on a rectangular grid.

    ``values[i, j]`` is the density at ``(xs[i], ps[j])``, i.e. row-major with
    ``x`` as the slow index.
    """

    geometry: GridGeometry
    values: np.ndarray
    phase_nodes: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        g = self.geometry
        if v.shape != (g.nx, g.np):
            raise ValueError(f"values shape {v.shape} does not match grid ({g.nx}, {g.np})")
        object.__setattr__(self, "values", v)

    @property
    def xs(self):
        return self.geometry.xs

    @property
    def ps(self):
        return self.geometry.ps


def wigner_sms_at(spec: SqueezedStateSpec, x, p):
    """Wigner function of the squeezed state ``spec`` (vacuum variance 1)."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    norm = 1.0 / (2 * math.pi * math.sqrt(spec.vx * spec.vp))
    return norm * np.exp(-0.5 * x * x / spec.vx - 0.5 * p * p / spec.vp)


def phase_quadrature(sigma: float, nodes: int):
    """Gauss-Legendre nodes and weights for averaging over phi ~ N(0, sigma^2).

    The Gaussian is truncated at +-5 sigma and the weights renormalized to 1.
    """
    t, w = leggauss(nodes)
    half = PHASE_CUTOFF_SD * sigma
    phi = half * t
    w = w * np.exp(-0.5 * (phi / sigma) ** 2)
    return phi, w / w.sum()


def wigner_diffused_at(spec: SqueezedStateSpec, sigma: float, x, p, nodes: int = 64):
    """Phase-averaged Wigner function at arbitrary points using ``nodes`` phases."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return wigner_sms_at(spec, x, p)
    out = np.zeros(np.broadcast(x, p).shape)
    for phi, w in zip(*phase_quadrature(sigma, nodes)):
        c, s = math.cos(phi), math.sin(phi)
        out += w * wigner_sms_at(spec, x * c + p * s, p * c - x * s)
    return out


def _check_coverage(spec, sigma, geometry):
    need = COVERAGE_SD * math.sqrt(max(diffused_variances(spec, sigma)))
    if geometry.half_width < need * (1 - 1e-12):
        raise GridCoverageError(
            f"grid half-width {geometry.half_width:.4g} < {need:.4g} (6 sd of the widest quadrature)"
        )


def wigner_diffused_grid(spec: SqueezedStateSpec, sigma: float, geometry: GridGeometry,
                         tol: float = 1e-8, max_nodes: int = 4096) -> Grid2D:
    """Evaluate the phase-diffused Wigner function on a grid.

    The phase average uses Gauss-Legendre quadrature over [-5 sigma, 5 sigma].
    The node count starts at 32 and doubles until no grid value changes by
    more than ``tol``.
    """
    _check_coverage(spec, sigma, geometry)
    X, P = np.meshgrid(geometry.xs, geometry.ps, indexing="ij")
    if sigma == 0:
        return Grid2D(geometry, wigner_sms_at(spec, X, P))
    nodes = 32
    current = wigner_diffused_at(spec, sigma, X, P, nodes)
    while True:
        if 2 * nodes > max_nodes:
            raise RuntimeError(f"phase quadrature did not converge to {tol} within {max_nodes} nodes")
        refined = wigner_diffused_at(spec, sigma, X, P, 2 * nodes)
        nodes *= 2
        converged = np.max(np.abs(refined - current)) <= tol
        current = refined
        if converged:
            return Grid2D(geometry, current, phase_nodes=nodes)


def grid_marginals(g: Grid2D):
    """x- and p-marginal densities (trapezoidal integration)."""
    return trapezoid(g.values, g.ps, axis=1), trapezoid(g.values, g.xs, axis=0)


def _marginal_variance(axis, density):
    mass = trapezoid(density, axis)
    mean = trapezoid(axis * density, axis) / mass
    return trapezoid((axis - mean) ** 2 * density, axis) / mass


def grid_checks(g: Grid2D) -> tuple[float, float, float]:
    """Return ``(total_mass, x_marginal_variance, p_marginal_variance)``.

    Raises:
        GridCoverageError: the grid does not extend to 6 standard deviations
            of its own widest marginal, or holds negative densities.
    """
    if g.values.min() < -NEGATIVE_TOL:
        raise GridCoverageError(f"negative density {g.values.min():.3g} on grid")
    mx, mp = grid_marginals(g)
    mass = float(trapezoid(mx, g.xs))
    vx = float(_marginal_variance(g.xs, mx))
    vp = float(_marginal_variance(g.ps, mp))
    need = COVERAGE_SD * math.sqrt(max(vx, vp))
    if g.geometry.half_width < need * (1 - 1e-12):
        raise GridCoverageError(
            f"grid half-width {g.geometry.half_width:.4g} < {need:.4g} (6 sd of the widest marginal)"
        )
    return mass, vx, vp
