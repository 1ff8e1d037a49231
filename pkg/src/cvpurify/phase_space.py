"""Squeezed-state parameterization and phase-space sampling.

Units: all quadrature values and variances are in shot-noise units, i.e. the
vacuum has variance 1 in both quadratures and a pure Gaussian state has
``vx * vp == 1``. Texts that normalize the vacuum to 1/2 (uncertainty bound
``vx * vp >= 1/4``) map onto this convention by multiplying every variance
by 2; :meth:`SqueezedStateSpec.from_half_vacuum` is the only place that
conversion happens.

Every state handled by the package has a non-negative Wigner function, so it
is represented exactly (in distribution) by i.i.d. samples ``(x, p)`` drawn
from that Wigner function. Homodyne marginals and all symmetrically ordered
moments are then plain sample moments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _rng
from .exceptions import HeisenbergViolationError

HEISENBERG_TOL = 1e-9


class QuadPoint(NamedTuple):
    x: float
    p: float


@dataclass(frozen=True)
class SqueezedStateSpec:
    """Zero-mean Gaussian state with diagonal covariance ``diag(vx, vp)``."""

    vx: float
    vp: float

    def __post_init__(self):
        if not (math.isfinite(self.vx) and math.isfinite(self.vp)):
            raise ValueError(f"non-finite variances ({self.vx}, {self.vp})")
        if self.vx <= 0 or self.vp <= 0:
            raise ValueError(f"variances must be positive, got ({self.vx}, {self.vp})")
        if self.vx * self.vp < 1 - HEISENBERG_TOL:
            raise HeisenbergViolationError(
                f"vx * vp = {self.vx * self.vp:.6g} < 1: not a physical state"
            )

    @classmethod
    def from_half_vacuum(cls, vx, vp):
        """Build from variances in the vacuum = 1/2 convention."""
        return cls(2.0 * vx, 2.0 * vp)

    @property
    def is_squeezed(self) -> bool:
        return min(self.vx, self.vp) < 1

    @property
    def variance_product(self) -> float:
        return self.vx * self.vp

    @property
    def db(self) -> tuple[float, float]:
        return db_of(self.vx), db_of(self.vp)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Immutable set of phase-space samples of a single mode.

    Attributes:
        points: array of shape (n, 2), columns ``x`` and ``p``. Read-only.
        seed: seed key of the stream that generated the samples.
        provenance: human-readable lineage, one entry per operation.
    """

    points: np.ndarray
    seed: tuple = ()
    provenance: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
        if pts.shape[0] == 0:
            raise ValueError("an ensemble needs at least one point")
        if pts is self.points and pts.flags.writeable:
            pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "seed", tuple(self.seed))
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def p(self) -> np.ndarray:
        return self.points[:, 1]

    def derive(self, points, step: str) -> "Ensemble":
        """New ensemble with the same seed record and ``step`` appended to provenance."""
        return Ensemble(points, seed=self.seed, provenance=self.provenance + (step,))

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Ensemble(n={self.n}, seed={self.seed}, provenance={list(self.provenance)})"


def spec_from_db(squeeze_db: float, antisqueeze_db: float) -> SqueezedStateSpec:
    """State from squeezing (dB below shot noise) and antisqueezing (dB above).

    >>> spec_from_db(10, 10)
    SqueezedStateSpec(vx=0.1, vp=10.0)
    """
    if not (math.isfinite(squeeze_db) and math.isfinite(antisqueeze_db)):
        raise ValueError("dB values must be finite")
    if squeeze_db < 0 or antisqueeze_db < 0:
        raise ValueError("squeeze_db and antisqueeze_db are magnitudes and must be >= 0")
    return SqueezedStateSpec(10 ** (-squeeze_db / 10), 10 ** (antisqueeze_db / 10))


def db_of(variance: float) -> float:
    """Variance in dB relative to shot noise (negative means squeezed)."""
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    return 10 * math.log10(variance)


def sample_squeezed(spec: SqueezedStateSpec, n: int, seed, threads: int = 1) -> Ensemble:
    """Draw ``n`` i.i.d. phase-space samples of a squeezed state.

    Args:
        spec: the state.
        n: number of samples (>= 1).
        seed: int or tuple seed key. Identical seeds give identical ensembles.
        threads: worker threads for chunk generation; never changes the output.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    key = _rng.seed_key(seed)
    pts = _rng.standard_normal(key, n, 2, threads=threads)
    pts *= np.sqrt([spec.vx, spec.vp])
    return Ensemble(pts, seed=key, provenance=(f"squeezed(vx={spec.vx!r}, vp={spec.vp!r})",))


def rotate_point(pt, phi: float) -> QuadPoint:
    """Rotate ``(x, p)`` by ``phi``: ``(x cos + p sin, p cos - x sin)``."""
    x, p = pt
    c, s = math.cos(phi), math.sin(phi)
    return QuadPoint(x * c + p * s, p * c - x * s)


def rotate_points(points: np.ndarray, phi) -> np.ndarray:
    """Vectorized :func:`rotate_point`; ``phi`` is a scalar or one angle per row."""
    points = np.asarray(points, dtype=float)
    c, s = np.cos(phi), np.sin(phi)
    x, p = points[:, 0], points[:, 1]
    return np.column_stack((x * c + p * s, p * c - x * s))


def diffused_variances(spec: SqueezedStateSpec, sigma: float) -> tuple[float, float]:
    """Quadrature variances after Gaussian phase diffusion of width ``sigma``.

    Averages ``Var(x cos phi + p sin phi)`` over ``phi ~ N(0, sigma^2)`` using
    ``E[cos 2 phi] = exp(-2 sigma^2)``. The trace ``vx + vp`` is preserved.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    k = math.exp(-2.0 * sigma * sigma)
    vx = 0.5 * (spec.vx * (1 + k) + spec.vp * (1 - k))
    vp = 0.5 * (spec.vp * (1 + k) + spec.vx * (1 - k))
    return vx, vp
