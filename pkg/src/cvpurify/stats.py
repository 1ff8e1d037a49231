"""Estimators for variances, Gaussianity, mixedness and Gaussian entanglement.

Standard errors from :func:`variance_with_se` use the Gaussian formula
``V sqrt(2 / (n - 1))``. That underestimates the error on leptokurtic data
such as phase-diffused quadratures; :func:`bootstrap_se` gives a
distribution-free alternative.

:func:`log_negativity` treats the supplied covariance as if it belonged to a
Gaussian state. On the non-Gaussian states produced by phase diffusion it is
a diagnostic of the second moments only, not an entanglement measure of the
actual state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import _rng
from .exceptions import SparseBinError

MIN_EXPECTED_PER_BIN = 20
CHI2_RANGE_SD = 4.0


@dataclass(frozen=True)
class VarianceEstimate:
    value: float
    stderr: float
    n: int

    @property
    def db(self) -> float:
        return 10 * math.log10(self.value)


def _as_1d(samples, min_n, what):
    a = np.asarray(samples, dtype=float).ravel()
    if a.size < min_n:
        raise ValueError(f"{what} needs at least {min_n} samples, got {a.size}")
    return a


def variance_with_se(samples) -> VarianceEstimate:
    """Unbiased, mean-subtracted sample variance with its Gaussian standard error."""
    a = _as_1d(samples, 2, "variance")
    v = float(np.var(a, ddof=1))
    if not v > 0:
        raise ValueError("samples have zero variance")
    return VarianceEstimate(v, v * math.sqrt(2.0 / (a.size - 1)), a.size)


def excess_kurtosis(samples) -> float:
    """Fourth standardized central moment minus 3 (0 for a Gaussian)."""
    a = _as_1d(samples, 4, "kurtosis")
    d = a - a.mean()
    m2 = np.mean(d * d)
    if not m2 > 0:
        raise ValueError("samples have zero variance")
    return float(np.mean(d**4) / m2**2 - 3.0)


def kurtosis_se(n: int) -> float:
    """Standard error of the excess kurtosis of ``n`` Gaussian samples."""
    return math.sqrt(24.0 / n)


# -- bootstrap ---------------------------------------------------------------

def _power_sums(cols: np.ndarray, n_blocks: int, order: int) -> np.ndarray:
    blocks = np.array_split(cols, n_blocks)
    out = np.empty((len(blocks), cols.shape[1], order + 1))
    for b, blk in enumerate(blocks):
        pw = np.ones_like(blk)
        for m in range(order + 1):
            out[b, :, m] = pw.sum(axis=0)
            pw = pw * blk
    return out


def _variance_from_sums(s):
    n = s[..., 0]
    mean = s[..., 1] / n
    return (s[..., 2] - n * mean * mean) / (n - 1)


def _kurtosis_from_sums(s):
    n = s[..., 0]
    m1, m2, m3, m4 = (s[..., k] / n for k in (1, 2, 3, 4))
    c2 = m2 - m1 * m1
    c4 = m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1**4
    return c4 / (c2 * c2) - 3.0


def _product_from_sums(s):
    v = _variance_from_sums(s)
    return v[..., 0] * v[..., 1]


_STATISTICS = {
    "variance": (_variance_from_sums, 2, 1),
    "kurtosis": (_kurtosis_from_sums, 4, 1),
    "variance_product": (_product_from_sums, 2, 2),
}


def bootstrap_se(data, statistic: str = "variance", n_resamples: int = 1000,
                 n_blocks: int = 1000, seed=0) -> float:
    """Bootstrap standard error of a moment statistic.

    The samples are cut into ``n_blocks`` contiguous blocks and whole blocks
    are resampled with replacement; for i.i.d. data this is an ordinary
    nonparametric bootstrap at block granularity, and it only needs the
    per-block power sums, so 1000 resamples of 10^6 points are cheap. With
    fewer samples than blocks every sample is its own block.

    Args:
        data: 1-D samples, or an (n, 2) array of ``(x, p)`` for
            ``statistic="variance_product"``.
        statistic: ``"variance"``, ``"kurtosis"`` or ``"variance_product"``.
        n_resamples: number of bootstrap replicates.
        n_blocks: number of resampling units.
        seed: seed key of the resampling stream.
    """
    try:
        fn, order, ncols = _STATISTICS[statistic]
    except KeyError:
        raise ValueError(f"unknown statistic {statistic!r}") from None
    cols = np.asarray(data, dtype=float)
    cols = cols.reshape(-1, 1) if ncols == 1 else cols
    if cols.ndim != 2 or cols.shape[1] != ncols:
        raise ValueError(f"{statistic} expects {ncols} column(s), got shape {np.shape(data)}")
    if cols.shape[0] < 2 * order:
        raise ValueError(f"too few samples ({cols.shape[0]}) for a bootstrap")
    sums = _power_sums(cols, min(n_blocks, cols.shape[0]), order)
    nb = sums.shape[0]
    rng = _rng.generator(seed)
    counts = rng.multinomial(nb, np.full(nb, 1.0 / nb), size=n_resamples).astype(float)
    resampled = np.tensordot(counts, sums, axes=(1, 0))
    reps = fn(resampled)
    if reps.ndim > 1:
        reps = reps[:, 0]
    return float(np.std(reps, ddof=1))


# -- Gaussianity ---------------------------------------------------------------

def chi2_bin_edges(mean, sd, bin_count):
    return np.linspace(mean - CHI2_RANGE_SD * sd, mean + CHI2_RANGE_SD * sd, bin_count + 1)


def _expected_counts(n, mean, sd, edges):
    return n * np.diff(ndtr((edges - mean) / sd))


def auto_bin_count(n: int, max_bins: int = 100) -> int:
    """Largest bin count (<= ``max_bins``) keeping every expected count >= 20."""
    for bins in range(max_bins, 3, -1):
        if _expected_counts(n, 0.0, 1.0, chi2_bin_edges(0.0, 1.0, bins)).min() >= MIN_EXPECTED_PER_BIN:
            return bins
    raise SparseBinError(f"n={n} is too small for a 4-bin chi-square test")


def gaussian_chi2_reduced(samples, bin_count: int | None = None) -> float:
    """Reduced Pearson chi-square of a histogram against the fitted Gaussian.

    The Gaussian takes the sample mean and (unbiased) variance. Bins are
    equal-width over +-4 sample standard deviations; samples outside are
    ignored. The statistic is divided by ``bin_count - 3``.
    """
    a = _as_1d(samples, 10_000, "chi-square test")
    if bin_count is None:
        bin_count = auto_bin_count(a.size)
    if bin_count < 4:
        raise ValueError("need at least 4 bins")
    mean, sd = a.mean(), a.std(ddof=1)
    edges = chi2_bin_edges(mean, sd, bin_count)
    expected = _expected_counts(a.size, mean, sd, edges)
    if expected.min() < MIN_EXPECTED_PER_BIN:
        raise SparseBinError(
            f"{bin_count} bins leave {expected.min():.1f} expected counts in the tail bin "
            f"(need {MIN_EXPECTED_PER_BIN}); use fewer bins"
        )
    observed, _ = np.histogram(a, edges)
    return float(np.sum((observed - expected) ** 2 / expected) / (bin_count - 3))


# -- two-mode covariance and log-negativity -------------------------------------

_OMEGA = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)
# symplectic eigenvalues this close to 1 are rounding noise, not entanglement
_ROUNDING = 1e-12

@dataclass(frozen=True, eq=False)
class CovMatrix4:
    """Covariance over ``(x_I, p_I, x_II, p_II)``; vacuum is the identity.

    ``n`` is the number of samples the matrix was estimated from, or ``None``
    for an exact (analytic) matrix.
    """

    matrix: np.ndarray
    n: int | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"need a 4x4 matrix, got {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def stderr(self) -> np.ndarray:
        """Gaussian standard error of each entry."""
        if self.n is None:
            return np.zeros((4, 4))
        d = np.diag(self.matrix)
        return np.sqrt((np.outer(d, d) + self.matrix**2) / (self.n - 1))

    def nu_tolerance(self, nu: float) -> float:
        # approximate 3-sigma Monte Carlo uncertainty of a symplectic eigenvalue
        if self.n is None:
            return 1e-9
        return 3 * nu * math.sqrt(2.0 / self.n)


def covariance4(tm) -> CovMatrix4:
    """Sample covariance of a two-mode ensemble (anything with ``.rows`` of shape (n, 4))."""
    rows = np.asarray(getattr(tm, "rows", tm), dtype=float)
    if rows.ndim != 2 or rows.shape[1] != 4:
        raise ValueError(f"need (n, 4) rows, got {rows.shape}")
    if rows.shape[0] < 10_000:
        raise ValueError(f"covariance4 needs n >= 10^4 samples, got {rows.shape[0]}")
    return CovMatrix4(np.cov(rows, rowvar=False), n=rows.shape[0])


def _matrix(cov):
    return cov.matrix if isinstance(cov, CovMatrix4) else np.asarray(cov, dtype=float)


def symplectic_eigenvalues(cov) -> np.ndarray:
    """Symplectic eigenvalues (ascending) of a 4x4 covariance matrix.

    Computed as the positive eigenvalues of the Hermitian matrix
    ``V^(1/2) i Omega V^(1/2)``, which stays accurate when the two values
    coincide (pure states).
    """
    m = _matrix(cov)
    w, u = np.linalg.eigh(m)
    if w.min() <= 0:
        raise ValueError("covariance matrix is not positive definite")
    root = (u * np.sqrt(w)) @ u.T
    ev = np.linalg.eigvalsh(root @ (1j * _OMEGA) @ root)
    return np.sort(np.abs(ev))[::2]


def partial_transpose(cov) -> np.ndarray:
    """Flip the sign of ``p_II`` (partial transposition of mode II)."""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return flip @ _matrix(cov) @ flip


def check_physical(cov) -> None:
    """Raise ``ValueError`` unless ``cov`` is a valid quantum covariance matrix."""
    if not isinstance(cov, CovMatrix4):
        cov = CovMatrix4(cov)
    m = cov.matrix
    if not np.allclose(m, m.T, rtol=0, atol=1e-12):
        raise ValueError("covariance matrix is not symmetric")
    if np.linalg.eigvalsh(m).min() <= 0:
        raise ValueError("covariance matrix is not positive definite")
    nu = symplectic_eigenvalues(m)[0]
    if nu < 1 - cov.nu_tolerance(nu):
        raise ValueError(f"smallest symplectic eigenvalue {nu:.6g} < 1: unphysical covariance")


def log_negativity(cov) -> float:
    """Logarithmic negativity (bits) of the Gaussian state with covariance ``cov``."""
    check_physical(cov)
    nu = symplectic_eigenvalues(partial_transpose(cov))[0]
    if nu >= 1 - _ROUNDING:
        return 0.0
    return -math.log2(nu)
