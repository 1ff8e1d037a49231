"""Decoherence channels acting on phase-space ensembles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .phase_space import Ensemble, rotate_points

GAUSSIAN_IID = "gaussian_iid"
BANDLIMITED = "bandlimited"


@dataclass(frozen=True)
class PhaseNoiseSpec:
    """Random phase noise of standard deviation ``sigma`` (radians).

    ``kind="bandlimited"`` additionally needs ``band=(f_lo, f_hi)`` and the
    sampling rate ``fs`` (Hz), with ``0 < f_lo < f_hi < fs / 2``.
    """

    sigma: float
    kind: str = GAUSSIAN_IID
    band: tuple | None = None
    fs: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if self.kind == GAUSSIAN_IID:
            return
        if self.kind != BANDLIMITED:
            raise ValueError(f"unknown phase-noise kind {self.kind!r}")
        if self.band is None or self.fs is None:
            raise ValueError("bandlimited noise needs band and fs")
        object.__setattr__(self, "band", tuple(float(f) for f in self.band))
        _check_band(self.band, self.fs)


@dataclass(frozen=True)
class LossSpec:
    """Beam-splitter loss with intensity transmission ``eta``."""

    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")


def _check_band(band, fs):
    f_lo, f_hi = band
    if not (0 < f_lo < f_hi < fs / 2):
        raise ValueError(f"need 0 < f_lo < f_hi < fs/2, got band={band}, fs={fs}")


def apply_phase_series(ens: Ensemble, phases, label: str = "phase_series") -> Ensemble:
    """Rotate point ``i`` of ``ens`` by ``phases[i]``."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (ens.n,):
        raise ValueError(f"need one phase per point ({ens.n}), got shape {phases.shape}")
    return ens.derive(rotate_points(ens.points, phases), label)


def apply_gaussian_phase_diffusion(ens: Ensemble, sigma: float, seed, threads: int = 1) -> Ensemble:
    """Rotate every point by an independent angle drawn from N(0, sigma^2)."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    key = _rng.seed_key(seed)
    label = f"phase_diffusion(sigma={sigma!r}, seed={key})"
    if sigma == 0:
        return ens.derive(ens.points, label)
    phases = sigma * _rng.standard_normal(key, ens.n, threads=threads)
    return apply_phase_series(ens, phases, label)


def bandlimited_phase_series(n: int, fs: float, band, sigma: float, seed) -> np.ndarray:
    """Band-limited Gaussian phase noise, sampled at ``fs``.

    White Gaussian noise is masked to ``band`` in the frequency domain and
    rescaled so that the sample standard deviation equals ``sigma`` exactly.
    The marginal of each sample is N(0, sigma^2); neighbouring samples are
    correlated over roughly ``fs / (f_hi - f_lo)`` samples.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    _check_band(band, fs)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return np.zeros(n)
    f_lo, f_hi = band
    white = _rng.generator(seed).standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    spectrum[(freqs < f_lo) | (freqs > f_hi)] = 0
    series = np.fft.irfft(spectrum, n)
    series -= series.mean()
    std = series.std()
    if std == 0:
        raise ValueError(f"band {band} contains no frequency bins for n={n}, fs={fs}")
    return series * (sigma / std)


def band_power_fraction(series, fs: float, band) -> float:
    """Fraction of periodogram power (DC excluded) inside ``band``."""
    series = np.asarray(series, dtype=float)
    power = np.abs(np.fft.rfft(series - series.mean())) ** 2
    freqs = np.fft.rfftfreq(series.size, d=1.0 / fs)
    total = power[1:].sum()
    inside = power[(freqs >= band[0]) & (freqs <= band[1])].sum()
    return float(inside / total)


def apply_phase_noise(ens: Ensemble, noise: PhaseNoiseSpec, seed, threads: int = 1) -> Ensemble:
    """Dispatch on ``noise.kind``."""
    if noise.kind == GAUSSIAN_IID:
        return apply_gaussian_phase_diffusion(ens, noise.sigma, seed, threads=threads)
    key = _rng.seed_key(seed)
    phases = bandlimited_phase_series(ens.n, noise.fs, noise.band, noise.sigma, key)
    label = f"bandlimited_phase(sigma={noise.sigma!r}, band={noise.band}, fs={noise.fs!r}, seed={key})"
    return apply_phase_series(ens, phases, label)


def apply_loss(ens: Ensemble, loss: LossSpec, seed, threads: int = 1) -> Ensemble:
    """Mix each point with a fresh vacuum sample: ``sqrt(eta) pt + sqrt(1-eta) v``.

    Variances map as ``V -> eta V + (1 - eta)``.
    """
    key = _rng.seed_key(seed)
    label = f"loss(eta={loss.eta!r}, seed={key})"
    if loss.eta == 1:
        return ens.derive(ens.points, label)
    vac = _rng.standard_normal(key, ens.n, 2, threads=threads)
    pts = math.sqrt(loss.eta) * ens.points + math.sqrt(1 - loss.eta) * vac
    return ens.derive(pts, label)
