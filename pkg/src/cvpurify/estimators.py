"""scikit-learn compatible transformers for the purification pipeline.

Arrays hold one row per sample and two columns ``(x, p)`` per mode, so a
pair of copies is ``(x_A, p_A, x_B, p_B)``. The steps compose with
:class:`sklearn.pipeline.Pipeline`::

    pipe = make_pipeline(PhaseDiffusion(sigma=0.304, random_state=1),
                         BeamSplitter(),
                         HomodyneTrigger(rate=0.5))
    purified = pipe.fit_transform(two_copies)   # (n/2, 2) mode-II survivors
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import _rng
from .phase_space import rotate_points
from .protocol import SQRT_HALF


def _check_modes(X, n_modes=None):
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    if X.shape[1] % 2:
        raise ValueError(f"need two columns (x, p) per mode, got {X.shape[1]} columns")
    if n_modes is not None and X.shape[1] != 2 * n_modes:
        raise ValueError(f"expected {n_modes} mode(s) ({2 * n_modes} columns), got {X.shape[1]}")
    return X


class PhaseDiffusion(TransformerMixin, BaseEstimator):
    """Rotate every mode of every sample by an independent N(0, sigma^2) phase.

    Mode ``m`` draws its phases from substream ``(random_state, m)``, so
    transforming the same array twice gives the same result.
    """

    def __init__(self, sigma=0.0, random_state=0):
        self.sigma = sigma
        self.random_state = random_state

    def fit(self, X, y=None):
        X = _check_modes(X)
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _check_modes(X, self.n_features_in_ // 2)
        out = np.empty_like(X)
        for m in range(X.shape[1] // 2):
            cols = slice(2 * m, 2 * m + 2)
            if self.sigma == 0:
                out[:, cols] = X[:, cols]
                continue
            phases = self.sigma * _rng.standard_normal(_rng.derive(self.random_state, m), X.shape[0])
            out[:, cols] = rotate_points(X[:, cols], phases)
        return out


class BeamSplitter(TransformerMixin, BaseEstimator):
    """50/50 beam splitter: ``(x_A, p_A, x_B, p_B) -> (x_I, p_I, x_II, p_II)``."""

    def fit(self, X, y=None):
        X = _check_modes(X, 2)
        self.n_features_in_ = 4
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _check_modes(X, 2)
        a, b = X[:, :2], X[:, 2:]
        return np.hstack(((a + b) * SQRT_HALF, (a - b) * SQRT_HALF))


class HomodyneTrigger(BaseEstimator):
    """Post-select mode II on ``|x_I| <= threshold``.

    With ``threshold=None`` the threshold is learned in :meth:`fit` as the
    ``rate``-quantile of ``|x_I|``; :meth:`transform` then applies the fixed
    threshold, so new data may survive at a different rate.

    Attributes:
        threshold_: threshold in use.
        survival_rate_: fraction of the fitting data that passed.
    """

    def __init__(self, threshold=None, rate=0.5):
        self.threshold = threshold
        self.rate = rate

    def fit(self, X, y=None):
        X = _check_modes(X, 2)
        a = np.abs(X[:, 0])
        if self.threshold is not None:
            if self.threshold < 0:
                raise ValueError(f"threshold must be >= 0, got {self.threshold}")
            self.threshold_ = float(self.threshold)
        else:
            if not 0 < self.rate <= 1:
                raise ValueError(f"rate must lie in (0, 1], got {self.rate}")
            k = max(1, min(a.size, int(np.floor(self.rate * a.size + 0.5))))
            self.threshold_ = float(np.partition(a, k - 1)[k - 1])
        self.survival_rate_ = float(np.mean(a <= self.threshold_))
        self.n_features_in_ = 4
        return self

    def get_support(self, X):
        """Boolean mask of rows that pass the trigger."""
        check_is_fitted(self, "threshold_")
        X = _check_modes(X, 2)
        return np.abs(X[:, 0]) <= self.threshold_

    def transform(self, X):
        X = _check_modes(X, 2)
        return X[self.get_support(X), 2:]

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)
