"""Per-round result records: the row format of every simulation output."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import _rng
from .phase_space import Ensemble
from .stats import (
    auto_bin_count,
    bootstrap_se,
    excess_kurtosis,
    gaussian_chi2_reduced,
    variance_with_se,
)

NAN = float("nan")
CHI2_MIN_SAMPLES = 10_000


@dataclass(frozen=True)
class RunResult:
    """Statistics of one purification round (round 0 is the unpurified input).

    ``*_in`` fields describe a single input copy, ``*_out`` the surviving
    mode-II samples. ``se_*`` are Gaussian standard errors, ``bse_*``
    bootstrap standard errors. Variance products use both quadratures of the
    same samples.
    """

    round: int
    sigma: float
    rate_target: float
    X: float
    survival_rate: float
    n_in: int
    n_out: int
    var_x_in: float
    se_var_x_in: float
    bse_var_x_in: float
    var_x_out: float
    se_var_x_out: float
    bse_var_x_out: float
    var_p_in: float
    var_p_out: float
    se_var_p_out: float
    var_product_in: float
    bse_var_product_in: float
    var_product_out: float
    bse_var_product_out: float
    kurtosis_in: float
    bse_kurtosis_in: float
    kurtosis_out: float
    bse_kurtosis_out: float
    chi2_bins: int
    chi2_in: float
    chi2_out: float
    log_negativity: float
    db_x_in: float
    db_x_out: float
    seed: int
    n: int

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)


def _single_mode_stats(ens: Ensemble, seed) -> dict:
    vx = variance_with_se(ens.x)
    vp = variance_with_se(ens.p)
    return {
        "var_x": vx.value,
        "se_var_x": vx.stderr,
        "bse_var_x": bootstrap_se(ens.x, "variance", seed=_rng.derive(seed, 0)),
        "var_p": vp.value,
        "se_var_p": vp.stderr,
        "var_product": vx.value * vp.value,
        "bse_var_product": bootstrap_se(ens.points, "variance_product", seed=_rng.derive(seed, 1)),
        "kurtosis": excess_kurtosis(ens.x),
        "bse_kurtosis": bootstrap_se(ens.x, "kurtosis", seed=_rng.derive(seed, 2)),
        "db_x": 10 * math.log10(vx.value),
    }


def _chi2(samples, bins):
    if bins is None:
        return NAN
    return gaussian_chi2_reduced(samples, bins)


def summarize(ens_in: Ensemble, ens_out: Ensemble, *, round_index: int, sigma: float,
              threshold: float, survival_rate: float, rate_target: float,
              seed, n: int, log_negativity: float = NAN) -> RunResult:
    """Build a :class:`RunResult` comparing an input copy with the survivors.

    Passing the same ensemble as input and output (round 0) yields identical
    in/out fields. Chi-square values use one bin count for both sides, chosen
    for the smaller sample; they are NaN below 10^4 samples.
    """
    key = _rng.seed_key(seed)
    boot = _rng.derive(key, _rng.BOOTSTRAP, round_index)
    s_in = _single_mode_stats(ens_in, _rng.derive(boot, 0))
    s_out = s_in if ens_out is ens_in else _single_mode_stats(ens_out, _rng.derive(boot, 1))
    n_min = min(ens_in.n, ens_out.n)
    bins = auto_bin_count(n_min) if n_min >= CHI2_MIN_SAMPLES else None
    chi2_in = _chi2(ens_in.x, bins)
    chi2_out = chi2_in if ens_out is ens_in else _chi2(ens_out.x, bins)
    return RunResult(
        round=round_index,
        sigma=float(sigma),
        rate_target=float(rate_target),
        X=float(threshold),
        survival_rate=float(survival_rate),
        n_in=ens_in.n,
        n_out=ens_out.n,
        var_x_in=s_in["var_x"],
        se_var_x_in=s_in["se_var_x"],
        bse_var_x_in=s_in["bse_var_x"],
        var_x_out=s_out["var_x"],
        se_var_x_out=s_out["se_var_x"],
        bse_var_x_out=s_out["bse_var_x"],
        var_p_in=s_in["var_p"],
        var_p_out=s_out["var_p"],
        se_var_p_out=s_out["se_var_p"],
        var_product_in=s_in["var_product"],
        bse_var_product_in=s_in["bse_var_product"],
        var_product_out=s_out["var_product"],
        bse_var_product_out=s_out["bse_var_product"],
        kurtosis_in=s_in["kurtosis"],
        bse_kurtosis_in=s_in["bse_kurtosis"],
        kurtosis_out=s_out["kurtosis"],
        bse_kurtosis_out=s_out["bse_kurtosis"],
        chi2_bins=0 if bins is None else bins,
        chi2_in=chi2_in,
        chi2_out=chi2_out,
        log_negativity=float(log_negativity),
        db_x_in=s_in["db_x"],
        db_x_out=s_out["db_x"],
        seed=key[0],
        n=int(n),
    )


def as_array(results, column: str) -> np.ndarray:
    """One column of a list of results as a float array."""
    return np.array([getattr(r, column) for r in results], dtype=float)
