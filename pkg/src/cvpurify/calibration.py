"""Fit the antisqueezing variance to a measured variance product."""
from __future__ import annotations

import math

from scipy.optimize import brentq

from .exceptions import InfeasibleCalibrationError
from .phase_space import SqueezedStateSpec, diffused_variances


def _diffused_product(vx, vp, sigma):
    # SqueezedStateSpec would reject vx * vp < 1, which the bracket never visits
    k = math.exp(-2.0 * sigma * sigma)
    a, b = 0.5 * (1 + k), 0.5 * (1 - k)
    return (a * vx + b * vp) * (a * vp + b * vx)


def calibrate_vp(vx: float, sigma: float, target_product: float, rtol: float = 1e-12) -> float:
    """Antisqueezed variance ``vp`` whose phase-diffused variance product hits a target.

    Solves ``vx' * vp' = target_product`` for ``vp`` on the branch
    ``vp >= max(vx, 1 / vx)``, where the product increases monotonically.

    Raises:
        InfeasibleCalibrationError: the target is below the product reachable on
            the branch (e.g. below the Heisenberg bound).
    """
    if not (vx > 0 and sigma >= 0 and math.isfinite(target_product)):
        raise ValueError(f"invalid calibration inputs vx={vx}, sigma={sigma}, target={target_product}")
    if target_product < 1:
        raise InfeasibleCalibrationError(
            f"target product {target_product} is below the Heisenberg bound 1"
        )
    lo = max(vx, 1.0 / vx)
    f_lo = _diffused_product(vx, lo, sigma) - target_product
    if f_lo > 0:
        raise InfeasibleCalibrationError(
            f"smallest reachable product on the vp >= vx branch is {f_lo + target_product:.6g} "
            f"> target {target_product}"
        )
    if f_lo == 0:
        return lo
    hi = 2 * lo
    while _diffused_product(vx, hi, sigma) < target_product:
        hi *= 2
    vp = brentq(lambda v: _diffused_product(vx, v, sigma) - target_product, lo, hi,
                xtol=1e-300, rtol=rtol)
    vx_d, vp_d = diffused_variances(SqueezedStateSpec(vx, vp), sigma)
    assert abs(vx_d * vp_d / target_product - 1) < 1e-9
    return vp
