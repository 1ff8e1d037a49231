import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.stats import norm

from cvpurify import (
    GridCoverageError,
    SqueezedStateSpec,
    apply_gaussian_phase_diffusion,
    diffused_variances,
    sample_squeezed,
)
from cvpurify.wigner import (
    Grid2D,
    GridGeometry,
    grid_checks,
    grid_marginals,
    phase_quadrature,
    wigner_diffused_at,
    wigner_diffused_grid,
    wigner_sms_at,
)

STRONG = SqueezedStateSpec(0.1, 10.0)
STRONG_SIGMA = 0.523


def x_marginal_oracle(spec, sigma, x):
    """Untruncated phase average of the rotated x-quadrature density."""
    def integrand(phi):
        v = spec.vx * math.cos(phi) ** 2 + spec.vp * math.sin(phi) ** 2
        return norm.pdf(phi, scale=sigma) * norm.pdf(x, scale=math.sqrt(v))
    return quad(integrand, -12 * sigma, 12 * sigma, epsabs=1e-14, epsrel=1e-12, limit=200)[0]


@pytest.fixture(scope="module")
def strong_grid():
    return wigner_diffused_grid(STRONG, STRONG_SIGMA, GridGeometry.square(18.0, 256))


class TestPointwise:
    def test_vacuum_peak(self):
        assert wigner_sms_at(SqueezedStateSpec(1, 1), 0, 0) == pytest.approx(1 / (2 * math.pi), rel=1e-14)

    def test_squeezed_value(self):
        w = wigner_sms_at(SqueezedStateSpec(0.1, 10), 0.0, math.sqrt(10))
        assert w == pytest.approx(math.exp(-0.5) / (2 * math.pi), rel=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, 1), st.floats(-5, 5), st.floats(-5, 5))
    def test_zero_sigma_is_undiffused(self, vx, x, p):
        spec = SqueezedStateSpec(vx, 1 / vx)
        assert abs(wigner_diffused_at(spec, 0.0, x, p) - wigner_sms_at(spec, x, p)) <= 1e-10

    def test_tiny_sigma_limit(self):
        spec = SqueezedStateSpec(0.3, 4)
        x, p = np.meshgrid(np.linspace(-3, 3, 7), np.linspace(-3, 3, 7))
        assert np.allclose(wigner_diffused_at(spec, 1e-7, x, p), wigner_sms_at(spec, x, p), atol=1e-10)

    def test_vacuum_is_phase_invariant(self):
        vac = SqueezedStateSpec(1, 1)
        x, p = np.linspace(-3, 3, 11), np.linspace(2, -2, 11)
        assert np.allclose(wigner_diffused_at(vac, 0.7, x, p), wigner_sms_at(vac, x, p), atol=1e-14)

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            wigner_diffused_at(STRONG, -0.1, 0, 0)

    def test_phase_quadrature_weights(self):
        phi, w = phase_quadrature(0.3, 64)
        assert w.sum() == pytest.approx(1, abs=1e-14)
        assert np.all(w > 0)
        # variance of N(0, sigma^2) truncated at +-5 sigma
        trunc = 0.09 * (1 - 10 * norm.pdf(5) / (1 - 2 * norm.cdf(-5)))
        assert np.sum(w * phi**2) == pytest.approx(trunc, rel=1e-12)


class TestGrid:
    def test_strong_marginal_variance(self, strong_grid):
        mass, vx, vp = grid_checks(strong_grid)
        assert abs(vx - 2.186) < 1e-3
        assert abs(mass - 1) < 1e-6
        exact = diffused_variances(STRONG, STRONG_SIGMA)
        assert vx == pytest.approx(exact[0], rel=1e-6)
        assert vp == pytest.approx(exact[1], rel=1e-6)

    def test_strong_nonnegative(self, strong_grid):
        assert strong_grid.values.min() >= -1e-12

    def test_strong_converged(self, strong_grid):
        g = strong_grid
        X, P = np.meshgrid(g.xs, g.ps, indexing="ij")
        refined = wigner_diffused_at(STRONG, STRONG_SIGMA, X, P, 2 * g.phase_nodes)
        assert np.max(np.abs(refined - g.values)) <= 1e-8

    def test_marginal_matches_quad(self, strong_grid):
        mx, _ = grid_marginals(strong_grid)
        xs = strong_grid.xs
        for i in (128, 140, 160, 180, 200):
            assert mx[i] == pytest.approx(x_marginal_oracle(STRONG, STRONG_SIGMA, xs[i]), rel=1e-5, abs=1e-12)

    def test_grid_orientation(self):
        spec = SqueezedStateSpec(0.2, 5)
        g = wigner_diffused_grid(spec, 0.0, GridGeometry(-14, 14, -14, 14, 29, 57))
        assert g.values.shape == (29, 57)
        i, j = 15, 40
        assert g.values[i, j] == pytest.approx(wigner_sms_at(spec, g.xs[i], g.ps[j]))

    def test_calibrated_state(self, calibrated_spec):
        g = wigner_diffused_grid(calibrated_spec, 0.304, GridGeometry.square(17.0, 200))
        _, vx, vp = grid_checks(g)
        exact = diffused_variances(calibrated_spec, 0.304)
        # the +-5 sigma phase cutoff biases the diffused part by ~1.5e-5 relative
        assert (vx, vp) == pytest.approx(exact, rel=2e-5)


class TestCoverage:
    def test_input_grid_too_small(self):
        with pytest.raises(GridCoverageError):
            wigner_diffused_grid(STRONG, STRONG_SIGMA, GridGeometry.square(10.0, 64))

    def test_too_few_points(self):
        with pytest.raises(GridCoverageError):
            GridGeometry.square(18.0, 8)

    def test_bad_bounds(self):
        with pytest.raises(GridCoverageError):
            GridGeometry(1, -1, -1, 1, 32, 32)

    def test_checks_flag_truncated_grid(self):
        geom = GridGeometry.square(6.0, 64)
        X, P = np.meshgrid(geom.xs, geom.ps, indexing="ij")
        g = Grid2D(geom, wigner_sms_at(STRONG, X, P))
        with pytest.raises(GridCoverageError):
            grid_checks(g)

    def test_checks_flag_negative(self):
        geom = GridGeometry.square(30.0, 32)
        values = np.full((32, 32), 1e-4)
        values[3, 3] = -1e-6
        with pytest.raises(GridCoverageError, match="negative"):
            grid_checks(Grid2D(geom, values))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            Grid2D(GridGeometry.square(10.0, 32), np.zeros((32, 31)))


def test_monte_carlo_histogram_agrees(calibrated_spec):
    """Sampled histogram vs cell-integrated Wigner function, Poisson 5-sigma per cell."""
    sigma, n = 0.304, 10**6
    ens = apply_gaussian_phase_diffusion(sample_squeezed(calibrated_spec, n, seed=11), sigma, seed=12)
    edges = np.arange(-17.0, 17.0 + 1e-9, 1.0)
    counts, _, _ = np.histogram2d(ens.x, ens.p, bins=(edges, edges))
    sub = 8
    h = 1.0 / sub
    centers = np.arange(-17.0 + h / 2, 17.0, h)
    X, P = np.meshgrid(centers, centers, indexing="ij")
    fine = wigner_diffused_at(calibrated_spec, sigma, X, P, nodes=256) * h * h
    m = edges.size - 1
    expected = n * fine.reshape(m, sub, m, sub).sum(axis=(1, 3))
    assert expected.sum() == pytest.approx(n, rel=1e-4)
    mask = expected >= 1
    z = (counts[mask] - expected[mask]) / np.sqrt(expected[mask])
    assert np.max(np.abs(z)) < 5
    assert counts[~mask].sum() <= 5 * max(1.0, math.sqrt(expected[~mask].sum())) + expected[~mask].sum()
