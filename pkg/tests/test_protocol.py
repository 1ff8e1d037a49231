import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvpurify import (
    EmptySelectionError,
    Ensemble,
    PhaseNoiseSpec,
    SelectionRule,
    SqueezedStateSpec,
    SurvivorStarvationError,
    TwoModeEnsemble,
    apply_gaussian_phase_diffusion,
    beam_split,
    condition,
    iterate_purify,
    prepare_arm,
    purify_round,
    sample_squeezed,
    threshold_from_rate,
)
from cvpurify import _rng

SQ2 = math.sqrt(2)


def var_se(x):
    d = x - x.mean()
    return math.sqrt((np.mean(d**4) - np.mean(d**2) ** 2) / x.size)


def diffused_pair(spec, sigma, n, seed):
    a = apply_gaussian_phase_diffusion(sample_squeezed(spec, n, seed=(seed, 0)), sigma, seed=(seed, 1))
    b = apply_gaussian_phase_diffusion(sample_squeezed(spec, n, seed=(seed, 2)), sigma, seed=(seed, 3))
    return a, b


class TestSelectionRule:
    def test_constructors(self):
        assert SelectionRule.threshold(0.5).X == 0.5
        assert SelectionRule.target_rate(0.3).rate == 0.3
        assert math.isnan(SelectionRule.threshold(1).rate_or_nan)

    @pytest.mark.parametrize("kwargs", [
        {"mode": "threshold", "X": -1}, {"mode": "threshold"},
        {"mode": "target_rate", "rate": 0}, {"mode": "target_rate", "rate": 1.5},
        {"mode": "both", "rate": 0.5},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SelectionRule(**kwargs)


class TestBeamSplit:
    def test_arithmetic(self):
        a = Ensemble(np.array([[1.0, 0.0]]), seed=(1,))
        b = Ensemble(np.array([[1.0, 0.0]]), seed=(2,))
        row = beam_split(a, b).rows[0]
        assert row == pytest.approx([SQ2, 0, 0, 0])

    def test_vacuum_invariance(self):
        n = 10**6
        vac = SqueezedStateSpec(1, 1)
        tm = beam_split(sample_squeezed(vac, n, seed=1), sample_squeezed(vac, n, seed=2))
        for col in tm.rows.T:
            assert abs(np.var(col, ddof=1) - 1) < 3 * math.sqrt(2 / n)

    def test_sum_difference_uncorrelated(self):
        n = 10**6
        spec = SqueezedStateSpec(0.3, 1 / 0.3)
        tm = beam_split(sample_squeezed(spec, n, seed=3), sample_squeezed(spec, n, seed=4))
        c = np.cov(tm.x_I, tm.x_II)[0, 1]
        se = math.sqrt(np.var(tm.x_I) * np.var(tm.x_II) / n)
        assert abs(c) < 3 * se

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 500), st.integers(0, 2**32), st.floats(0.05, 5), st.floats(0, 1.5))
    def test_variance_sum_identity(self, n, seed, vx, sigma):
        spec = SqueezedStateSpec(vx, 1 / vx)
        a, b = diffused_pair(spec, sigma, n, seed)
        tm = beam_split(a, b)
        lhs = np.var(tm.x_I, ddof=1) + np.var(tm.x_II, ddof=1)
        rhs = np.var(a.x, ddof=1) + np.var(b.x, ddof=1)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, rhs)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            beam_split(sample_squeezed(SqueezedStateSpec(1, 1), 10, seed=1),
                       sample_squeezed(SqueezedStateSpec(1, 1), 11, seed=2))

    def test_identical_seeds_rejected(self):
        a = sample_squeezed(SqueezedStateSpec(1, 1), 10, seed=5)
        with pytest.raises(ValueError, match="independent"):
            beam_split(a, sample_squeezed(SqueezedStateSpec(1, 1), 10, seed=5))

    def test_two_mode_validation(self):
        with pytest.raises(ValueError):
            TwoModeEnsemble(np.zeros((0, 4)))
        with pytest.raises(ValueError):
            TwoModeEnsemble(np.zeros((3, 2)))


class TestThreshold:
    def _tm(self, n, seed=0):
        vac = SqueezedStateSpec(1, 1)
        return beam_split(sample_squeezed(vac, n, seed=(seed, 1)), sample_squeezed(vac, n, seed=(seed, 2)))

    def test_full_rate(self):
        tm = self._tm(1000)
        assert threshold_from_rate(tm, 1.0) >= np.abs(tm.x_I).max()

    def test_median(self):
        tm = self._tm(1001)
        assert threshold_from_rate(tm, 0.5) == np.median(np.abs(tm.x_I[:1001]))
        tm = self._tm(1000)
        s = np.sort(np.abs(tm.x_I))
        assert s[499] <= threshold_from_rate(tm, 0.5) <= s[500]

    def test_half_normal_quantile(self):
        n = 10**6
        tm = self._tm(n)
        X = threshold_from_rate(tm, 0.5)
        # median of |N(0, v)| is 0.67449 sqrt(v)
        assert X == pytest.approx(0.6744897501960817 * math.sqrt(np.var(tm.x_I)), rel=0.02)

    @pytest.mark.parametrize("rate", [0.01, 0.1, 0.333, 0.5, 0.77, 1.0])
    def test_survival_matches_rate(self, rate):
        tm = self._tm(12_345)
        res = condition(tm, SelectionRule.target_rate(rate))
        assert abs(res.survival_rate - rate) <= 1 / tm.n
        assert abs(res.survivors.n - round(res.survival_rate * tm.n)) <= 1

    @pytest.mark.parametrize("rate", [0, -0.1, 1.1])
    def test_bad_rate(self, rate):
        with pytest.raises(ValueError):
            threshold_from_rate(self._tm(10), rate)


class TestCondition:
    def test_infinite_threshold_is_noop(self):
        a, b = diffused_pair(SqueezedStateSpec(0.5, 2), 0.3, 10_000, 1)
        tm = beam_split(a, b)
        res = condition(tm, SelectionRule.threshold(math.inf))
        assert res.survival_rate == 1
        assert res.output_stats.var_x.value == np.var(tm.x_II, ddof=1)
        assert np.array_equal(res.survivors.points, tm.rows[:, 2:])

    def test_empty_selection(self):
        a, b = diffused_pair(SqueezedStateSpec(0.5, 2), 0.3, 100, 2)
        with pytest.raises(EmptySelectionError):
            condition(beam_split(a, b), SelectionRule.threshold(0.0))

    def test_ties_accepted(self):
        rows = np.array([[0.5, 0, 1, 1], [-0.5, 0, 2, 2], [0.6, 0, 3, 3]])
        res = condition(TwoModeEnsemble(rows), SelectionRule.threshold(0.5))
        assert res.survivors.n == 2

    @pytest.mark.parametrize("rate", [0.01, 0.1, 0.5, 0.9])
    def test_null_case(self, rate):
        n = 10**6
        spec = SqueezedStateSpec(0.4416, 1 / 0.4416)
        a, b = diffused_pair(spec, 0.0, n, 3)
        tm = beam_split(a, b)
        res = condition(tm, SelectionRule.target_rate(rate))
        out = res.survivors.x
        se = math.hypot(var_se(out), var_se(tm.x_II))
        assert abs(np.var(out, ddof=1) - np.var(tm.x_II, ddof=1)) < 3 * se

    def test_calibrated_point_purifies(self, calibrated_spec):
        n = 10**6
        a, b = diffused_pair(calibrated_spec, 0.304, n, 4)
        tm = beam_split(a, b)
        res = condition(tm, SelectionRule.target_rate(0.5))
        assert res.input_stats.var_x.value == pytest.approx(1.06, abs=0.01)
        assert res.output_stats.var_x.value < 1

    def test_monotone_in_threshold(self, calibrated_spec):
        n = 10**6
        a, b = diffused_pair(calibrated_spec, 0.304, n, 5)
        tm = beam_split(a, b)
        prev_rate, prev_var, prev_se = 0.0, -math.inf, 0.0
        for X in np.linspace(0.1, 4.0, 12):
            res = condition(tm, SelectionRule.threshold(X))
            out = res.survivors.x
            v, se = np.var(out, ddof=1), var_se(out)
            assert res.survival_rate >= prev_rate
            assert v >= prev_var - 3 * math.hypot(se, prev_se)
            prev_rate, prev_var, prev_se = res.survival_rate, v, se


class TestPurifyRound:
    def test_vacuum(self):
        n = 10**6
        a, b = diffused_pair(SqueezedStateSpec(1, 1), 0.5, n, 6)
        res = purify_round(a, b, SelectionRule.target_rate(0.3))
        for col in (res.survivors.x, res.survivors.p):
            assert abs(np.var(col, ddof=1) - 1) < 3 * math.sqrt(2 / col.size)

    def test_reduces_variance(self, calibrated_spec):
        n = 10**6
        a, b = diffused_pair(calibrated_spec, 0.4, n, 7)
        res = purify_round(a, b, SelectionRule.target_rate(0.5))
        diff = res.input_stats.var_x.value - res.output_stats.var_x.value
        assert diff > 5 * math.hypot(var_se(a.x), var_se(res.survivors.x))

    def test_full_rate_is_mixture(self):
        n = 10**6
        a, b = diffused_pair(SqueezedStateSpec(0.3, 4.0), 0.2, n, 8)
        res = purify_round(a, b, SelectionRule.target_rate(1.0))
        expected = 0.5 * (np.var(a.x, ddof=1) + np.var(b.x, ddof=1))
        # the splitter identity makes the unconditioned mean of the two outputs exact;
        # mode II alone fluctuates around it
        assert abs(res.output_stats.var_x.value - expected) < 3 * var_se(res.survivors.x)
        assert res.survival_rate == 1

    def test_input_stats_describe_copy_a(self):
        a, b = diffused_pair(SqueezedStateSpec(0.5, 2), 0.3, 5000, 9)
        res = purify_round(a, b, SelectionRule.target_rate(0.5))
        assert res.input_stats.var_x.value == np.var(a.x, ddof=1)
        assert res.survivors.seed == a.seed


class TestIterate:
    NOISE = PhaseNoiseSpec(0.4)

    def test_rounds_zero(self, calibrated_spec):
        (r,) = iterate_purify(calibrated_spec, self.NOISE, 0, [], 20_000, seed=3)
        arm = prepare_arm(calibrated_spec, self.NOISE, 20_000, 3, 0)
        assert r.round == 0
        assert r.var_x_in == r.var_x_out == np.var(arm.x, ddof=1)
        assert r.survival_rate == 1 and math.isinf(r.X)
        assert r.kurtosis_in == r.kurtosis_out

    def test_one_round_equals_purify_round(self, calibrated_spec):
        n = 50_000
        rule = SelectionRule.target_rate(0.5)
        results = iterate_purify(calibrated_spec, self.NOISE, 1, rule, n, seed=4)
        a = prepare_arm(calibrated_spec, self.NOISE, n, 4, 0)
        b = prepare_arm(calibrated_spec, self.NOISE, n, 4, 1)
        direct = purify_round(a, b, rule)
        r = results[1]
        assert r.var_x_out == direct.output_stats.var_x.value
        assert r.var_x_in == direct.input_stats.var_x.value
        assert r.X == direct.threshold_used
        assert r.survival_rate == direct.survival_rate

    def test_two_rounds_gaussify(self, calibrated_spec):
        n = 10**6
        r0, r1, r2 = iterate_purify(calibrated_spec, self.NOISE, 2, SelectionRule.target_rate(0.5), n, seed=5)
        assert r2.n_out == pytest.approx(n / 4, abs=2)
        assert r2.var_x_out <= r1.var_x_out + 3 * math.hypot(r1.bse_var_x_out, r2.bse_var_x_out)
        assert abs(r2.kurtosis_out) <= abs(r1.kurtosis_out) <= abs(r0.kurtosis_out)

    def test_starvation_precheck(self, calibrated_spec):
        with pytest.raises(SurvivorStarvationError) as info:
            iterate_purify(calibrated_spec, self.NOISE, 3, SelectionRule.target_rate(0.05), 100_000, seed=1)
        assert info.value.round_index == 2

    def test_starvation_runtime(self, calibrated_spec):
        with pytest.raises(SurvivorStarvationError) as info:
            iterate_purify(calibrated_spec, self.NOISE, 1, SelectionRule.threshold(0.01), 20_000, seed=1)
        assert info.value.round_index == 1

    def test_rule_count(self, calibrated_spec):
        with pytest.raises(ValueError):
            iterate_purify(calibrated_spec, self.NOISE, 2, [SelectionRule.target_rate(0.5)], 20_000, seed=1)

    def test_deterministic_and_thread_invariant(self, calibrated_spec):
        args = (calibrated_spec, self.NOISE, 2, SelectionRule.target_rate(0.5), 150_000)
        a = iterate_purify(*args, seed=8, threads=1)
        b = iterate_purify(*args, seed=8, threads=4)
        assert [repr(r) for r in a] == [repr(r) for r in b]

    def test_log_negativity_reported(self):
        spec = SqueezedStateSpec(0.5, 2)
        res = iterate_purify(spec, PhaseNoiseSpec(0.2), 1, SelectionRule.target_rate(0.5), 20_000,
                             seed=2, compute_log_negativity=True)
        assert res[1].log_negativity == 0.0
        assert math.isnan(res[0].log_negativity)
