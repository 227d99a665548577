import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htpsim.params import PlasticityParams, resolve_rule_defaults
from htpsim.plasticity import (
    ThresholdState,
    adapt_thresholds,
    apply_short_term,
    apply_single_component,
    consolidate,
    detect_correlations,
    measure_concentration,
    unconsolidate,
    update_modulation,
    update_traces,
)

DT = 0.1
HTP = resolve_rule_defaults(PlasticityParams(), "htp")
RCHP = resolve_rule_defaults(PlasticityParams(), "rchp")
# The published operating point for the modulation dynamics (used by the
# worked numeric cases below); the rule presets adjust the drift magnitude.
TABLE = resolve_rule_defaults(PlasticityParams(baseline_modulation=-0.03), "htp")


def arr(x):
    return np.atleast_2d(np.array(x, float))


class TestDetectCorrelations:
    def th(self, hi=0.9, lo=0.001):
        return ThresholdState(theta_hi=hi, theta_lo=lo)

    def test_plus_mode_detects(self):
        out = detect_correlations(np.array([1.0]), np.array([1.0]), self.th(), HTP)
        assert out[0, 0] == 1.0

    def test_below_threshold(self):
        out = detect_correlations(np.array([0.7]), np.array([0.7]), self.th(), HTP)
        assert out[0, 0] == 0.0

    def test_decorrelation_branch(self):
        out = detect_correlations(np.array([0.01]), np.array([0.01]), self.th(), RCHP)
        assert out[0, 0] == -RCHP.beta == -1.0

    def test_plus_mode_has_no_decorrelations(self):
        out = detect_correlations(np.array([0.01]), np.array([0.01]), self.th(), HTP)
        assert out[0, 0] == 0.0

    @settings(max_examples=50)
    @given(st.lists(st.floats(-1, 1.1), min_size=3, max_size=3), st.lists(st.floats(-1, 1.1), min_size=3, max_size=3))
    def test_plus_mode_binary(self, pre, post):
        out = detect_correlations(np.array(pre), np.array(post), self.th(), HTP)
        assert set(np.unique(out)) <= {0.0, 1.0}


class TestUpdateTraces:
    def test_pure_decay(self):
        out = update_traces(arr(1.0), arr(0.0), HTP, DT)
        assert out[0, 0] == pytest.approx(math.exp(-0.025), rel=1e-12)

    def test_fresh_tag(self):
        assert update_traces(arr(0.0), arr(1.0), HTP, DT)[0, 0] == 1.0

    def test_decay_plus_tag(self):
        out = update_traces(arr(0.5), arr(1.0), HTP, DT)
        assert out[0, 0] == pytest.approx(0.5 * math.exp(-0.025) + 1.0, rel=1e-12)

    def test_clamped_traces_stay_nonneg(self):
        out = update_traces(arr(0.2), arr(-1.0), HTP, DT)
        assert out[0, 0] == 0.0

    def test_unclamped_traces_go_negative(self):
        out = update_traces(arr(0.2), arr(-1.0), RCHP, DT)
        assert out[0, 0] == pytest.approx(0.2 * math.exp(-0.025) - 1.0, rel=1e-12)

    @settings(max_examples=30)
    @given(st.integers(1, 500), st.floats(0.01, 5.0))
    def test_decay_matches_closed_form(self, n, e0):
        E = arr(e0)
        zero = arr(0.0)
        for _ in range(n):
            E = update_traces(E, zero, HTP, DT)
        expected = e0 * math.exp(-n * DT / HTP.tau_e_s)
        assert E[0, 0] == pytest.approx(expected, rel=1e-12)


class TestUpdateModulation:
    def test_decay_with_baseline(self):
        out = update_modulation(1.0, 0.0, TABLE, DT)
        assert out == pytest.approx(math.exp(-1.0) - 0.003, rel=1e-9)

    def test_reward_impulse(self):
        assert update_modulation(0.0, 0.5, TABLE, DT) == pytest.approx(0.05 - 0.003)

    def test_quiescence(self):
        p = resolve_rule_defaults(PlasticityParams(baseline_modulation=0.0), "htp")
        assert update_modulation(0.0, 0.0, p, DT) == 0.0

    @settings(max_examples=30)
    @given(st.integers(1, 500), st.floats(-2, 2))
    def test_matches_closed_form(self, n, m0):
        m = m0
        for _ in range(n):
            m = update_modulation(m, 0.0, TABLE, DT)
        c = math.exp(-DT / TABLE.tau_m_s)
        expected = m0 * c**n + TABLE.baseline_modulation * DT * (1 - c**n) / (1 - c)
        assert m == pytest.approx(expected, rel=1e-12, abs=1e-15)


class TestApplySingleComponent:
    def test_euler_step(self):
        assert apply_single_component(arr(0.5), 0.1, arr(1.0), DT)[0, 0] == pytest.approx(0.51)

    def test_saturation(self):
        assert apply_single_component(arr(1.0), 0.5, arr(1.0), DT)[0, 0] == 1.0

    def test_no_modulation_no_change(self):
        assert apply_single_component(arr(0.5), 0.0, arr(7.0), DT)[0, 0] == 0.5

    def test_floor(self):
        assert apply_single_component(arr(0.01), -1.0, arr(1.0), DT)[0, 0] == 0.0


class TestApplyShortTerm:
    def test_slow_decay(self):
        out = apply_short_term(arr(0.5), 0.0, arr(0.0), TABLE, DT)
        assert out[0, 0] == pytest.approx(0.5 * math.exp(-0.1 / 28800.0), rel=1e-12)

    def test_single_increment(self):
        assert apply_short_term(arr(0.0), 0.047, arr(1.0), TABLE, DT)[0, 0] == pytest.approx(0.0047)

    def test_depression_without_reward(self):
        out = apply_short_term(arr(0.2), -0.003, arr(2.0), TABLE, DT)
        assert out[0, 0] == pytest.approx(0.2 * math.exp(-0.1 / 28800.0) - 0.0006, rel=1e-9)

    def test_clamps(self):
        assert apply_short_term(arr(0.99), 5.0, arr(1.0), TABLE, DT)[0, 0] == 1.0
        assert apply_short_term(arr(-0.99), -5.0, arr(1.0), TABLE, DT)[0, 0] == -1.0

    @settings(max_examples=30)
    @given(st.integers(1, 300), st.floats(-0.9, 0.9))
    def test_decay_matches_closed_form(self, n, w0):
        w = arr(w0)
        zero = arr(0.0)
        for _ in range(n):
            w = apply_short_term(w, 0.0, zero, TABLE, DT)
        assert w[0, 0] == pytest.approx(w0 * math.exp(-n * DT / TABLE.tau_st_s), rel=1e-12, abs=1e-15)

    def test_anti_hebbian_strictly_decreases(self):
        # no reward, negative baseline, persistent positive trace
        p = TABLE
        m = 0.0
        w = arr(0.5)
        E = arr(1.5)
        prev = w[0, 0]
        for _ in range(200):
            m = update_modulation(m, 0.0, p, DT)
            w = apply_short_term(w, m, E, p, DT)
            assert w[0, 0] < prev
            prev = w[0, 0]


class TestConsolidation:
    def test_rate(self):
        out = consolidate(arr(0.96), arr(0.0), TABLE, DT)
        assert out[0, 0] == pytest.approx(DT / 1800.0)

    def test_below_threshold_unchanged(self):
        assert consolidate(arr(0.90), arr(0.3), TABLE, DT)[0, 0] == 0.3

    def test_half_hour_to_cap(self):
        w_lt = arr(0.0)
        for _ in range(18000):  # 1800 s of steps
            w_lt = consolidate(arr(0.96), w_lt, TABLE, DT)
        assert w_lt[0, 0] == 1.0

    def test_short_term_untouched(self):
        w_st = arr(0.96)
        consolidate(w_st, arr(0.0), TABLE, DT)
        assert w_st[0, 0] == 0.96

    def test_locality(self):
        w_st = arr([[0.96, 0.5, 0.951]])
        w_lt = arr([[0.1, 0.1, 0.1]])
        out = consolidate(w_st, w_lt, TABLE, DT)
        assert out[0, 1] == 0.1
        assert out[0, 0] > 0.1 and out[0, 2] > 0.1

    @settings(max_examples=50)
    @given(st.lists(st.floats(-1, 0.95), min_size=5, max_size=5))
    def test_zero_mean_preservation(self, updates):
        # Any short-term trajectory that never exceeds the threshold leaves
        # the long-term component exactly at its initial value.
        w_lt = arr(0.37)
        for u in updates:
            w_lt = consolidate(arr(u), w_lt, TABLE, DT)
        assert w_lt[0, 0] == 0.37

    def test_monotone_nondecreasing(self):
        rng = np.random.default_rng(0)
        w_lt = np.zeros((4, 4))
        prev = w_lt.copy()
        for _ in range(500):
            w_st = rng.uniform(-1, 1, (4, 4))
            w_lt = consolidate(w_st, w_lt, TABLE, DT)
            assert np.all(w_lt >= prev)
            prev = w_lt.copy()


class TestUnconsolidate:
    def test_decrement(self):
        out = unconsolidate(arr(-0.96), arr(1.0), TABLE, DT)
        assert out[0, 0] == pytest.approx(1.0 - DT / 1800.0)

    def test_above_negative_threshold_unchanged(self):
        assert unconsolidate(arr(-0.5), arr(0.8), TABLE, DT)[0, 0] == 0.8

    def test_floor(self):
        assert unconsolidate(arr(-0.96), arr(0.0), TABLE, DT)[0, 0] == 0.0


class TestConcentration:
    def test_five_over_window(self):
        counts = np.zeros(50)
        counts[[3, 13, 23, 33, 43]] = 1
        wc, wd = measure_concentration(counts, np.zeros(50), HTP, DT)
        assert wc == pytest.approx(0.1) and wd == 0.0

    def test_empty_window(self):
        assert measure_concentration(np.zeros(50), np.zeros(50), HTP, DT) == (0.0, 0.0)

    def test_one_per_step(self):
        wc, _ = measure_concentration(np.ones(50), np.zeros(50), HTP, DT)
        assert wc == pytest.approx(1.0)


class TestAdaptThresholds:
    P = resolve_rule_defaults(PlasticityParams(baseline_modulation=-0.03), "htp")
    PF = resolve_rule_defaults(PlasticityParams(baseline_modulation=0.03), "rchp")

    def test_too_many_correlations(self):
        th = ThresholdState(0.8, 1e-6, omega_c=0.003)
        out = adapt_thresholds(th, self.P, DT)
        assert out.theta_hi == pytest.approx(0.8 + 1e-4)

    def test_too_few_correlations(self):
        th = ThresholdState(0.8, 1e-6, omega_c=4e-4)
        out = adapt_thresholds(th, self.P, DT)
        assert out.theta_hi == pytest.approx(0.8 - 1e-4)

    def test_dead_band_identity(self):
        th = ThresholdState(0.8, 1e-6, omega_c=0.001, omega_d=0.001)
        assert adapt_thresholds(th, self.PF, DT) is th

    def test_low_threshold_moves_oppositely(self):
        th = ThresholdState(0.8, 1e-6, omega_c=0.001, omega_d=0.003)
        assert adapt_thresholds(th, self.PF, DT).theta_lo == pytest.approx(1e-6 - 1e-4)
        th = ThresholdState(0.8, 1e-6, omega_c=0.001, omega_d=4e-4)
        assert adapt_thresholds(th, self.PF, DT).theta_lo == pytest.approx(1e-6 + 1e-4)

    def test_low_threshold_frozen_without_decorrelation_branch(self):
        th = ThresholdState(0.8, 1e-6, omega_c=0.001, omega_d=0.0)
        assert adapt_thresholds(th, self.P, DT).theta_lo == 1e-6

    @settings(max_examples=50)
    @given(st.floats(0.0005, 0.002), st.floats(0.0005, 0.002))
    def test_dead_band_property(self, wc, wd):
        th = ThresholdState(0.5, -0.01, omega_c=wc, omega_d=wd)
        out = adapt_thresholds(th, self.PF, DT)
        assert out.theta_hi == 0.5 and out.theta_lo == -0.01


class TestRuleDefaults:
    def test_htp_defaults(self):
        p = resolve_rule_defaults(PlasticityParams(), "htp")
        assert p.mode == "plus" and p.clamp_traces and p.baseline_modulation < 0

    def test_rchp_defaults(self):
        p = resolve_rule_defaults(PlasticityParams(), "rchp")
        assert p.mode == "full" and not p.clamp_traces and p.baseline_modulation > 0

    def test_explicit_values_kept(self):
        p = resolve_rule_defaults(
            PlasticityParams(mode="full", clamp_traces=True, baseline_modulation=-0.01), "htp"
        )
        assert p.mode == "full" and p.clamp_traces and p.baseline_modulation == -0.01

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            resolve_rule_defaults(PlasticityParams(), "bogus")
