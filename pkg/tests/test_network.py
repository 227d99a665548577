import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htpsim.network import (
    ActionState,
    WeightMatrix,
    compute_outputs,
    compute_states,
    effective_weights,
    select_action,
)
from htpsim.params import EnvironmentParams, NetworkParams
from htpsim.rng import rng_stream


def wm(w_st, w_lt):
    return WeightMatrix(np.atleast_2d(np.array(w_st, float)), np.atleast_2d(np.array(w_lt, float)))


class TestEffectiveWeights:
    def test_direct_sum(self):
        assert effective_weights(wm(0.3, 0.5))[0, 0] == pytest.approx(0.8)

    def test_lower_clamp(self):
        assert effective_weights(wm(-0.2, 0.1))[0, 0] == 0.0

    def test_upper_clamp(self):
        assert effective_weights(wm(0.4, 1.0))[0, 0] == 1.0

    def test_inputs_not_mutated(self):
        m = wm([[0.3, -0.5]], [[0.5, 0.1]])
        st_copy, lt_copy = m.w_st.copy(), m.w_lt.copy()
        effective_weights(m)
        assert np.array_equal(m.w_st, st_copy) and np.array_equal(m.w_lt, lt_copy)

    def test_shape_mismatch(self):
        bad = WeightMatrix(np.zeros((2, 3)), np.zeros((3, 2)))
        with pytest.raises(ValueError):
            effective_weights(bad)

    @given(
        st.lists(st.floats(-1, 1), min_size=4, max_size=4),
        st.lists(st.floats(0, 1), min_size=4, max_size=4),
    )
    def test_always_in_unit_interval(self, sts, lts):
        W = effective_weights(wm([sts], [lts]))
        assert np.all(W >= 0.0) and np.all(W <= 1.0)


class TestComputeStates:
    def test_no_synaptic_input(self):
        W = np.zeros((3, 2))
        inputs = np.array([10.0, 0.0])
        u = compute_states(W, inputs, np.zeros(3))
        assert np.array_equal(u, [10.0, 0.0])

    def test_single_term(self):
        W = np.array([[1.0]])
        assert compute_states(W, np.array([0.0]), np.array([0.46]))[0] == pytest.approx(0.46)

    def test_sum_with_current(self):
        W = np.array([[0.5], [0.5]])
        u = compute_states(W, np.array([0.5]), np.array([1.0, 1.0]))
        assert u[0] == pytest.approx(1.5)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            compute_states(np.zeros((3, 2)), np.zeros(2), np.zeros(4))


class _ZeroNoise:
    def normal(self, loc, scale, n):
        return np.zeros(n)


class TestComputeOutputs:
    def test_saturating(self):
        p = NetworkParams(noise_std=0.0)
        v = compute_outputs(np.array([10.0]), p, _ZeroNoise())
        assert v[0] == pytest.approx(math.tanh(5.0))

    def test_negative_state_branch(self):
        p = NetworkParams(noise_std=0.0)
        assert compute_outputs(np.array([-3.0]), p, _ZeroNoise())[0] == 0.0

    def test_low_gain(self):
        p = NetworkParams(gain=0.1, noise_std=0.0)
        v = compute_outputs(np.array([0.46]), p, _ZeroNoise())
        assert v[0] == pytest.approx(math.tanh(0.046))

    def test_noise_free_range(self):
        p = NetworkParams(noise_std=0.0)
        u = np.linspace(-5, 30, 200)
        v = compute_outputs(u, p, _ZeroNoise())
        assert np.all(v[u < 0] == 0.0)
        assert np.all((v[u >= 0] >= 0.0) & (v[u >= 0] <= 1.0))
        # strictly below 1 until tanh saturates at float precision
        mid = (u >= 0) & (u < 15)
        assert np.all(v[mid] < 1.0)

    def test_fresh_draw_per_neuron(self):
        p = NetworkParams(noise_std=0.02)
        v = compute_outputs(np.zeros(50), p, rng_stream(1, "neuron_noise"))
        assert len(np.unique(v)) == 50

    def test_deterministic_given_seed(self):
        p = NetworkParams()
        a = compute_outputs(np.ones(8), p, rng_stream(7, "neuron_noise"))
        b = compute_outputs(np.ones(8), p, rng_stream(7, "neuron_noise"))
        assert np.array_equal(a, b)


class TestSelectAction:
    env = EnvironmentParams()

    def test_argmax(self):
        a = select_action(np.array([0.1, 0.5, 0.2]), ActionState(), 0.0, rng_stream(0, "action_duration"), self.env)
        assert a.current == 2  # 1-based index of the winner

    def test_duration_gate(self):
        running = ActionState(current=3, ends_at=5.3)
        a = select_action(np.array([9.0, 0.0]), running, 5.0, rng_stream(0, "action_duration"), self.env)
        assert a is running

    def test_tie_lowest_index(self):
        a = select_action(np.array([0.4, 0.4]), ActionState(), 0.0, rng_stream(0, "action_duration"), self.env)
        assert a.current == 1

    def test_duration_in_range(self):
        rng = rng_stream(0, "action_duration")
        for t in range(50):
            a = select_action(np.array([1.0]), ActionState(), float(t * 10), rng, self.env)
            assert 1.0 <= a.ends_at - t * 10 <= 2.0

    @settings(max_examples=50)
    @given(st.floats(0, 100), st.floats(0.1, 100))
    def test_change_only_at_expiry(self, t, ends_at):
        running = ActionState(current=1, ends_at=ends_at)
        out = select_action(np.array([0.0, 1.0]), running, t, rng_stream(0, "action_duration"), self.env)
        if t < ends_at:
            assert out.current == 1 and out.ends_at == ends_at
        else:
            assert out.current == 2 and out.ends_at > t
