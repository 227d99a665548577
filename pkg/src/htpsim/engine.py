"""Discrete-time simulation: one network, one plasticity rule, one environment.

The per-step order is fixed for reproducibility:

1. deliver due rewards, update modulation
2. expire the running action, advance the stimulus slots (stimulus onsets
   during a running matching action schedule rewards)
3. compute neural states and noisy outputs from the current transmission
   weights; if no action is running, start the output with the highest
   activity (new co-activations schedule rewards)
4. detect correlations between the previous step's input activity and the new
   output activity; update the concentration estimate and adapt thresholds
5. update eligibility traces, apply the rule's weight update, consolidate
   (and optionally unconsolidate)

A simulation is self-contained: all randomness comes from its own named
streams, so independent instances can run in parallel.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right

import numpy as np

from . import environment as env_mod
from . import network as net_mod
from . import plasticity as plast_mod
from .environment import RewardSchedule, ScenarioSpec, StimulusField
from .network import ActionState, WeightMatrix
from .params import (
    EnvironmentParams,
    NetworkParams,
    PlasticityParams,
    RULE_HTP,
    RULE_RCHP,
    resolve_rule_defaults,
)
from .plasticity import ConcentrationEstimator, ThresholdState
from .rng import RngStreams


class EventLog:
    """Delivered rewards with their originating pair and co-activation time."""

    def __init__(self):
        self.times: list[float] = []
        self.amplitudes: list[float] = []
        self.stimuli: list[int] = []
        self.actions: list[int] = []
        self.origin_times: list[float] = []

    def __len__(self) -> int:
        return len(self.times)

    def append(self, entry) -> None:
        self.times.append(entry.delivery_time)
        self.amplitudes.append(entry.amplitude)
        self.stimuli.append(entry.stimulus)
        self.actions.append(entry.action)
        self.origin_times.append(entry.origin_time)

    def count_in(self, t0: float, t1: float) -> int:
        """Rewards delivered in [t0, t1)."""
        return bisect_left(self.times, t1) - bisect_left(self.times, t0)

    def count_last(self, t: float, window: float) -> int:
        return bisect_right(self.times, t) - bisect_left(self.times, t - window)


class Simulation:
    """Mutable simulation state plus the step kernel."""

    def __init__(
        self,
        net: NetworkParams,
        plast: PlasticityParams,
        env: EnvironmentParams,
        rule: str,
        seed: int,
        unlearning: bool = False,
    ):
        if rule not in (RULE_HTP, RULE_RCHP):
            raise ValueError(f"unknown rule {rule!r}")
        net.validate()
        env.validate()
        self.net = net
        self.plast = resolve_rule_defaults(plast, rule)
        self.env = env
        self.rule = rule
        self.unlearning = bool(unlearning)
        self.streams = RngStreams(seed)
        self.seed = int(seed)

        n_in, n_out = net.n_inputs, net.n_outputs
        self.wm = WeightMatrix.zeros(n_in, n_out)
        self.E = np.zeros((n_in, n_out))
        self.m = 0.0
        self.th = ThresholdState.initial(self.plast)
        self.estimator = ConcentrationEstimator(self.plast, net.dt_s)
        self.v_in = np.zeros(n_in)
        self.v_out = np.zeros(n_out)
        self.field = StimulusField(env)
        self.action = ActionState()
        self.schedule = RewardSchedule()
        self.events = EventLog()
        self.ever_above = np.zeros((n_in, n_out), dtype=bool)
        self.step_idx = 0
        self.scenario: ScenarioSpec | None = None
        self._pool = np.zeros(0, dtype=np.int64)
        # The windowed concentration measure carries a dt factor; dividing it
        # out gives events per second, and the per-synapse reading divides by
        # the synapse count so the target rate is a fraction of synapses per
        # second.
        self._omega_scale = 1.0 / net.dt_s
        if self.plast.per_synapse_rate:
            self._omega_scale /= n_in * n_out
        self._Weff = np.zeros((n_in, n_out))
        self._currents = np.zeros(n_in)
        self._feedback = np.zeros(n_out)

    @property
    def t(self) -> float:
        return self.step_idx * self.net.dt_s

    def attach_scenario(self, scenario: ScenarioSpec) -> None:
        scenario.validate(self.net.n_inputs, self.net.n_outputs)
        self.scenario = scenario
        self._pool = np.asarray(scenario.stimulus_pool, dtype=np.int64)

    def step(self) -> None:
        if self.scenario is None:
            raise RuntimeError("no scenario attached")
        net, plast, env = self.net, self.plast, self.env
        dt = net.dt_s
        t = self.step_idx * dt

        # 1. reward delivery and modulation
        r, delivered = env_mod.emit_reward(self.schedule, t, dt)
        for entry in delivered:
            self.events.append(entry)
        self.m = plast_mod.update_modulation(self.m, r, plast, dt)

        # 2. action expiry, stimulus flow, stimulus-onset rewards
        if self.action.active and t >= self.action.ends_at:
            self.action = ActionState()
        onsets = self.field.step(
            t, self._pool, self.streams.stimulus_timing, self.streams.stimulus_identity
        )
        if self.action.active and onsets:
            env_mod.check_reward(
                {(s, self.action.current) for s in onsets},
                self.scenario,
                t,
                self.schedule,
                env,
                self.streams.reward_delay,
                self.streams.reward_amplitude,
            )

        # 3. network states, outputs, action selection
        active = self.field.active_set()
        self._currents[:] = 0.0
        for s in active:
            self._currents[s - 1] = net.stimulus_current
        self._feedback[:] = 0.0
        if self.action.active:
            self._feedback[self.action.current - 1] = net.feedback_current
        W = net_mod.effective_weights(self.wm, out=self._Weff)
        u_out = net_mod.compute_states(W, self._feedback, self.v_in)
        v_in_new = net_mod.compute_outputs(self._currents, net, self.streams.neuron_noise)
        v_out_new = net_mod.compute_outputs(u_out, net, self.streams.neuron_noise)
        if not self.action.active:
            self.action = net_mod.select_action(
                v_out_new, self.action, t, self.streams.action_duration, env
            )
            if active:
                env_mod.check_reward(
                    {(s, self.action.current) for s in active},
                    self.scenario,
                    t,
                    self.schedule,
                    env,
                    self.streams.reward_delay,
                    self.streams.reward_amplitude,
                )

        # 4. correlations and threshold control; the pre-before-post product
        # needs last step's input activity, so the first step detects nothing
        if self.step_idx > 0:
            theta = plast_mod.detect_correlations(self.v_in, v_out_new, self.th, plast)
            n_plus = int(np.count_nonzero(theta > 0.0))
            n_minus = int(np.count_nonzero(theta < 0.0))
        else:
            theta = np.zeros_like(self.E)
            n_plus = n_minus = 0
        omega_c, omega_d = self.estimator.push(n_plus, n_minus)
        self.th = plast_mod.ThresholdState(
            theta_hi=self.th.theta_hi,
            theta_lo=self.th.theta_lo,
            omega_c=omega_c * self._omega_scale,
            omega_d=omega_d * self._omega_scale,
        )
        self.th = plast_mod.adapt_thresholds(self.th, plast, dt)

        # 5. traces and weight updates
        self.E = plast_mod.update_traces(self.E, theta, plast, dt)
        if self.rule == RULE_HTP:
            self.wm.w_st = plast_mod.apply_short_term(self.wm.w_st, self.m, self.E, plast, dt)
            self.ever_above |= self.wm.w_st > plast.consolidation_threshold
            self.wm.w_lt = plast_mod.consolidate(self.wm.w_st, self.wm.w_lt, plast, dt)
            if self.unlearning:
                self.wm.w_lt = plast_mod.unconsolidate(self.wm.w_st, self.wm.w_lt, plast, dt)
        else:
            self.wm.w_st = plast_mod.apply_single_component(self.wm.w_st, self.m, self.E, dt)

        self.v_in = v_in_new
        self.v_out = v_out_new
        self.step_idx += 1

    def run(self, duration_s: float) -> None:
        for _ in range(round(duration_s / self.net.dt_s)):
            self.step()

    # -- serialization ---------------------------------------------------

    def state_arrays(self) -> dict:
        """Everything needed to resume bit-identically (scenario attached separately)."""
        sched = self.schedule
        pending = sorted(sched._heap)
        return {
            "step_idx": np.array([self.step_idx], dtype=np.int64),
            "w_st": self.wm.w_st,
            "w_lt": self.wm.w_lt,
            "E": self.E,
            "m_theta": np.array([self.m, self.th.theta_hi, self.th.theta_lo, self.th.omega_c, self.th.omega_d]),
            "v_in": self.v_in,
            "v_out": self.v_out,
            "ever_above": self.ever_above,
            "slots": np.array(
                [[s.stimulus if s.stimulus is not None else 0, s.ends_at] for s in self.field.slots]
            ),
            "action": np.array(
                [self.action.current if self.action.active else 0, self.action.ends_at]
            ),
            "pending": np.array(
                [[p.delivery_time, p.seq, p.amplitude, p.stimulus, p.action, p.origin_time] for p in pending]
            ).reshape(len(pending), 6),
            "pending_seq": np.array([sched._seq], dtype=np.int64),
            "event_times": np.asarray(self.events.times),
            "event_amplitudes": np.asarray(self.events.amplitudes),
            "event_stimuli": np.asarray(self.events.stimuli, dtype=np.int64),
            "event_actions": np.asarray(self.events.actions, dtype=np.int64),
            "event_origins": np.asarray(self.events.origin_times),
            "estimator": self._estimator_array(),
        }

    def _estimator_array(self) -> np.ndarray:
        st = self.estimator.state()
        if self.estimator.leaky:
            return np.array([st["omega_c"], st["omega_d"]])
        return np.concatenate([st["plus"], st["minus"], [float(st["pos"])]])

    def restore_arrays(self, data: dict) -> None:
        n_in, n_out = self.net.n_inputs, self.net.n_outputs
        if data["w_st"].shape != (n_in, n_out):
            raise ValueError(
                f"snapshot shape {data['w_st'].shape} does not match network ({n_in}, {n_out})"
            )
        self.step_idx = int(data["step_idx"][0])
        self.wm.w_st = data["w_st"].copy()
        self.wm.w_lt = data["w_lt"].copy()
        self.E = data["E"].copy()
        m, hi, lo, oc, od = data["m_theta"]
        self.m = float(m)
        self.th = ThresholdState(theta_hi=float(hi), theta_lo=float(lo), omega_c=float(oc), omega_d=float(od))
        self.v_in = data["v_in"].copy()
        self.v_out = data["v_out"].copy()
        self.ever_above = data["ever_above"].copy()
        for slot, (stim, ends) in zip(self.field.slots, data["slots"]):
            slot.stimulus = int(stim) if stim else None
            slot.ends_at = float(ends)
        a, ends = data["action"]
        self.action = ActionState(current=int(a) if a else None, ends_at=float(ends))
        self.schedule = RewardSchedule()
        for delivery, seq, amp, stim, act, origin in data["pending"]:
            self.schedule._heap.append(
                env_mod._PendingReward(float(delivery), int(seq), float(amp), int(stim), int(act), float(origin))
            )
        import heapq

        heapq.heapify(self.schedule._heap)
        self.schedule._seq = int(data["pending_seq"][0])
        self.events = EventLog()
        self.events.times = [float(x) for x in data["event_times"]]
        self.events.amplitudes = [float(x) for x in data["event_amplitudes"]]
        self.events.stimuli = [int(x) for x in data["event_stimuli"]]
        self.events.actions = [int(x) for x in data["event_actions"]]
        self.events.origin_times = [float(x) for x in data["event_origins"]]
        est = data["estimator"]
        if self.estimator.leaky:
            self.estimator.set_state({"omega_c": est[0], "omega_d": est[1]})
        else:
            n = self.estimator.plus.shape[0]
            if est.shape[0] != 2 * n + 1:
                raise ValueError("snapshot estimator window does not match configuration")
            self.estimator.set_state({"plus": est[:n], "minus": est[n : 2 * n], "pos": int(est[-1])})
