"""Learning dynamics: correlation detection, traces, modulation, weight updates,
consolidation, and adaptive threshold control.

All operations are pure: they return new arrays/values and leave their inputs
untouched. Exponential decays use the exact per-step factor exp(-dt/tau), so n
applications match the closed form x0*exp(-n*dt/tau) to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import exp

import numpy as np

from .params import MODE_FULL, MODE_PLUS, PlasticityParams


@dataclass(frozen=True)
class ThresholdState:
    """Correlation thresholds and the concentrations steering them."""

    theta_hi: float
    theta_lo: float
    omega_c: float = 0.0
    omega_d: float = 0.0

    @classmethod
    def initial(cls, p: PlasticityParams) -> "ThresholdState":
        return cls(theta_hi=p.theta_hi_init, theta_lo=p.theta_lo_init)


def detect_correlations(
    v_pre_delayed: np.ndarray,
    v_post: np.ndarray,
    th: ThresholdState,
    p: PlasticityParams,
) -> np.ndarray:
    """Thresholded Hebbian events for every synapse.

    The product pairs presynaptic output one propagation step ago with the
    current postsynaptic output. In "plus" mode only products above theta_hi
    count (+1); in "full" mode products below theta_lo emit -beta as well.
    """
    products = np.outer(v_pre_delayed, v_post)
    if p.mode == MODE_PLUS:
        return (products > th.theta_hi).astype(float)
    theta = p.alpha * (products > th.theta_hi).astype(float)
    theta -= p.beta * (products < th.theta_lo).astype(float)
    return theta


def update_traces(E: np.ndarray, theta: np.ndarray, p: PlasticityParams, dt: float) -> np.ndarray:
    """Leaky-integrate correlation events: E <- E*exp(-dt/tau_E) + theta."""
    out = E * exp(-dt / p.tau_e_s) + theta
    if p.clamp_traces:
        np.maximum(out, 0.0, out=out)
    return out


def update_modulation(m: float, r: float, p: PlasticityParams, dt: float) -> float:
    """Modulation: fast leaky integral of rewards plus the baseline drift.

    The reward r is a one-step impulse scaled by the learning rate; the
    baseline (given per second) accumulates as b*dt each step.
    """
    return m * exp(-dt / p.tau_m_s) + p.learning_rate * r + p.baseline_modulation * dt


def apply_single_component(w: np.ndarray, m: float, E: np.ndarray, dt: float) -> np.ndarray:
    """Baseline rule: w <- clamp(w + m*E*dt, 0, 1)."""
    out = w + (m * dt) * E
    return np.clip(out, 0.0, 1.0, out=out)


def apply_short_term(w_st: np.ndarray, m: float, E: np.ndarray, p: PlasticityParams, dt: float) -> np.ndarray:
    """Short-term component: decays with tau_st and integrates m*E.

    w_st <- clamp(w_st*exp(-dt/tau_st) + m*E*dt, -1, 1)
    """
    out = w_st * exp(-dt / p.tau_st_s) + (m * dt) * E
    return np.clip(out, -1.0, 1.0, out=out)


def consolidate(w_st: np.ndarray, w_lt: np.ndarray, p: PlasticityParams, dt: float) -> np.ndarray:
    """Long-term growth where the short-term component exceeds the threshold.

    Only entries with w_st > threshold change; w_lt never decreases here and
    saturates at 1.
    """
    out = w_lt + (p.consolidation_rate * dt) * (w_st > p.consolidation_threshold)
    return np.minimum(out, 1.0, out=out)


def unconsolidate(w_st: np.ndarray, w_lt: np.ndarray, p: PlasticityParams, dt: float) -> np.ndarray:
    """Reversal extension: long-term decay where w_st < -threshold, floor 0."""
    out = w_lt - (p.consolidation_rate * dt) * (w_st < -p.consolidation_threshold)
    return np.maximum(out, 0.0, out=out)


def measure_concentration(
    plus_counts: np.ndarray,
    minus_counts: np.ndarray,
    p: PlasticityParams,
    dt: float,
) -> tuple[float, float]:
    """Sliding-window concentration of correlation / decorrelation events.

    omega = dt * (sum of per-step network-wide counts over the window) / window
    length; an empty window gives 0.
    """
    scale = dt / p.window_s
    return scale * float(np.sum(plus_counts)), scale * float(np.sum(minus_counts))


class ConcentrationEstimator:
    """Running estimate of recent correlation concentrations.

    The default keeps a ring buffer of per-step event counts over the window;
    the "leaky" variant low-pass filters the counts with the window as time
    constant, scaled to agree with the sliding window in steady state.
    """

    def __init__(self, p: PlasticityParams, dt: float):
        self.p = p
        self.dt = dt
        self.leaky = p.estimator == "leaky"
        if self.leaky:
            self._decay = exp(-dt / p.window_s)
            self.omega_c = 0.0
            self.omega_d = 0.0
        else:
            n = max(1, round(p.window_s / dt))
            self.plus = np.zeros(n)
            self.minus = np.zeros(n)
            self.pos = 0

    def push(self, n_plus: int, n_minus: int) -> tuple[float, float]:
        if self.leaky:
            g = 1.0 - self._decay
            self.omega_c = self.omega_c * self._decay + g * n_plus
            self.omega_d = self.omega_d * self._decay + g * n_minus
            return self.omega_c, self.omega_d
        self.plus[self.pos] = n_plus
        self.minus[self.pos] = n_minus
        self.pos = (self.pos + 1) % self.plus.shape[0]
        return measure_concentration(self.plus, self.minus, self.p, self.dt)

    def state(self) -> dict:
        if self.leaky:
            return {"omega_c": self.omega_c, "omega_d": self.omega_d}
        return {"plus": self.plus.copy(), "minus": self.minus.copy(), "pos": self.pos}

    def set_state(self, state: dict) -> None:
        if self.leaky:
            self.omega_c = float(state["omega_c"])
            self.omega_d = float(state["omega_d"])
        else:
            self.plus[:] = state["plus"]
            self.minus[:] = state["minus"]
            self.pos = int(state["pos"])


def adapt_thresholds(th: ThresholdState, p: PlasticityParams, dt: float) -> ThresholdState:
    """Nudge thresholds when concentrations leave the [mu/2, 2*mu] dead band.

    Too many correlations raise theta_hi, too few lower it; theta_lo moves the
    opposite way on the decorrelation concentration. The decorrelation branch
    does not exist in "plus" mode, so theta_lo has no consumer there and is
    left untouched.
    """
    mu = p.target_rate
    step = p.adapt_rate * dt
    hi, lo = th.theta_hi, th.theta_lo
    if th.omega_c > 2 * mu:
        hi += step
    elif th.omega_c < mu / 2:
        hi -= step
    if p.mode != MODE_PLUS:
        if th.omega_d > 2 * mu:
            lo -= step
        elif th.omega_d < mu / 2:
            lo += step
    if hi == th.theta_hi and lo == th.theta_lo:
        return th
    return replace(th, theta_hi=hi, theta_lo=lo)
