"""Rate-based feed-forward network: states, noisy outputs, action selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import EnvironmentParams, NetworkParams


@dataclass
class WeightMatrix:
    """Short-term and long-term weight components, shape (n_inputs, n_outputs).

    Long-term entries live in [0, 1]; short-term entries in [-1, 1] so that a
    weight can carry a negative transient while transmission stays in [0, 1].
    """

    w_st: np.ndarray
    w_lt: np.ndarray

    @classmethod
    def zeros(cls, n_inputs: int, n_outputs: int) -> "WeightMatrix":
        return cls(
            np.zeros((n_inputs, n_outputs)),
            np.zeros((n_inputs, n_outputs)),
        )


@dataclass
class ActionState:
    """Currently executing action (1-based output index) and its end time."""

    current: int | None = None
    ends_at: float = 0.0

    @property
    def active(self) -> bool:
        return self.current is not None


def effective_weights(wm: WeightMatrix, out: np.ndarray | None = None) -> np.ndarray:
    """Transmission weights: clamp(w_st + w_lt, 0, 1). Inputs are not mutated."""
    if wm.w_st.shape != wm.w_lt.shape:
        raise ValueError(f"weight shape mismatch: {wm.w_st.shape} vs {wm.w_lt.shape}")
    total = np.add(wm.w_st, wm.w_lt, out=out)
    return np.clip(total, 0.0, 1.0, out=total)


def compute_states(weights: np.ndarray, inputs: np.ndarray, v_pre: np.ndarray) -> np.ndarray:
    """Neural states u_i = sum_j W_ji v_j + I_i for a layer fed by `weights`."""
    if weights.shape[0] != v_pre.shape[0] or weights.shape[1] != inputs.shape[0]:
        raise ValueError(
            f"inconsistent shapes: weights {weights.shape}, v_pre {v_pre.shape}, inputs {inputs.shape}"
        )
    return weights.T @ v_pre + inputs


def compute_outputs(u: np.ndarray, params: NetworkParams, rng) -> np.ndarray:
    """Noisy saturating outputs: tanh(gain*u) + noise for u >= 0, noise alone otherwise.

    One fresh Gaussian draw per neuron per step, in both branches.
    """
    noise = rng.normal(0.0, params.noise_std, u.shape[0])
    v = np.where(u >= 0.0, np.tanh(params.gain * u), 0.0)
    v += noise
    return v


def select_action(
    v_out: np.ndarray,
    action: ActionState,
    t: float,
    rng,
    env: EnvironmentParams,
) -> ActionState:
    """Keep the running action until it expires; then start argmax(v_out).

    Ties break to the lowest index. The new action runs for a uniform random
    duration from the configured range.
    """
    if action.active and t < action.ends_at:
        return action
    winner = int(np.argmax(v_out)) + 1
    duration = rng.uniform(*env.action_duration_s)
    return ActionState(current=winner, ends_at=t + duration)
