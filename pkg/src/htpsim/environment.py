"""Stochastic world: stimulus flow, rewarded-pair rules, delayed reward channel.

Stimulus and action indices are 1-based everywhere in this module (matching
the published scenario tables); the network maps them to 0-based array
indices at its boundary.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .params import EnvironmentParams


@dataclass(frozen=True)
class ScenarioSpec:
    """One timed environment phase: which pairs pay, which stimuli occur."""

    id: str
    rewarded_pairs: frozenset[tuple[int, int]]
    stimulus_pool: tuple[int, ...]

    def validate(self, n_inputs: int, n_outputs: int) -> None:
        if not self.stimulus_pool:
            raise ValueError(f"scenario {self.id}: stimulus_pool is empty")
        for s in self.stimulus_pool:
            if not 1 <= s <= n_inputs:
                raise ValueError(f"scenario {self.id}: stimulus {s} outside 1..{n_inputs}")
        for s, a in self.rewarded_pairs:
            if not 1 <= s <= n_inputs:
                raise ValueError(f"scenario {self.id}: pair stimulus {s} outside 1..{n_inputs}")
            if not 1 <= a <= n_outputs:
                raise ValueError(f"scenario {self.id}: pair action {a} outside 1..{n_outputs}")


def _checker_pairs(stim_lo: int, stim_hi: int, n_actions: int) -> frozenset:
    # alternating cells: (stimulus + action) even
    return frozenset(
        (s, a)
        for s in range(stim_lo, stim_hi + 1)
        for a in range(1, n_actions + 1)
        if (s + a) % 2 == 0
    )


_CATALOG: dict[str, ScenarioSpec] = {
    # Full-scale scenarios on the 300-input network.
    "S1": ScenarioSpec(
        "S1",
        frozenset((i, i) for i in range(1, 11)),
        tuple(range(1, 11)) + tuple(range(31, 301)),
    ),
    "S2": ScenarioSpec(
        "S2",
        frozenset((i, i - 5) for i in range(11, 21)),
        tuple(range(11, 21)) + tuple(range(31, 301)),
    ),
    "S3": ScenarioSpec(
        "S3",
        frozenset((i, i - 20) for i in range(21, 31)),
        tuple(range(21, 301)),
    ),
    # Checkerboard variants (10 output neurons, 6 actions rewarded).
    "CHECKER_A": ScenarioSpec(
        "CHECKER_A",
        _checker_pairs(1, 6, 6),
        tuple(range(1, 7)) + tuple(range(31, 301)),
    ),
    "CHECKER_B": ScenarioSpec(
        "CHECKER_B",
        _checker_pairs(7, 12, 6),
        tuple(range(7, 13)) + tuple(range(31, 301)),
    ),
    # Mini scenarios for the 80-input / 10-output preset, mirroring the
    # full-scale structure: 3 scenario-specific stimuli each plus a shared
    # distractor pool 10..80. The distractor pool is sized so that per-pair
    # co-activation coincidences stay rare relative to the short-term decay,
    # which is what protects non-rewarded synapses from consolidating.
    "MINI1": ScenarioSpec(
        "MINI1",
        frozenset({(1, 1), (2, 2), (3, 3)}),
        (1, 2, 3) + tuple(range(10, 81)),
    ),
    "MINI2": ScenarioSpec(
        "MINI2",
        frozenset({(4, 5), (5, 6), (6, 7)}),
        (4, 5, 6) + tuple(range(10, 81)),
    ),
    "MINI3": ScenarioSpec(
        "MINI3",
        frozenset({(7, 1), (8, 2), (9, 3)}),
        tuple(range(7, 81)),
    ),
    "CHECKER_MINI_A": ScenarioSpec(
        "CHECKER_MINI_A",
        _checker_pairs(1, 6, 6),
        tuple(range(1, 7)) + tuple(range(13, 81)),
    ),
    "CHECKER_MINI_B": ScenarioSpec(
        "CHECKER_MINI_B",
        _checker_pairs(7, 12, 6),
        tuple(range(7, 81)),
    ),
}


def scenario_catalog(name: str) -> ScenarioSpec:
    """Look up a named scenario; raises KeyError with the known names."""
    try:
        return _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(_CATALOG)}") from None


@dataclass
class StimulusSlot:
    """One of the concurrent stimulus channels: active stimulus or idle gap."""

    stimulus: int | None = None
    ends_at: float = 0.0


class StimulusField:
    """The concurrent slots producing the asynchronous stimulus flow.

    Each slot, when its interval expires, becomes active with probability 1/2
    (stimulus drawn uniformly from the scenario pool) or idle, in both cases
    for a duration drawn from the configured range. Occupancy is therefore
    Binomial(n_slots, 1/2) in stationarity.
    """

    def __init__(self, env: EnvironmentParams):
        self.env = env
        self.slots = [StimulusSlot() for _ in range(env.max_active_stimuli)]

    def active_set(self) -> set[int]:
        return {s.stimulus for s in self.slots if s.stimulus is not None}

    def step(self, t: float, pool: np.ndarray, rng_timing, rng_identity) -> set[int]:
        """Redraw expired slots; return stimuli that newly joined the active set."""
        if pool.size == 0:
            raise ValueError("stimulus pool is empty")
        before = self.active_set()
        lo, hi = self.env.stimulus_duration_s
        for slot in self.slots:
            while slot.ends_at <= t:
                active = rng_timing.random() < self.env.slot_active_probability
                duration = rng_timing.uniform(lo, hi)
                slot.ends_at += duration if slot.ends_at > 0.0 else t + duration
                if active:
                    slot.stimulus = int(pool[rng_identity.integers(0, pool.size)])
                else:
                    slot.stimulus = None
        return self.active_set() - before


@dataclass(order=True)
class _PendingReward:
    delivery_time: float
    seq: int
    amplitude: float = field(compare=False)
    stimulus: int = field(compare=False)
    action: int = field(compare=False)
    origin_time: float = field(compare=False)


class RewardSchedule:
    """Pending delayed rewards, delivered in time order."""

    def __init__(self):
        self._heap: list[_PendingReward] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    @property
    def pending(self) -> list[tuple[float, float]]:
        return sorted((p.delivery_time, p.amplitude) for p in self._heap)

    def add(self, delivery_time: float, amplitude: float, stimulus: int, action: int, origin_time: float) -> None:
        heapq.heappush(
            self._heap,
            _PendingReward(delivery_time, self._seq, amplitude, stimulus, action, origin_time),
        )
        self._seq += 1

    def pop_due(self, t: float, dt: float) -> tuple[float, list[_PendingReward]]:
        """Total amplitude and entries with delivery time in [t, t + dt)."""
        delivered = []
        total = 0.0
        while self._heap and self._heap[0].delivery_time < t + dt:
            entry = heapq.heappop(self._heap)
            if entry.delivery_time >= t:
                delivered.append(entry)
                total += entry.amplitude
            # entries strictly before t can only exist after a resume skew; drop them
        return total, delivered


def check_reward(
    candidate_pairs: set[tuple[int, int]],
    scenario: ScenarioSpec,
    t: float,
    schedule: RewardSchedule,
    env: EnvironmentParams,
    rng_delay,
    rng_amplitude,
) -> int:
    """Schedule one delayed reward per rewarded pair among the candidates.

    Candidates are the (stimulus, action) co-activations that began this step:
    either a new action starting under active stimuli, or stimulus onsets
    during a running action.
    """
    n = 0
    for pair in sorted(candidate_pairs):
        if pair in scenario.rewarded_pairs:
            delay = rng_delay.uniform(*env.reward_delay_s)
            amplitude = rng_amplitude.uniform(*env.reward_amplitude)
            schedule.add(t + delay, amplitude, pair[0], pair[1], t)
            n += 1
    return n


def emit_reward(schedule: RewardSchedule, t: float, dt: float) -> tuple[float, list[_PendingReward]]:
    """r(t): summed amplitude of rewards falling due in this step."""
    return schedule.pop_due(t, dt)
