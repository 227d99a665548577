"""Named, independently seeded random streams.

Every stochastic consumer in a simulation draws from its own counter-based
(Philox) generator keyed by ``(seed, stream index)``. Adding draws to one
consumer therefore never perturbs the sequences seen by the others, and the
same ``(seed, name)`` pair yields the same sequence on every platform.
"""

from __future__ import annotations

import numpy as np

STREAM_NAMES = (
    "stimulus_identity",
    "stimulus_timing",
    "action_duration",
    "reward_delay",
    "reward_amplitude",
    "neuron_noise",
    "scalar_updates",
)


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Return the deterministic generator for one named stream."""
    if name not in STREAM_NAMES:
        raise ValueError(f"unknown rng stream {name!r}; expected one of {STREAM_NAMES}")
    idx = STREAM_NAMES.index(name)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(idx,))
    return np.random.Generator(np.random.Philox(ss))


class RngStreams:
    """Bundle of all named streams for one simulation seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gens = {name: rng_stream(seed, name) for name in STREAM_NAMES}

    def __getitem__(self, name: str) -> np.random.Generator:
        return self._gens[name]

    @property
    def stimulus_identity(self):
        return self._gens["stimulus_identity"]

    @property
    def stimulus_timing(self):
        return self._gens["stimulus_timing"]

    @property
    def action_duration(self):
        return self._gens["action_duration"]

    @property
    def reward_delay(self):
        return self._gens["reward_delay"]

    @property
    def reward_amplitude(self):
        return self._gens["reward_amplitude"]

    @property
    def neuron_noise(self):
        return self._gens["neuron_noise"]

    @property
    def scalar_updates(self):
        return self._gens["scalar_updates"]

    def state(self) -> dict:
        """Serializable state of every stream (for exact resume)."""
        return {name: gen.bit_generator.state for name, gen in self._gens.items()}

    def set_state(self, state: dict) -> None:
        for name, gen in self._gens.items():
            gen.bit_generator.state = state[name]
