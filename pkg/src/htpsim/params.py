"""Parameter sets for the network, the plasticity rules, and the environment.

Scalar defaults are the published operating point of the model. Two fields
depend on which rule is run and are filled in by :func:`resolve_rule_defaults`
when left as ``None``:

* ``mode`` -- correlation detection: the two-component rule uses positive
  correlations only (``"plus"``); the single-component baseline uses both
  correlations and decorrelations (``"full"``).
* ``clamp_traces`` / ``baseline_modulation`` -- see the rule constants below.
  The two-component rule runs with a small negative baseline (unrewarded
  traces depress the short-term weight) and non-negative traces; the baseline
  rule runs with a small positive baseline and bipolar traces so that
  decorrelation events erode weights that stop being rewarded.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

RULE_RCHP = "rchp"
RULE_HTP = "htp"
MODE_FULL = "full"
MODE_PLUS = "plus"

# Rule-dependent defaults for the baseline modulation drift (per second).
HTP_BASELINE_MODULATION = -0.003
RCHP_BASELINE_MODULATION = 0.03


@dataclass(frozen=True)
class NetworkParams:
    """Rate-based feed-forward layer sizes and neuron constants.

    Signal propagation from inputs to outputs takes exactly one sampling step,
    so the pre/post correlation product pairs the previous step's input
    activity with the current output activity.
    """

    n_inputs: int = 300
    n_outputs: int = 30
    gain: float = 0.5
    noise_std: float = 0.02
    dt_s: float = 0.1
    stimulus_current: float = 10.0
    feedback_current: float = 0.5

    @property
    def propagation_time_s(self) -> float:
        return self.dt_s

    def validate(self) -> None:
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise ValueError("n_inputs and n_outputs must be >= 1")
        if self.dt_s <= 0:
            raise ValueError("dt_s must be > 0")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")


@dataclass(frozen=True)
class PlasticityParams:
    """Constants of the learning dynamics.

    ``target_rate`` is the wanted concentration of correlation events; with
    ``per_synapse_rate`` it is read as a fraction of synapses per second and
    the measured concentration is divided by the synapse count before the
    thresholds adapt.
    """

    learning_rate: float = 0.1
    baseline_modulation: float | None = None  # per second; None -> rule default
    tau_m_s: float = 0.1
    tau_e_s: float = 4.0
    tau_st_s: float = 8 * 3600.0
    consolidation_rate: float = 1.0 / 1800.0
    consolidation_threshold: float = 0.95
    alpha: float = 1.0
    beta: float = 1.0
    target_rate: float = 0.001
    adapt_rate: float = 0.001
    window_s: float = 5.0
    mode: str | None = None  # None -> rule default
    clamp_traces: bool | None = None  # None -> rule default
    per_synapse_rate: bool = True
    estimator: str = "window"  # "window" or "leaky"
    theta_hi_init: float = 0.8
    theta_lo_init: float = 1e-6

    def validate(self) -> None:
        for name in ("tau_m_s", "tau_e_s", "tau_st_s", "window_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 < self.consolidation_threshold < 1:
            raise ValueError("consolidation_threshold must be in (0, 1)")
        if self.target_rate <= 0 or self.adapt_rate <= 0:
            raise ValueError("target_rate and adapt_rate must be > 0")
        if self.mode not in (MODE_FULL, MODE_PLUS):
            raise ValueError(f"mode must be {MODE_FULL!r} or {MODE_PLUS!r}")
        if self.estimator not in ("window", "leaky"):
            raise ValueError("estimator must be 'window' or 'leaky'")
        if self.baseline_modulation is None or self.clamp_traces is None:
            raise ValueError("rule defaults not resolved; call resolve_rule_defaults")


@dataclass(frozen=True)
class EnvironmentParams:
    """Stimulus flow and reward channel constants."""

    max_active_stimuli: int = 3
    slot_active_probability: float = 0.5
    stimulus_duration_s: tuple[float, float] = (1.0, 2.0)
    action_duration_s: tuple[float, float] = (1.0, 2.0)
    reward_delay_s: tuple[float, float] = (1.0, 4.0)
    reward_amplitude: tuple[float, float] = (0.25, 0.75)

    def validate(self) -> None:
        if self.max_active_stimuli < 1:
            raise ValueError("max_active_stimuli must be >= 1")
        for name in ("stimulus_duration_s", "action_duration_s", "reward_delay_s", "reward_amplitude"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} range is inverted")
        for name in ("stimulus_duration_s", "action_duration_s", "reward_delay_s"):
            if getattr(self, name)[0] <= 0:
                raise ValueError(f"{name} must be positive")


def resolve_rule_defaults(p: PlasticityParams, rule: str) -> PlasticityParams:
    """Fill rule-dependent ``None`` fields and return a fully concrete set."""
    if rule not in (RULE_RCHP, RULE_HTP):
        raise ValueError(f"unknown rule {rule!r}")
    updates = {}
    if p.mode is None:
        updates["mode"] = MODE_PLUS if rule == RULE_HTP else MODE_FULL
    if p.clamp_traces is None:
        updates["clamp_traces"] = rule == RULE_HTP
    if p.baseline_modulation is None:
        updates["baseline_modulation"] = (
            HTP_BASELINE_MODULATION if rule == RULE_HTP else RCHP_BASELINE_MODULATION
        )
    resolved = replace(p, **updates) if updates else p
    resolved.validate()
    return resolved
