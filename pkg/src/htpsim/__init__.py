"""Deterministic simulator of reward learning with delayed, stochastic rewards.

Two plasticity rules are implemented on the same rate-based network:

* ``rchp`` -- the single-component baseline: thresholded Hebbian correlation
  events feed eligibility traces that are converted to weight changes by a
  global modulation signal.
* ``htp`` -- the two-component rule: the same trace machinery drives a decaying
  short-term weight, and persistent high short-term values are consolidated
  into a separate long-term component.
"""

from .params import (
    NetworkParams,
    PlasticityParams,
    EnvironmentParams,
    RULE_HTP,
    RULE_RCHP,
    resolve_rule_defaults,
)
from .environment import ScenarioSpec, scenario_catalog
from .engine import Simulation
from .experiments import (
    TrialConfig,
    DriftConfig,
    run_trial,
    run_drift,
    run_unlearning_demo,
    run_suite,
    reward_rate,
    weight_summary,
    preset_trial,
)

__all__ = [
    "NetworkParams",
    "PlasticityParams",
    "EnvironmentParams",
    "RULE_HTP",
    "RULE_RCHP",
    "resolve_rule_defaults",
    "ScenarioSpec",
    "scenario_catalog",
    "Simulation",
    "TrialConfig",
    "DriftConfig",
    "run_trial",
    "run_drift",
    "run_unlearning_demo",
    "run_suite",
    "reward_rate",
    "weight_summary",
    "preset_trial",
]

__version__ = "0.1.0"
