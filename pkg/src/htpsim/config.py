"""JSON run configuration: schema validation, defaults, hashing.

A config file is a single JSON document with optional sections ``network``,
``plasticity``, ``environment`` and top-level run keys. Unknown keys are
rejected by full path; missing keys fall back to the preset defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import replace
from pathlib import Path

from .environment import ScenarioSpec, scenario_catalog
from .experiments import TrialConfig, preset_trial
from .params import RULE_HTP, RULE_RCHP, resolve_rule_defaults


class ConfigError(Exception):
    pass


_RUN_KEYS = {
    "network",
    "plasticity",
    "environment",
    "rule",
    "unlearning",
    "scenarios",
    "seed",
    "trials",
    "snapshot_s",
    "out_dir",
}

_TUPLE_FIELDS = {
    "stimulus_duration_s",
    "action_duration_s",
    "reward_delay_s",
    "reward_amplitude",
}


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return raw


def _update_params(params, section: dict, section_name: str):
    known = {f.name: f for f in dataclasses.fields(params)}
    updates = {}
    for key, value in section.items():
        if key not in known:
            raise ConfigError(f"unknown key {section_name}.{key}")
        if key in _TUPLE_FIELDS:
            if not (isinstance(value, (list, tuple)) and len(value) == 2):
                raise ConfigError(f"{section_name}.{key} must be a [low, high] pair")
            value = (float(value[0]), float(value[1]))
        updates[key] = value
    try:
        return replace(params, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in section {section_name}: {exc}") from exc


def _parse_scenarios(entries, default_duration: float = 86400.0):
    if not isinstance(entries, list):
        raise ConfigError("scenarios must be a list")
    out = []
    for i, entry in enumerate(entries):
        where = f"scenarios[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be an object")
        duration = float(entry.get("duration_s", default_duration))
        if "name" in entry:
            extra = set(entry) - {"name", "duration_s"}
            if extra:
                raise ConfigError(f"unknown key {where}.{extra.pop()}")
            try:
                spec = scenario_catalog(entry["name"])
            except KeyError as exc:
                raise ConfigError(f"{where}.name: {exc.args[0]}") from exc
        else:
            extra = set(entry) - {"id", "rewarded_pairs", "stimulus_pool", "duration_s"}
            if extra:
                raise ConfigError(f"unknown key {where}.{extra.pop()}")
            for req in ("id", "rewarded_pairs", "stimulus_pool"):
                if req not in entry:
                    raise ConfigError(f"{where} missing key {req}")
            try:
                spec = ScenarioSpec(
                    id=str(entry["id"]),
                    rewarded_pairs=frozenset((int(s), int(a)) for s, a in entry["rewarded_pairs"]),
                    stimulus_pool=tuple(int(s) for s in entry["stimulus_pool"]),
                )
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid inline scenario at {where}: {exc}") from exc
        out.append((spec, duration))
    return tuple(out)


@dataclasses.dataclass
class RunSetup:
    trial: TrialConfig
    trials: int = 1
    out_dir: str = "out"
    parallel: int = 1


def resolve_config(
    file_cfg: dict | None = None,
    preset: str = "mini",
    overrides: dict | None = None,
) -> RunSetup:
    """Merge preset defaults, an optional config file, and CLI overrides."""
    overrides = overrides or {}
    base = preset_trial(preset)
    trial = base
    trials = 1
    out_dir = "out"

    if file_cfg:
        unknown = set(file_cfg) - _RUN_KEYS
        if unknown:
            raise ConfigError(f"unknown key {sorted(unknown)[0]}")
        net = trial.network
        plast = trial.plasticity
        env = trial.environment
        if "network" in file_cfg:
            net = _update_params(net, file_cfg["network"], "network")
        if "plasticity" in file_cfg:
            plast = _update_params(plast, file_cfg["plasticity"], "plasticity")
        if "environment" in file_cfg:
            env = _update_params(env, file_cfg["environment"], "environment")
        trial = replace(trial, network=net, plasticity=plast, environment=env)
        if "rule" in file_cfg:
            trial = replace(trial, rule=str(file_cfg["rule"]))
        if "unlearning" in file_cfg:
            trial = replace(trial, unlearning=bool(file_cfg["unlearning"]))
        if "scenarios" in file_cfg:
            trial = replace(trial, scenarios=_parse_scenarios(file_cfg["scenarios"]))
        if "seed" in file_cfg:
            trial = replace(trial, seed=int(file_cfg["seed"]))
        if "snapshot_s" in file_cfg:
            trial = replace(trial, snapshot_s=float(file_cfg["snapshot_s"]))
        if "trials" in file_cfg:
            trials = int(file_cfg["trials"])
        if "out_dir" in file_cfg:
            out_dir = str(file_cfg["out_dir"])

    if overrides.get("rule") is not None:
        trial = replace(trial, rule=overrides["rule"])
    if overrides.get("seed") is not None:
        trial = replace(trial, seed=int(overrides["seed"]))
    if overrides.get("trials") is not None:
        trials = int(overrides["trials"])
    if overrides.get("out") is not None:
        out_dir = overrides["out"]

    if trial.rule not in (RULE_HTP, RULE_RCHP):
        raise ConfigError(f"rule must be '{RULE_HTP}' or '{RULE_RCHP}', got {trial.rule!r}")
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    try:
        trial.validate()
        resolve_rule_defaults(trial.plasticity, trial.rule)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunSetup(
        trial=trial,
        trials=trials,
        out_dir=out_dir,
        parallel=int(overrides.get("parallel") or 1),
    )


def setup_to_dict(setup: RunSetup) -> dict:
    """Fully-resolved parameter set, rule defaults applied (for printing/hashing)."""
    trial = setup.trial
    plast = resolve_rule_defaults(trial.plasticity, trial.rule)
    return {
        "network": dataclasses.asdict(trial.network),
        "plasticity": dataclasses.asdict(plast),
        "environment": dataclasses.asdict(trial.environment),
        "rule": trial.rule,
        "unlearning": trial.unlearning,
        "scenarios": [
            {
                "id": spec.id,
                "rewarded_pairs": sorted(list(p) for p in spec.rewarded_pairs),
                "stimulus_pool": list(spec.stimulus_pool),
                "duration_s": duration,
            }
            for spec, duration in trial.scenarios
        ],
        "seed": trial.seed,
        "trials": setup.trials,
        "snapshot_s": trial.snapshot_s,
        "out_dir": setup.out_dir,
    }


def config_hash(setup: RunSetup) -> str:
    blob = json.dumps(setup_to_dict(setup), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()
