"""Experiment drivers: scenario trials, the scalar drift study, the unlearning
demo, multi-seed suites, and the reported metrics."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import Simulation
from .environment import ScenarioSpec, scenario_catalog
from .network import effective_weights
from .params import (
    EnvironmentParams,
    NetworkParams,
    PlasticityParams,
    RULE_HTP,
)
from .rng import rng_stream

ST_EDGES = np.linspace(-1.0, 1.0, 21)
LT_EDGES = np.linspace(0.0, 1.0, 21)
TOTAL_EDGES = np.linspace(0.0, 1.0, 21)


class MetricsSeries:
    """Time-stamped snapshot table with a fixed column set."""

    def __init__(self, columns: list[str]):
        self.columns = list(columns)
        self.rows: list[list[float]] = []

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: list[float]) -> None:
        if len(row) != len(self.columns):
            raise ValueError("row width does not match columns")
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows])


@dataclass(frozen=True)
class TrialConfig:
    """One reproducible simulation run: parameters, scenario sequence, seed."""

    network: NetworkParams = field(default_factory=NetworkParams)
    plasticity: PlasticityParams = field(default_factory=PlasticityParams)
    environment: EnvironmentParams = field(default_factory=EnvironmentParams)
    rule: str = RULE_HTP
    unlearning: bool = False
    scenarios: tuple[tuple[ScenarioSpec, float], ...] = ()
    seed: int = 0
    snapshot_s: float = 60.0

    def validate(self) -> None:
        self.network.validate()
        self.environment.validate()
        if self.snapshot_s < self.network.dt_s:
            raise ValueError("snapshot_s must be >= dt_s")
        for spec, duration in self.scenarios:
            if duration <= 0:
                raise ValueError(f"scenario {spec.id}: duration must be > 0")
            spec.validate(self.network.n_inputs, self.network.n_outputs)


@dataclass
class TrialResult:
    series: MetricsSeries
    sim: Simulation
    scenario_ids: tuple[str, ...]
    rewarded_union: frozenset[tuple[int, int]]


def _pair_indices(pairs, n_outputs: int) -> tuple[np.ndarray, np.ndarray]:
    ordered = sorted(pairs)
    rows = np.array([s - 1 for s, _ in ordered], dtype=np.int64)
    cols = np.array([a - 1 for _, a in ordered], dtype=np.int64)
    return rows, cols


def series_columns(scenario_ids: tuple[str, ...]) -> list[str]:
    cols = [
        "t_s",
        "m",
        "theta_hi",
        "theta_lo",
        "omega_c",
        "omega_d",
        "rewards_total",
        "rewards_last_hour",
    ]
    for sid in scenario_ids:
        cols += [f"cumw_{sid}", f"cumlt_{sid}", f"minlt_{sid}"]
    cols += [
        "mean_rewarded_w",
        "mean_nonrewarded_w",
        "max_nonrewarded_w",
        "frac_nonrewarded_gt_0p1",
    ]
    cols += [f"hist_st_{i:02d}" for i in range(20)]
    cols += [f"hist_lt_{i:02d}" for i in range(20)]
    cols += [f"hist_w_{i:02d}" for i in range(20)]
    return cols


def run_trial(cfg: TrialConfig) -> TrialResult:
    """Run the scenario sequence, carrying state across scenarios.

    Snapshots are taken on the global snapshot grid; the result is fully
    determined by the config (including the seed).
    """
    cfg.validate()
    sim = Simulation(
        cfg.network, cfg.plasticity, cfg.environment, cfg.rule, cfg.seed, cfg.unlearning
    )
    scenario_ids: list[str] = []
    per_scenario: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    union: set[tuple[int, int]] = set()
    for spec, _ in cfg.scenarios:
        if spec.id not in per_scenario:
            scenario_ids.append(spec.id)
            per_scenario[spec.id] = _pair_indices(spec.rewarded_pairs, cfg.network.n_outputs)
        union |= spec.rewarded_pairs
    union_idx = _pair_indices(union, cfg.network.n_outputs)
    non_mask = np.ones((cfg.network.n_inputs, cfg.network.n_outputs), dtype=bool)
    if union:
        non_mask[union_idx] = False

    series = MetricsSeries(series_columns(tuple(scenario_ids)))
    steps_per_snap = round(cfg.snapshot_s / cfg.network.dt_s)

    def snapshot_row() -> list[float]:
        W = effective_weights(sim.wm)
        row = [
            sim.t,
            sim.m,
            sim.th.theta_hi,
            sim.th.theta_lo,
            sim.th.omega_c,
            sim.th.omega_d,
            float(len(sim.events)),
            float(sim.events.count_last(sim.t, 3600.0)),
        ]
        for sid in scenario_ids:
            rs, cs = per_scenario[sid]
            row += [
                float(W[rs, cs].sum()),
                float(sim.wm.w_lt[rs, cs].sum()),
                float(sim.wm.w_lt[rs, cs].min()) if rs.size else 0.0,
            ]
        rewarded_vals = W[union_idx] if union else np.zeros(0)
        non_vals = W[non_mask]
        row += [
            float(rewarded_vals.mean()) if rewarded_vals.size else 0.0,
            float(non_vals.mean()) if non_vals.size else 0.0,
            float(non_vals.max()) if non_vals.size else 0.0,
            float((non_vals > 0.1).mean()) if non_vals.size else 0.0,
        ]
        row += list(np.histogram(sim.wm.w_st, bins=ST_EDGES)[0].astype(float))
        row += list(np.histogram(sim.wm.w_lt, bins=LT_EDGES)[0].astype(float))
        row += list(np.histogram(W, bins=TOTAL_EDGES)[0].astype(float))
        return row

    for spec, duration in cfg.scenarios:
        sim.attach_scenario(spec)
        for _ in range(round(duration / cfg.network.dt_s)):
            sim.step()
            if sim.step_idx % steps_per_snap == 0:
                series.append(snapshot_row())

    return TrialResult(series, sim, tuple(scenario_ids), frozenset(union))


def reward_rate(event_times, window_s: float = 3600.0, duration_s: float | None = None) -> np.ndarray:
    """Counts of delivered rewards per consecutive time bucket."""
    times = np.asarray(event_times, dtype=float)
    if duration_s is None:
        duration_s = float(times.max()) + window_s if times.size else 0.0
    n_buckets = int(np.ceil(duration_s / window_s)) if duration_s > 0 else 0
    counts = np.zeros(n_buckets, dtype=np.int64)
    if times.size and n_buckets:
        idx = np.floor_divide(times, window_s).astype(np.int64)
        idx = idx[(idx >= 0) & (idx < n_buckets)]
        np.add.at(counts, idx, 1)
    return counts


def weight_summary(wm, rewarded_pairs) -> dict:
    """Separation metrics between rewarded and non-rewarded synapses."""
    W = effective_weights(wm)
    n_in, n_out = W.shape
    rs, cs = _pair_indices(rewarded_pairs, n_out)
    mask = np.zeros(W.shape, dtype=bool)
    if rs.size:
        mask[rs, cs] = True
    rewarded = W[mask]
    non = W[~mask]
    return {
        "mean_rewarded_total": float(rewarded.mean()) if rewarded.size else 0.0,
        "cumulative_rewarded_total": float(rewarded.sum()),
        "mean_nonrewarded_total": float(non.mean()) if non.size else 0.0,
        "max_nonrewarded_total": float(non.max()) if non.size else 0.0,
        "frac_nonrewarded_above_0p1": float((non > 0.1).mean()) if non.size else 0.0,
        "hist_st": np.histogram(wm.w_st, bins=ST_EDGES)[0].tolist(),
        "hist_lt": np.histogram(wm.w_lt, bins=LT_EDGES)[0].tolist(),
        "hist_total": np.histogram(W, bins=TOTAL_EDGES)[0].tolist(),
    }


# -- scalar drift study ----------------------------------------------------


@dataclass(frozen=True)
class DriftConfig:
    """Pre-determined stochastic weight updates applied every few minutes.

    Each phase draws one update per episode from a uniform range; updates are
    shared by the single-component and two-component weights so the rules see
    identical input.
    """

    phases: tuple[tuple[float, float, int], ...] = (
        (-0.06, 0.06, 1000),
        (0.0, 0.0, 1000),
        (-0.03, 0.09, 1000),
    )
    interval_s: float = 300.0
    initial_weight: float = 0.5
    tau_st_s: float = 8 * 3600.0
    consolidation_rate: float = 1.0 / 1800.0
    consolidation_threshold: float = 0.95
    unlearning: bool = False
    seed: int = 0

    def validate(self) -> None:
        if not self.phases or any(n <= 0 for _, _, n in self.phases):
            raise ValueError("each phase needs a positive episode count")
        if self.interval_s <= 0:
            raise ValueError("interval_s must be > 0")


DRIFT_COLUMNS = ["episode", "phase", "update", "w_single", "w_st", "w_lt", "w_total"]


def run_drift(cfg: DriftConfig) -> MetricsSeries:
    """Drive both weight rules with the same random update sequence.

    The two-component weight starts as (w_st=0, w_lt=initial); consolidation
    acts once per episode with the rate scaled by the inter-episode interval.
    """
    cfg.validate()
    rng = rng_stream(cfg.seed, "scalar_updates")
    decay = np.exp(-cfg.interval_s / cfg.tau_st_s)
    rho_eff = cfg.consolidation_rate * cfg.interval_s
    psi = cfg.consolidation_threshold

    series = MetricsSeries(DRIFT_COLUMNS)
    w_single = cfg.initial_weight
    w_st, w_lt = 0.0, cfg.initial_weight
    episode = 0
    for phase_idx, (lo, hi, n) in enumerate(cfg.phases, start=1):
        for _ in range(n):
            episode += 1
            u = float(rng.uniform(lo, hi))
            w_single = min(1.0, max(0.0, w_single + u))
            w_st = min(1.0, max(-1.0, w_st * decay + u))
            if w_st > psi:
                w_lt = min(1.0, w_lt + rho_eff)
            if cfg.unlearning and w_st < -psi:
                w_lt = max(0.0, w_lt - rho_eff)
            w_total = min(1.0, max(0.0, w_st + w_lt))
            series.append([float(episode), float(phase_idx), u, w_single, w_st, w_lt, w_total])
    return series


def run_unlearning_demo(seed: int = 0, episodes_per_phase: int = 1000) -> MetricsSeries:
    """Scripted three-phase demo: positive-mean, zero, then negative-mean updates.

    The long-term component rises to saturation, holds while updates stop, and
    is dismantled once the short-term component is driven strongly negative.
    """
    cfg = DriftConfig(
        phases=(
            (-0.03, 0.09, episodes_per_phase),
            (0.0, 0.0, episodes_per_phase),
            (-0.09, 0.03, episodes_per_phase),
        ),
        unlearning=True,
        seed=seed,
    )
    return run_drift(cfg)


# -- multi-seed suites -----------------------------------------------------


def _suite_worker(args) -> dict:
    cfg, seed = args
    result = run_trial(replace(cfg, seed=seed))
    summary = weight_summary(result.sim.wm, result.rewarded_union)
    summary["seed"] = seed
    summary["rewards_total"] = len(result.sim.events)
    summary["nonrewarded_lt_positive"] = _nonrewarded_lt_positive(result)
    return {"seed": seed, "rows": result.series.rows, "columns": result.series.columns, "summary": summary}


def _nonrewarded_lt_positive(result: TrialResult) -> int:
    mask = np.ones(result.sim.wm.w_lt.shape, dtype=bool)
    if result.rewarded_union:
        rs, cs = _pair_indices(result.rewarded_union, result.sim.net.n_outputs)
        mask[rs, cs] = False
    return int(np.count_nonzero(result.sim.wm.w_lt[mask] > 0.0))


AGG_STATS = ("mean", "min", "max", "q25", "q50", "q75")


def aggregate_rows(rows_per_trial: list[list[list[float]]]) -> list[list[float]]:
    """Per-snapshot statistics across trials (order of trials is irrelevant)."""
    stack = np.array(rows_per_trial)  # (trials, snapshots, columns)
    if stack.ndim != 3:
        raise ValueError("trials disagree on snapshot count or column count")
    out = np.concatenate(
        [
            stack.mean(axis=0),
            stack.min(axis=0),
            stack.max(axis=0),
            np.quantile(stack, 0.25, axis=0),
            np.quantile(stack, 0.50, axis=0),
            np.quantile(stack, 0.75, axis=0),
        ],
        axis=1,
    )
    return out.tolist()


@dataclass
class SuiteResult:
    columns: list[str]
    rows: list[list[float]]
    summaries: list[dict]


def run_suite(cfg: TrialConfig, n_trials: int, base_seed: int, parallel: int = 1) -> SuiteResult:
    """Run trials with seeds base..base+n-1 and aggregate their series."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    jobs = [(cfg, base_seed + i) for i in range(n_trials)]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_suite_worker, jobs))
    else:
        results = [_suite_worker(job) for job in jobs]
    results.sort(key=lambda r: r["seed"])
    base_columns = results[0]["columns"]
    agg_columns = [f"{col}_{stat}" for stat in AGG_STATS for col in base_columns]
    rows = aggregate_rows([r["rows"] for r in results])
    return SuiteResult(agg_columns, rows, [r["summary"] for r in results])


# -- presets ---------------------------------------------------------------

# Mini calibration: 80 stimuli keep coincidence intervals long relative to a
# 2 h short-term decay (no spurious consolidation), and the higher target
# concentration holds the correlation threshold just under the feedback-driven
# product level so that new pairs keep tagging after others have learned.
_MINI_NET = NetworkParams(n_inputs=80, n_outputs=10)
_MINI_PLAST = PlasticityParams(tau_st_s=7200.0, target_rate=0.008)


def _as_spec(entry) -> ScenarioSpec:
    return entry if isinstance(entry, ScenarioSpec) else scenario_catalog(entry)


def preset_trial(
    preset: str = "mini",
    rule: str = RULE_HTP,
    seed: int = 0,
    scenarios: list[tuple] | None = None,
    snapshot_s: float = 60.0,
    unlearning: bool = False,
) -> TrialConfig:
    """Named parameter presets with their default scenario sequences.

    ``mini`` shrinks the network and the short-term time constant while
    keeping every timescale ratio (reward delay << trace span << short-term
    decay << scenario length); ``full`` is the published scale; the checker
    presets lower the neural gain and slow the short-term decay so that
    exploration continues during exploitation.
    """
    if preset == "mini":
        net, plast = _MINI_NET, _MINI_PLAST
        default = [("MINI1", 7200.0), ("MINI2", 7200.0), ("MINI3", 7200.0), ("MINI1", 7200.0)]
    elif preset == "full":
        net, plast = NetworkParams(), PlasticityParams()
        default = [("S1", 86400.0), ("S2", 86400.0), ("S3", 86400.0), ("S1", 86400.0)]
    elif preset == "checker":
        net = NetworkParams(n_outputs=10, gain=0.1)
        plast = PlasticityParams(tau_st_s=24 * 3600.0)
        default = [("CHECKER_A", 172800.0), ("CHECKER_B", 172800.0)]
    elif preset == "checker_mini":
        net = NetworkParams(n_inputs=80, n_outputs=10, gain=0.1)
        plast = PlasticityParams(tau_st_s=7200.0, target_rate=0.008)
        default = [("CHECKER_MINI_A", 7200.0), ("CHECKER_MINI_B", 7200.0)]
    else:
        raise ValueError(f"unknown preset {preset!r}")
    chosen = scenarios if scenarios is not None else default
    seq = tuple((_as_spec(name), float(duration)) for name, duration in chosen)
    return TrialConfig(
        network=net,
        plasticity=plast,
        rule=rule,
        unlearning=unlearning,
        scenarios=seq,
        seed=seed,
        snapshot_s=snapshot_s,
    )


def stability_trial(preset: str = "mini", rule: str = RULE_HTP, seed: int = 0) -> TrialConfig:
    """Extended single-scenario run used for the long-horizon stability study."""
    if preset == "mini":
        return preset_trial("mini", rule, seed, scenarios=[("MINI1", 24 * 3600.0)])
    if preset == "full":
        return preset_trial("full", rule, seed, scenarios=[("S1", 288 * 3600.0)])
    raise ValueError(f"unknown preset {preset!r}")
