"""Command-line surface.

Subcommands: run, suite, drift, checker, stability, unlearn, validate-config.
Usage errors exit 2 (argparse); configuration errors exit 1 with the offending
key on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import io as io_mod
from .config import ConfigError, RunSetup, config_hash, load_config_file, resolve_config, setup_to_dict
from .engine import Simulation
from .experiments import (
    DRIFT_COLUMNS,
    DriftConfig,
    run_drift,
    run_suite,
    run_trial,
    run_unlearning_demo,
    stability_trial,
    weight_summary,
)
from .network import effective_weights


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON config file")
    p.add_argument("--seed", type=int, help="base random seed")
    p.add_argument("--rule", choices=["rchp", "htp"], help="plasticity rule")
    p.add_argument("--trials", type=int, help="number of independent trials (suite)")
    p.add_argument("--out", metavar="DIR", help="output directory (default: out)")
    p.add_argument("--preset", choices=["full", "mini"], default="mini", help="parameter scale")
    p.add_argument("--parallel", type=int, default=1, help="worker processes for suites")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="htpsim",
        description="Simulator of reward-modulated plasticity with delayed rewards.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in [
        ("run", "run one trial of the configured scenario sequence"),
        ("suite", "run several seeds and aggregate the metric series"),
        ("drift", "scalar weight-drift study (three stochastic update phases)"),
        ("checker", "checkerboard reward-pattern run"),
        ("stability", "extended single-scenario stability run"),
        ("unlearn", "scripted three-phase unlearning demo"),
        ("validate-config", "print the fully resolved parameter set"),
    ]:
        p = sub.add_parser(name, help=descr)
        _add_common(p)
    return parser


def _setup(args, preset_override: str | None = None) -> RunSetup:
    file_cfg = load_config_file(args.config) if args.config else None
    preset = preset_override or args.preset
    return resolve_config(
        file_cfg,
        preset=preset,
        overrides={
            "seed": args.seed,
            "rule": args.rule,
            "trials": args.trials,
            "out": args.out,
            "parallel": args.parallel,
        },
    )


def _outdir(setup: RunSetup) -> Path:
    out = Path(setup.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_trial_outputs(out: Path, setup: RunSetup, result) -> None:
    io_mod.write_csv(out / "metrics.csv", result.series.columns, result.series.rows)
    ev = result.sim.events
    io_mod.write_csv(
        out / "events.csv",
        ["t_s", "amplitude", "stimulus", "action", "origin_t_s"],
        zip(ev.times, ev.amplitudes, ev.stimuli, ev.actions, ev.origin_times),
    )
    summary = {
        "config": setup_to_dict(setup),
        "config_hash": config_hash(setup),
        "rewards_total": len(ev),
        "final": weight_summary(result.sim.wm, result.rewarded_union),
    }
    io_mod.write_summary_json(out / "summary.json", summary)
    io_mod.write_pgm(effective_weights(result.sim.wm), out / "weights_total.pgm", 0.0, 1.0)
    io_mod.write_pgm(result.sim.wm.w_lt, out / "weights_long.pgm", 0.0, 1.0)
    io_mod.write_pgm(result.sim.wm.w_st, out / "weights_short.pgm", -1.0, 1.0)
    io_mod.save_snapshot(out / "state.npz", result.sim, config_hash(setup))


def cmd_run(args) -> int:
    setup = _setup(args)
    out = _outdir(setup)
    result = run_trial(setup.trial)
    _write_trial_outputs(out, setup, result)
    print(f"wrote {out}/metrics.csv ({len(result.series)} snapshots, {len(result.sim.events)} rewards)")
    return 0


def cmd_suite(args) -> int:
    setup = _setup(args)
    out = _outdir(setup)
    suite = run_suite(setup.trial, setup.trials, setup.trial.seed, parallel=setup.parallel)
    io_mod.write_csv(out / "aggregate.csv", suite.columns, suite.rows)
    io_mod.write_summary_json(
        out / "suite_summary.json",
        {
            "config": setup_to_dict(setup),
            "config_hash": config_hash(setup),
            "trials": [s for s in suite.summaries],
        },
    )
    print(f"wrote {out}/aggregate.csv over {setup.trials} trials")
    return 0


def cmd_drift(args) -> int:
    setup = _setup(args)
    out = _outdir(setup)
    series = run_drift(DriftConfig(seed=setup.trial.seed))
    io_mod.write_csv(out / "drift.csv", DRIFT_COLUMNS, series.rows)
    print(f"wrote {out}/drift.csv ({len(series)} episodes)")
    return 0


def cmd_unlearn(args) -> int:
    setup = _setup(args)
    out = _outdir(setup)
    series = run_unlearning_demo(seed=setup.trial.seed)
    io_mod.write_csv(out / "unlearning.csv", DRIFT_COLUMNS, series.rows)
    print(f"wrote {out}/unlearning.csv ({len(series)} episodes)")
    return 0


def cmd_checker(args) -> int:
    file_cfg = load_config_file(args.config) if args.config else None
    preset = "checker" if args.preset == "full" else "checker_mini"
    setup = resolve_config(
        file_cfg,
        preset=preset,
        overrides={
            "seed": args.seed,
            "rule": args.rule,
            "trials": args.trials,
            "out": args.out,
            "parallel": args.parallel,
        },
    )
    out = _outdir(setup)
    result = run_trial(setup.trial)
    _write_trial_outputs(out, setup, result)
    print(f"wrote {out}/metrics.csv ({len(result.series)} snapshots)")
    return 0


def cmd_stability(args) -> int:
    file_cfg = load_config_file(args.config) if args.config else None
    setup = resolve_config(
        file_cfg,
        preset=args.preset,
        overrides={
            "seed": args.seed,
            "rule": args.rule,
            "trials": args.trials,
            "out": args.out,
            "parallel": args.parallel,
        },
    )
    if not file_cfg or "scenarios" not in file_cfg:
        base = stability_trial(args.preset, setup.trial.rule, setup.trial.seed)
        setup = RunSetup(
            trial=replace(setup.trial, scenarios=base.scenarios),
            trials=setup.trials,
            out_dir=setup.out_dir,
            parallel=setup.parallel,
        )
    out = _outdir(setup)
    result = run_trial(setup.trial)
    _write_trial_outputs(out, setup, result)
    print(f"wrote {out}/metrics.csv ({len(result.series)} snapshots)")
    return 0


def cmd_validate_config(args) -> int:
    setup = _setup(args)
    print(json.dumps(setup_to_dict(setup), indent=2, sort_keys=True))
    return 0


_COMMANDS = {
    "run": cmd_run,
    "suite": cmd_suite,
    "drift": cmd_drift,
    "checker": cmd_checker,
    "stability": cmd_stability,
    "unlearn": cmd_unlearn,
    "validate-config": cmd_validate_config,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
