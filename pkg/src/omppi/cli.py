"""Command-line front end.

    omppi run     --case 1 --rollouts 50 --trials 100 --seed 7 --out results/
    omppi run     --case 3 --trace --seed 0 --out results/
    omppi table   --case 3 --horizon 4,6,8 --rollouts 50,500,1000 --trials 100
    omppi explore --rate 25,50,100 --out results/

Summaries are JSON and contain no timing data, so reruns with the same
arguments produce byte-identical files; wall-clock figures go to a separate
``*.timing.json``.
"""
import argparse
import csv
import json
import sys
from dataclasses import replace
from itertools import product
from pathlib import Path

import numpy as np

from . import kernels
from ._accel import HAVE_NUMBA, set_num_threads
from .config import ConfigError, load_scenario, scenario_to_dict
from .harness import CASE_IDS, case_preset, exploration_area, monte_carlo, run_episode


def _float_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    return vals


def _int_list(text):
    vals = _float_list(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in vals]


def _common(p, scalar_rate=True):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--case", help=f"preset scenario, one of {', '.join(map(str, CASE_IDS))}")
    src.add_argument("--config", help="YAML scenario file")
    p.add_argument("--controller", choices=("mppi", "omppi"))
    p.add_argument("--seed", type=int)
    if scalar_rate:
        p.add_argument("--rate", type=float, help="control rate in Hz (sets dt = 1/rate)")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--threads", type=int, help="cap on numba worker threads")
    p.add_argument("--backend", choices=kernels.BACKENDS, help="rollout kernel backend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omppi", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo success rate, or one traced episode")
    _common(run)
    run.add_argument("--rollouts", type=int)
    run.add_argument("--horizon", type=float, help="prediction horizon in s")
    run.add_argument("--trials", type=int, default=100)
    run.add_argument("--trace", action="store_true", help="run one episode and write its trace CSV")
    run.add_argument("--workers", type=int, default=1, help="episodes run in parallel processes")
    run.add_argument("--stop-on-failure", action="store_true", help="end an episode at its first violation")

    table = sub.add_parser("table", help="success-rate sweep over horizons x rollout counts")
    _common(table)
    table.add_argument("--rollouts", type=_int_list, required=True, help="e.g. 50,500,1000")
    table.add_argument("--horizon", type=_float_list, required=True, help="e.g. 2,4,6,8")
    table.add_argument("--trials", type=int, default=100)
    table.add_argument("--workers", type=int, default=1)
    table.add_argument("--stop-on-failure", action="store_true")

    explore = sub.add_parser("explore", help="exploration area of open-loop MPPI rollouts per control rate")
    _common(explore, scalar_rate=False)
    explore.add_argument("--rate", type=_float_list, default=[25.0, 50.0, 100.0], dest="rates",
                         help="comma-separated control rates in Hz")
    explore.add_argument("--rollouts", type=int, default=2000)
    explore.add_argument("--horizon", type=float, default=2.0)
    explore.add_argument("--dump-grid", action="store_true", help="write occupied cells per rate")
    return parser


def resolve_scenario(args):
    """Preset or file, then flag overrides."""
    if getattr(args, "config", None):
        cfg = load_scenario(args.config)
    else:
        try:
            cfg = case_preset(args.case or 1, args.controller)
        except ValueError as exc:
            raise ConfigError(f"--case: {exc}") from None
    try:
        if args.controller and args.controller != cfg.controller:
            defaults = case_preset(1 if args.controller == "omppi" else 3)
            cfg = replace(cfg, controller=args.controller, mppi=replace(defaults.mppi, rollouts=cfg.mppi.rollouts,
                                                                       horizon=cfg.mppi.horizon))
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if getattr(args, "rate", None) is not None:
            if not args.rate > 0:
                raise ConfigError(f"--rate: must be > 0 Hz, got {args.rate}")
            cfg = replace(cfg, model=replace(cfg.model, dynamics=replace(cfg.model.dynamics, dt=1.0 / args.rate)))
        if isinstance(getattr(args, "rollouts", None), int):
            cfg = replace(cfg, mppi=replace(cfg.mppi, rollouts=args.rollouts))
        if isinstance(getattr(args, "horizon", None), float):
            cfg = replace(cfg, mppi=replace(cfg.mppi, horizon=args.horizon))
        if getattr(args, "stop_on_failure", False):
            cfg = replace(cfg, stop_on_failure=True)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"override: {exc}") from None
    return cfg


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def report_dict(report, cfg) -> dict:
    return {
        "trials": report.trials,
        "successes": report.successes,
        "rate_percent": report.rate,
        "failure_counts": report.failure_counts,
        "outcomes": report.outcomes,
        "config": scenario_to_dict(cfg),
    }


def timing_dict(report) -> dict:
    return {
        "wall_time_total_s": report.wall_time_total,
        "wall_time_mean_s": report.wall_time_mean,
        "wall_time_max_s": report.wall_time_max,
        "backend": kernels.backend(),
    }


TRACE_HEADER = ["t", "x", "y", "theta", "v", "omega", "v_des", "omega_des", "step_cost"]


def write_trace(path: Path, result) -> None:
    n_obs = len(result.trace[0].obstacle_poses) if result.trace else 0
    header = list(TRACE_HEADER)
    for i in range(n_obs):
        header += [f"obs{i}_x", f"obs{i}_y", f"obs{i}_theta"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in result.trace:
            s = r.state
            row = [r.t, s.x, s.y, s.theta, s.v, s.omega, r.applied[0], r.applied[1], r.cost]
            for pose in r.obstacle_poses:
                row += list(pose)
            w.writerow([repr(float(v)) for v in row])


def cmd_run(args) -> int:
    cfg = resolve_scenario(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.trace:
        res = run_episode(cfg)
        write_trace(out / "trace.csv", res)
        summary = {
            "seed": cfg.seed,
            "success": res.success,
            "failure_reason": res.failure_reason.value if res.failure_reason else None,
            "steps": res.n_steps,
            "final_bot_progress": list(res.final_bot_progress),
            "final_obstacle_progress": list(res.final_obstacle_progress),
            "config": scenario_to_dict(cfg),
        }
        _write_json(out / "episode.json", summary)
        print(f"seed {cfg.seed}: {'success' if res.success else 'failure'}"
              f"{'' if res.success else ' (' + res.failure_reason.value + ')'}; trace -> {out / 'trace.csv'}")
        return 0
    if args.trials < 1:
        raise ConfigError(f"--trials: must be >= 1, got {args.trials}")
    report = monte_carlo(cfg, args.trials, cfg.seed, workers=args.workers)
    _write_json(out / "summary.json", report_dict(report, cfg))
    _write_json(out / "summary.timing.json", timing_dict(report))
    print(f"{cfg.name or cfg.controller}: T={cfg.mppi.horizon} M={cfg.mppi.rollouts} "
          f"success {report.successes}/{report.trials} = {report.rate:.1f}%")
    return 0


def cmd_table(args) -> int:
    if not args.rollouts or not args.horizon:
        raise ConfigError("--rollouts/--horizon: sweep lists must be non-empty")
    if any(m < 1 for m in args.rollouts):
        raise ConfigError(f"--rollouts: every entry must be >= 1, got {args.rollouts}")
    if any(not t > 0 for t in args.horizon):
        raise ConfigError(f"--horizon: every entry must be > 0, got {args.horizon}")
    if args.trials < 1:
        raise ConfigError(f"--trials: must be >= 1, got {args.trials}")
    base = resolve_scenario(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, timing = [], []
    for horizon, rollouts in product(args.horizon, args.rollouts):
        cfg = replace(base, mppi=replace(base.mppi, horizon=horizon, rollouts=rollouts))
        report = monte_carlo(cfg, args.trials, base.seed, workers=args.workers)
        rows.append({
            "horizon": horizon,
            "rollouts": rollouts,
            "trials": report.trials,
            "successes": report.successes,
            "rate_percent": report.rate,
            "failure_counts": report.failure_counts,
        })
        timing.append({"horizon": horizon, "rollouts": rollouts, **timing_dict(report)})
        print(f"T={horizon:g} M={rollouts}: {report.rate:.1f}%", flush=True)
    _write_json(out / "table.json", {"rows": rows, "config": scenario_to_dict(base)})
    _write_json(out / "table.timing.json", timing)
    with open(out / "table.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["T", "M", "trials", "successes", "rate_percent"])
        for r in rows:
            w.writerow([r["horizon"], r["rollouts"], r["trials"], r["successes"], r["rate_percent"]])
    return 0


def cmd_explore(args) -> int:
    if not args.rates:
        raise ConfigError("--rate: list must be non-empty")
    if any(not r > 0 for r in args.rates):
        raise ConfigError(f"--rate: every rate must be > 0 Hz, got {args.rates}")
    if args.rollouts < 1 or not args.horizon > 0:
        raise ConfigError("--rollouts must be >= 1 and --horizon > 0")
    cfg = resolve_scenario(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    areas, grids = exploration_area(
        cfg.bot, cfg.mppi, args.rates, seed=cfg.seed, model=cfg.model,
        horizon=args.horizon, rollouts=args.rollouts, return_cells=True,
    )
    _write_json(out / "explore.json", {
        "horizon": args.horizon,
        "rollouts": args.rollouts,
        "seed": cfg.seed,
        "areas_cm2": [{"rate_hz": r, "area_cm2": a} for r, a in areas.items()],
        "config": scenario_to_dict(cfg),
    })
    if args.dump_grid:
        for rate, cells in grids.items():
            np.savetxt(out / f"grid_{rate:g}hz.csv", cells, fmt="%d", delimiter=",", header="ix,iy", comments="")
    for r, a in areas.items():
        print(f"{r:g} Hz: {a:.0f} cm^2")
    return 0


COMMANDS = {"run": cmd_run, "table": cmd_table, "explore": cmd_explore}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.backend:
        kernels.set_backend(args.backend)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        if HAVE_NUMBA:
            from numba import config as _nb_config

            set_num_threads(min(args.threads, _nb_config.NUMBA_NUM_THREADS))
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
