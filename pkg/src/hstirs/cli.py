"""Command-line front end.

    hstirs train   --episodes 2000 --seed 0 --out-dir run/
    hstirs eval    --agent run/agent.sacv1 --out-dir run/
    hstirs bench   --agent run/agent.sacv1 --methods OU_OI,SU_OI,FIXED_ALT(200)
    hstirs scaling --counts 25,49,100 --timing
    hstirs report  --out-dir run/

Every verb writes CSV files into ``--out-dir``. Without ``--timing`` the
wall-clock columns are left empty so repeated runs give identical bytes.
"""
from __future__ import annotations

import argparse
import glob
import logging
import os
import sys

from . import bench
from .config import ScenarioConfig, load_scenario
from .env import run_algorithm1, write_trace
from .exceptions import ConfigError, DomainError, TrainingDivergenceError
from .sac import SacConfig, load_agent, save_agent, train, write_curves

DEFAULT_METHODS = "OU_OI,OU_SI,OU_RI,SU_OI"
EXIT_USAGE = 2


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--scenario", help="scenario JSON (default: built-in scenario)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--agent", help="SACV1 checkpoint")
    p.add_argument("--episodes", type=int, default=2000)
    p.add_argument("--methods", default=DEFAULT_METHODS, help="comma-separated method list")
    p.add_argument("--timing", action="store_true", help="record wall-clock solve times")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="hstirs", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    sub.add_parser("train", parents=[common], help="train a SAC trajectory agent")
    sub.add_parser("eval", parents=[common], help="trace one OU_OI rollout of an agent")

    p = sub.add_parser("bench", parents=[common], help="run methods over seeds")
    p.add_argument("--n-seeds", type=int, default=10, help="seeds SEED .. SEED+N-1")

    p = sub.add_parser("scaling", parents=[common], help="exact-solver effort versus panel size")
    p.add_argument("--counts", default="25,49,100")
    p.add_argument("--n-seeds", type=int, default=5)
    p.add_argument("--node-limit", type=int, default=bench.asg.DEFAULT_NODE_LIMIT)

    p = sub.add_parser("report", parents=[common], help="summarise bench records")
    p.add_argument("--records", nargs="*", help="records CSV files (default: OUT_DIR/records_*.csv)")
    return parser


def _scenario(args) -> ScenarioConfig:
    return load_scenario(args.scenario) if args.scenario else ScenarioConfig()


def _methods(args) -> list:
    return [bench.MethodVariant.parse(m) for m in _split_methods(args.methods)]


def _split_methods(text: str) -> list:
    # commas inside FIXED_ALT(...) never occur, so a plain split is enough
    return [m for m in (s.strip() for s in text.split(",")) if m]


def cmd_train(args) -> int:
    cfg = _scenario(args)
    result = train(cfg, SacConfig(), episodes=args.episodes, seed=args.seed,
                   progress_every=100 if args.verbose else 0)
    save_agent(result.best_agent, os.path.join(args.out_dir, "agent.sacv1"), cfg.n_trains)
    save_agent(result.agent, os.path.join(args.out_dir, "agent_final.sacv1"), cfg.n_trains)
    write_curves(result.curves, os.path.join(args.out_dir, "curves.csv"))
    returns = result.returns()
    tenth = max(1, len(returns) // 10)
    print(f"episodes {len(returns)}  steps {result.steps}  "
          f"first-decile return {returns[:tenth].mean():.4f}  last-decile return {returns[-tenth:].mean():.4f}")
    return 0


def _load(args, cfg):
    if not args.agent:
        raise bench.UsageError("this verb needs --agent")
    agent, header = load_agent(args.agent)
    if header["n_trains"] != cfg.n_trains:
        raise bench.UsageError(f"agent was trained for {header['n_trains']} trains, scenario has {cfg.n_trains}")
    return agent


def cmd_eval(args) -> int:
    cfg = _scenario(args)
    agent = _load(args, cfg)
    result = run_algorithm1(agent.policy(deterministic=True), cfg, seed=args.seed)
    write_trace(result.records, os.path.join(args.out_dir, "trace.csv"))
    slots = result.slot_records()
    mean = sum(r["min_rate"] for r in slots) / len(slots)
    print(f"slots {len(slots)}  mean min-rate {mean:.3f} bit/s")
    return 0


def cmd_bench(args) -> int:
    cfg = _scenario(args)
    methods = _methods(args)
    if args.n_seeds < 1:
        raise bench.UsageError("--n-seeds must be at least 1")
    agent = _load(args, cfg) if any(m.needs_agent for m in methods) else None
    seeds = range(args.seed, args.seed + args.n_seeds)
    for method in methods:
        records = [r for s in seeds for r in bench.run_method(method, cfg, agent, s, timing=args.timing)]
        bench.write_records(records, os.path.join(args.out_dir, f"records_{bench.method_tag(method)}.csv"))
        print(f"{method}: mean min-rate {bench.mean_min_rate(records):.3f} bit/s over {len(seeds)} seeds")
    return 0


def cmd_scaling(args) -> int:
    cfg = _scenario(args)
    try:
        counts = [int(c) for c in args.counts.split(",") if c.strip()]
    except ValueError:
        raise bench.UsageError(f"--counts must be integers, got {args.counts!r}") from None
    seeds = range(args.seed, args.seed + args.n_seeds)
    rows = bench.solver_scaling_study(cfg, counts, seeds, node_limit=args.node_limit, timing=args.timing)
    bench.write_scaling(rows, os.path.join(args.out_dir, "scaling.csv"))
    for row in rows:
        ms = "" if row["mean_solve_ms"] is None else f"  {row['mean_solve_ms']:.3f} ms"
        print(f"N={row['n_reflectors']}  Z={row['mean_z']:.6g}  nodes={row['mean_nodes']:.0f}{ms}")
    return 0


def cmd_report(args) -> int:
    paths = args.records or sorted(glob.glob(os.path.join(args.out_dir, "records_*.csv")))
    if not paths:
        raise bench.UsageError("no records files found")
    records = [r for p in paths for r in bench.read_records(p)]
    grouped = bench.group_by_method(records)
    if args.methods != DEFAULT_METHODS:
        wanted = [str(m) for m in _methods(args)]
        missing = [m for m in wanted if m not in grouped]
        if missing:
            raise bench.UsageError(f"no records for {missing}")
        grouped = {m: grouped[m] for m in wanted}
    rows, _ = bench.compare_report(grouped, out_dir=args.out_dir)
    for row in rows:
        gain = "" if row["ou_oi_gain_pct"] is None else f"  OU_OI gain {row['ou_oi_gain_pct']:+.2f}%"
        print(f"{row['method']}: mean {row['mean_min_rate']:.3f}  min {row['min_min_rate']:.3f}  "
              f"max {row['max_min_rate']:.3f}{gain}")
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "bench": cmd_bench, "scaling": cmd_scaling, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        return COMMANDS[args.verb](args)
    except bench.UsageError as exc:
        print(f"hstirs {args.verb}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DomainError, TrainingDivergenceError, OSError) as exc:
        print(f"hstirs {args.verb}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
