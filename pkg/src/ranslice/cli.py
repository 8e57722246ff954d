"""Command-line entry points: train | evaluate | sweep | oracle.

Exit code 0 on success; any failure prints a one-line error to stderr and
returns a nonzero code.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .allocation import alloc_to_text
from .harness import (
    RunConfig,
    derive_rng,
    evaluate,
    load_config,
    stream_seed,
    sweep,
    train,
)
from .netmodel import generate_topology, sample_channel
from .oracle import exhaustive_solve_joint


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ranslice",
        description="Two-time-scale RB allocation: training, evaluation, sweeps, exact oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to the run config file")
        p.add_argument("--seed", type=int, help="root seed (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")

    p_train = sub.add_parser("train", help="run two-time-scale training")
    common(p_train)

    p_eval = sub.add_parser("evaluate", help="greedy rollout of a trained or fixed policy")
    common(p_eval)
    p_eval.add_argument("--policy", choices=("sama-rl", "1sra", "oracle"),
                        help="policy to evaluate (overrides config)")
    p_eval.add_argument("--checkpoints", help="directory holding <gnb>.bin files")

    p_sweep = sub.add_parser("sweep", help="evaluate across one swept parameter")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         choices=("users", "rbs", "k_max", "r_min_bps", "d_max_s"))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated parameter values")
    p_sweep.add_argument("--policy", default=None,
                         help="comma-separated policies (default: config policy)")

    p_oracle = sub.add_parser("oracle", help="exact joint optimum on one channel draw")
    common(p_oracle)

    return parser


def _config_from(args, policy: str | None = None) -> RunConfig:
    if args.config:
        return load_config(args.config, seed=args.seed, out=args.out, policy=policy)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out"] = args.out
    if policy is not None:
        updates["policy"] = policy
    return replace(RunConfig(), **updates)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cfg = _config_from(args)
            summary = train(cfg)
            print(f"training done: metrics at {summary['metrics']}, "
                  f"checkpoints under {summary['agents_dir']}")
        elif args.command == "evaluate":
            cfg = _config_from(args, policy=args.policy)
            res = evaluate(cfg, checkpoint_dir=args.checkpoints)
            print(f"policy={res['policy']} objective={res['objective_mbps']:.6g} Mbps "
                  f"embb_satisfied={res['embb_satisfied']:.4g} "
                  f"urllc_satisfied={res['urllc_satisfied']:.4g}")
        elif args.command == "sweep":
            policies = args.policy.split(",") if args.policy else None
            cfg = _config_from(args)
            rows = sweep(cfg, args.param, [float(v) for v in args.values.split(",")],
                         policies=policies)
            for r in rows:
                print(f"{r['parameter']}={r['value']:g} policy={r['policy']} "
                      f"objective={r['objective_mbps']:.6g} Mbps")
        elif args.command == "oracle":
            cfg = _config_from(args)
            net = generate_topology(cfg.scenario, stream_seed(cfg.seed, "topology"))
            ch = sample_channel(net, derive_rng(cfg.seed, "oracle"))
            sol = exhaustive_solve_joint(net, ch)
            print(f"joint optimum: {sol.best_value / 1e6:.6g} Mbps "
                  f"(feasible={sol.feasible}, explored={sol.explored})")
            print(f"partition: {sol.best_alloc.assignment.owner}")
            print(alloc_to_text(sol.best_alloc), end="")
        return 0
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
