"""Command-line harness: oracles, learners, schedulers, and experiment presets."""

from __future__ import annotations

import argparse
import sys

from .core import Environment, substream
from .harness import (
    ExperimentConfig,
    load_instance,
    preset_fig2,
    preset_fig3,
    run_experiment,
)
from .low_switch import run_pi_low
from .oracle import PmspInstance, optimal_average, pmsp_feasible, pmsp_threshold, pmsp_to_bandit
from .policies import ghost_summary
from .ranker import calibrated_sampler, rank_arms


def _add_instance_arg(p):
    p.add_argument("--instance", required=True, help="path to a JSON instance file")


def _cmd_oracle(args) -> int:
    instance = load_instance(args.instance)
    rho, cycle = optimal_average(instance, cap=args.cap)
    print(f"optimal_average: {float(rho)!r}")
    print(f"cycle_length: {len(cycle)}")
    print("arms: " + " ".join(str(a) for a in cycle.arms))
    print("states: " + " ".join("/".join(map(str, s)) for s in cycle.states))
    return 0


def _cmd_ghost(args) -> int:
    instance = load_instance(args.instance)
    summary = ghost_summary(instance)
    for m, g in enumerate(summary.g_values, start=1):
        print(f"g({m}) = {float(g)!r}")
    print(f"r_star = {summary.r_star}")
    print(f"r_zero = {summary.r_zero}")
    return 0


def _cmd_rank(args) -> int:
    instance = load_instance(args.instance)
    d0 = args.d0 if args.d0 is not None else max(instance.ds) + 1
    env = Environment(instance, substream(args.seed, "rank"), capacity=4096)
    outcome = rank_arms(calibrated_sampler(env, d0), instance.k, args.delta,
                        pull_cap=args.pull_cap)
    print(f"permutation: {' '.join(map(str, outcome.permutation))}")
    print(f"rounds: {outcome.rounds}")
    print(f"pulls: {outcome.pulls}")
    print(f"complete: {outcome.complete}")
    for arm in range(instance.k):
        print(f"arm {arm}: eliminated_round={outcome.elimination_round[arm]}")
    return 0 if outcome.complete else 1


def _cmd_learn(args) -> int:
    instance = load_instance(args.instance)
    run = run_pi_low(instance, args.horizon, args.delta, seed=args.seed)
    sched = run.schedule
    print(f"stages: {sched.num_stages}")
    print("T_s: " + " ".join(map(str, sched.sizes)))
    print("C_s: " + " ".join(repr(c) for c in sched.radii))
    for rec in run.stages:
        est = " ".join(f"{m}:{rec.estimates[m]:.4f}" for m in sorted(rec.estimates))
        print(f"stage {rec.stage}: active={list(rec.active)} best={rec.best} "
              f"eliminated={list(rec.eliminated)} estimates[{est}]")
    print(f"survivors: {list(run.survivors)}")
    print(f"switches: {run.total_switches}")
    print(f"tail_pulls: {run.tail_pulls}")
    return 0


def _cmd_pmsp(args) -> int:
    intervals = tuple(int(v) for v in args.intervals.split(","))
    pmsp = PmspInstance(intervals)
    verdict = pmsp_feasible(pmsp, cap=args.cap)
    threshold = pmsp_threshold(pmsp)
    print(f"feasible: {verdict.feasible}")
    print(f"period: {verdict.period}")
    if verdict.feasible:
        print("offsets: " + " ".join(map(str, verdict.offsets)))
        print("schedule: " + " ".join(map(str, verdict.slots)))
    print(f"threshold: {threshold} ({float(threshold)!r})")
    if args.check_reduction:
        instance = pmsp_to_bandit(pmsp)
        rho, _ = optimal_average(instance)
        print(f"reduced_optimal_average: {float(rho)!r}")
        print(f"meets_threshold: {rho >= threshold}")
    return 0


def _cmd_experiment(args) -> int:
    if args.preset:
        base = {
            "fig2": lambda: preset_fig2(),
            "fig3-cost": lambda: preset_fig3(cost=True),
            "fig3-free": lambda: preset_fig3(cost=False),
        }[args.preset]()
        instance = base.instance
        algorithms = base.algorithms
        horizon = args.horizon or base.horizon
        delta = args.delta if args.delta is not None else base.delta
        cost = args.switch_cost if args.switch_cost is not None else base.switch_cost
        seeds = _parse_seeds(args.seeds) or base.seeds
        label = base.label
    else:
        if not args.instance:
            print("either --preset or --instance is required", file=sys.stderr)
            return 2
        instance = {"file": args.instance}
        algorithms = tuple(args.algos.split(","))
        horizon = args.horizon or 10_000
        delta = args.delta if args.delta is not None else 0.1
        cost = args.switch_cost if args.switch_cost is not None else 0.0
        seeds = _parse_seeds(args.seeds) or (0,)
        label = "custom"
    config = ExperimentConfig(
        instance=instance,
        algorithms=algorithms,
        horizon=horizon,
        delta=delta,
        switch_cost=cost,
        seeds=seeds,
        outdir=args.out,
        full_curves=args.full_curves,
        label=label,
    )
    result = run_experiment(config)
    for algo in config.algorithms:
        print(f"mean_final_regret[{algo}] = {result.mean_final_regret[algo]!r}")
    if args.out:
        print(f"wrote {len(result.files)} files to {args.out}")
    return 0


def _parse_seeds(text):
    if not text:
        return None
    return tuple(int(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delaybandit",
        description="Delay-dependent bandit laboratory: oracles, learners, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="optimal long-run average and witness cycle")
    _add_instance_arg(p)
    p.add_argument("--cap", type=int, default=10**6, help="state-space size cap")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("ghost", help="ranking-policy values g(m), r_star, r_zero")
    _add_instance_arg(p)
    p.set_defaults(func=_cmd_ghost)

    p = sub.add_parser("rank", help="learn the arm ordering on the environment")
    _add_instance_arg(p)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--d0", type=int, default=None, help="delay upper bound (> max d_i)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pull-cap", type=int, default=10**7)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("learn", help="run the low-switch learner")
    _add_instance_arg(p)
    p.add_argument("-T", "--horizon", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("pmsp", help="periodic maintenance feasibility and reduction")
    p.add_argument("--intervals", required=True, help="comma-separated service intervals")
    p.add_argument("--cap", type=int, default=10**4)
    p.add_argument("--check-reduction", action="store_true",
                   help="also solve the reduced bandit instance")
    p.set_defaults(func=_cmd_pmsp)

    p = sub.add_parser("experiment", help="run a preset or custom experiment")
    p.add_argument("--preset", choices=["fig2", "fig3-cost", "fig3-free"])
    p.add_argument("--instance", help="custom instance file (with --algos)")
    p.add_argument("--algos", default="low,ucb")
    p.add_argument("-T", "--horizon", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--switch-cost", type=float, default=None)
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--out", help="output directory for CSV + metadata")
    p.add_argument("--full-curves", action="store_true",
                   help="write full-resolution curves instead of 2000 points")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
