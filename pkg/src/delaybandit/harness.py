"""Experiment presets, regret-vs-reference accounting, instance I/O, CSV output.

Regret is charged on the expectation channel (learners still consume realized
rewards): regret(t) = ghost_cum(t) - (alg_cum_expected(t) - cost * switches(t)).
The reference is the best ranking policy rolled out deterministically.

Instance files are JSON with fields k, mu, d, discount {kind, gamma|c|values}
and an optional label; rational values may be written as "p/q" strings and
stay exact through a round trip.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import __version__
from .core import BanditInstance, Discount, Environment, expected_payoff, make_instance, substream
from .low_switch import run_pi_low, stage_schedule
from .policies import GreedyPolicy, PolicyTrace, ghost_summary, rollout
from .ucb import run_ucb_rankings

__all__ = [
    "ExperimentConfig",
    "RegretCurve",
    "dump_instance",
    "ghost_reference",
    "instance_hash",
    "load_instance",
    "materialize_instance",
    "preset_fig2",
    "preset_fig3",
    "regret_vs_ghost",
    "run_algorithm",
    "run_experiment",
]

ALGORITHMS = ("low", "ucb", "greedy", "ghost")

CSV_HEADER = ["t", "algo", "seed", "cum_expected", "cum_realized", "switches", "regret"]
AGG_HEADER = ["t", "algo", "mean_regret", "std_regret", "n_runs"]

MAX_CURVE_POINTS = 2000


# -- instance (de)serialization ---------------------------------------------


def _num_to_json(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return x


def _num_from_json(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def dump_instance(instance: BanditInstance, label: str = "") -> dict:
    doc = {
        "k": instance.k,
        "mu": [_num_to_json(m) for m in instance.mus],
        "d": list(instance.ds),
        "discount": {key: ([_num_to_json(v) for v in val] if isinstance(val, list) else _num_to_json(val))
                     for key, val in instance.discount.params().items()},
    }
    if label:
        doc["label"] = label
    return doc


def _discount_from_doc(doc: dict) -> Discount:
    kind = doc.get("kind")
    if kind == "geometric":
        return Discount.geometric(_num_from_json(doc["gamma"]))
    if kind == "constant":
        return Discount.constant(_num_from_json(doc["c"]))
    if kind == "table":
        return Discount.table([_num_from_json(v) for v in doc["values"]])
    raise ValueError(f"unknown discount kind {kind!r}")


def load_instance(source) -> BanditInstance:
    """Build an instance from a JSON file path or an already-parsed dict."""
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            doc = json.load(fh)
    else:
        doc = dict(source)
    mus = [_num_from_json(v) for v in doc["mu"]]
    ds = [int(v) for v in doc["d"]]
    if "k" in doc and int(doc["k"]) != len(mus):
        raise ValueError("field k disagrees with mu length")
    return make_instance(mus, ds, _discount_from_doc(doc["discount"]))


def instance_hash(instance: BanditInstance) -> str:
    blob = json.dumps(dump_instance(instance), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: instance spec, algorithms, horizon, cost, seeds.

    `instance` is an inline instance document, optionally with a per-seed
    delay draw ("d": {"draw": [lo, hi]}), or {"file": path}.
    """

    instance: dict
    algorithms: tuple
    horizon: int
    delta: float
    switch_cost: float
    seeds: tuple
    outdir: str | None = None
    full_curves: bool = False
    label: str = ""

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.switch_cost < 0:
            raise ValueError("switch cost must be >= 0")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")


def materialize_instance(spec: dict, seed: int) -> BanditInstance:
    """Resolve an instance document; per-seed delay draws use the seed's substream."""
    if "file" in spec:
        return load_instance(spec["file"])
    doc = dict(spec)
    d = doc.get("d")
    if isinstance(d, dict):
        lo, hi = int(d["draw"][0]), int(d["draw"][1])
        rng = substream(seed, "delays")
        doc["d"] = [int(v) for v in rng.integers(lo, hi + 1, size=len(doc["mu"]))]
    return load_instance(doc)


# -- reference and regret ----------------------------------------------------


def ghost_reference(instance: BanditInstance, T: int) -> np.ndarray:
    """Cumulative expected reward of the best ranking policy over T pulls.

    Deterministic: the first cycle from the all-zero state pays the raw
    baselines, after that every pull sits on the steady cycle.
    """
    if T < 0:
        raise ValueError("horizon must be >= 0")
    if T == 0:
        return np.zeros(0)
    r = ghost_summary(instance).r_star
    first = [float(instance.arms[j].mu) for j in range(r)]
    steady = [float(expected_payoff(instance, j, r if r <= instance.arms[j].d else 0))
              for j in range(r)]
    reps = T // r + 2
    series = np.array(first + list(np.tile(steady, reps)))[:T]
    return np.cumsum(series)


@dataclass
class RegretCurve:
    """Per-time-step regret with its ingredients, possibly downsampled."""

    t: np.ndarray
    cum_expected: np.ndarray
    cum_realized: np.ndarray
    cum_switches: np.ndarray
    regret: np.ndarray


def _downsample_grid(T: int, full: bool) -> np.ndarray:
    if full or T <= MAX_CURVE_POINTS:
        return np.arange(1, T + 1)
    return np.unique(np.linspace(1, T, MAX_CURVE_POINTS).round().astype(np.int64))


def regret_vs_ghost(trace: PolicyTrace, instance: BanditInstance, switch_cost: float,
                    ts=None, ghost_cum=None) -> RegretCurve:
    """Expectation-channel regret against the ghost rollout, pointwise in t."""
    T = len(trace)
    if ghost_cum is None:
        ghost_cum = ghost_reference(instance, T)
    if len(ghost_cum) != T:
        raise ValueError("ghost reference and trace lengths differ")
    if ts is None:
        ts = np.arange(1, T + 1)
    ts = np.asarray(ts, np.int64)
    idx = ts - 1
    ce = trace.cum_expected[idx]
    cr = trace.cum_realized[idx]
    cs = trace.cum_switches[idx]
    regret = ghost_cum[idx] - (ce - switch_cost * cs)
    return RegretCurve(ts, ce, cr, cs, regret)


# -- presets -----------------------------------------------------------------


def preset_fig2(**overrides) -> ExperimentConfig:
    """Seven arms with spread baselines, near-total geometric discount, random delays.

    Delays are redrawn per seed from {1..6} (same draw for every algorithm of
    a seed), a unit cost is charged per policy switch.
    """
    spec = {
        "label": "fig2",
        "k": 7,
        "mu": ["1", "14/15", "13/15", "4/5", "2/3", "1/3", "0"],
        "d": {"draw": [1, 6]},
        "discount": {"kind": "geometric", "gamma": "999/1000"},
    }
    cfg = ExperimentConfig(
        instance=spec,
        algorithms=("low", "ucb"),
        horizon=200_000,
        delta=0.1,
        switch_cost=1.0,
        seeds=tuple(range(5)),
        label="fig2",
    )
    return replace(cfg, **overrides) if overrides else cfg


def preset_fig3(cost: bool = True, **overrides) -> ExperimentConfig:
    """Two arms tuned so both ranking policies are exactly optimal.

    mu_2 solves (1 - f(1)) mu_1 = (1 - f(2)) (mu_1 + mu_2) / 2 with f = (0.3,
    0.25) and d = (2, 2), giving mu_2 = 13/15 and g(1) = g(2) = 0.7. The flag
    picks unit or free switching.
    """
    spec = {
        "label": "fig3",
        "k": 2,
        "mu": ["1", "13/15"],
        "d": [2, 2],
        "discount": {"kind": "table", "values": ["3/10", "1/4"]},
    }
    cfg = ExperimentConfig(
        instance=spec,
        algorithms=("low", "ucb"),
        horizon=200_000,
        delta=0.1,
        switch_cost=1.0 if cost else 0.0,
        seeds=tuple(range(10)),
        label="fig3-cost" if cost else "fig3-free",
    )
    return replace(cfg, **overrides) if overrides else cfg


# -- execution ---------------------------------------------------------------


def run_algorithm(name: str, instance: BanditInstance, T: int, delta: float, seed: int):
    """Run one cell; returns (trace, info dict for metadata)."""
    if name == "low":
        run = run_pi_low(instance, T, delta, seed=seed, rng=substream(seed, "env"))
        info = {
            "switches": run.total_switches,
            "survivors": list(run.survivors),
            "tail_pulls": run.tail_pulls,
            "stages": [rec.to_dict() for rec in run.stages],
        }
        return run.trace, info
    if name == "ucb":
        run = run_ucb_rankings(instance, T, seed=seed, rng=substream(seed, "env"))
        info = {"switches": run.total_switches, "selections": run.selections}
        return run.trace, info
    if name == "greedy":
        trace = rollout(instance, GreedyPolicy(instance), T, substream(seed, "env"))
        return trace, {}
    if name == "ghost":
        r = ghost_summary(instance).r_star
        env = Environment(instance, substream(seed, "env"), capacity=T)
        env.pull_cycles(tuple(range(r)), T, policy=r, retain_from=0)
        return PolicyTrace.from_env(env), {}
    raise ValueError(f"unknown algorithm {name!r}")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


@dataclass
class ExperimentResult:
    """In-memory mirror of what run_experiment wrote to disk."""

    config: ExperimentConfig
    curves: dict            # (algo, seed) -> RegretCurve
    final_regret: dict      # (algo, seed) -> float
    mean_final_regret: dict  # algo -> float
    files: list = field(default_factory=list)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every (algorithm, seed) cell, write per-run and aggregate CSVs.

    Identical configs produce byte-identical outputs: all randomness flows
    through per-(seed, purpose) substreams and floats are written with repr.
    """
    outdir = config.outdir
    if outdir:
        os.makedirs(outdir, exist_ok=True)
    T = config.horizon
    grid = _downsample_grid(T, config.full_curves)
    instances = {}
    ghosts = {}
    ghost_cums = {}
    for seed in config.seeds:
        inst = materialize_instance(config.instance, seed)
        instances[seed] = inst
        ghosts[seed] = ghost_summary(inst)
        ghost_cums[seed] = ghost_reference(inst, T)
    curves = {}
    run_infos = {}
    files = []
    for algo in config.algorithms:
        for seed in config.seeds:
            inst = instances[seed]
            trace, info = run_algorithm(algo, inst, T, config.delta, seed)
            curve = regret_vs_ghost(trace, inst, config.switch_cost, ts=grid,
                                    ghost_cum=ghost_cums[seed])
            curves[(algo, seed)] = curve
            run_infos[(algo, seed)] = info
            if outdir:
                path = os.path.join(outdir, f"{algo}_seed{seed}.csv")
                rows = [
                    [int(t), algo, seed, _fmt(ce), _fmt(int(cr)), _fmt(int(cs)), _fmt(rg)]
                    for t, ce, cr, cs, rg in zip(curve.t, curve.cum_expected,
                                                 curve.cum_realized, curve.cum_switches,
                                                 curve.regret)
                ]
                _write_csv(path, CSV_HEADER, rows)
                files.append(path)
    mean_final = {}
    for algo in config.algorithms:
        stack = np.stack([curves[(algo, seed)].regret for seed in config.seeds])
        mean = stack.mean(axis=0)
        std = stack.std(axis=0)
        mean_final[algo] = float(mean[-1])
        if outdir:
            path = os.path.join(outdir, f"{algo}_agg.csv")
            rows = [
                [int(t), algo, _fmt(m), _fmt(s), len(config.seeds)]
                for t, m, s in zip(grid, mean, std)
            ]
            _write_csv(path, AGG_HEADER, rows)
            files.append(path)
    if outdir:
        meta = {
            "label": config.label,
            "algorithms": list(config.algorithms),
            "horizon": T,
            "delta": config.delta,
            "switch_cost": config.switch_cost,
            "seeds": list(config.seeds),
            "versions": {"delaybandit": __version__, "numpy": np.__version__},
            "per_seed": {
                str(seed): {
                    "instance": dump_instance(instances[seed]),
                    "hash": instance_hash(instances[seed]),
                    "ghost": ghosts[seed].to_dict(),
                }
                for seed in config.seeds
            },
            "runs": {
                f"{algo}/seed{seed}": run_infos[(algo, seed)]
                for algo in config.algorithms
                for seed in config.seeds
                if run_infos[(algo, seed)]
            },
        }
        if "low" in config.algorithms:
            k = instances[config.seeds[0]].k
            meta["schedule"] = stage_schedule(k, T, config.delta).to_dict()
        path = os.path.join(outdir, "metadata.json")
        with open(path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        files.append(path)
    final = {key: float(curve.regret[-1]) for key, curve in curves.items()}
    return ExperimentResult(config, curves, final, mean_final, files)
