"""Staged action elimination over the ranking-policy class with few switches.

Stage s plays every surviving cutoff m for ceil(T_s / (m * |A_s|)) + 1 plays
of m pulls each, discards the first play of each visit (it only realigns the
delay vector), estimates g(m) from the rest, and drops every cutoff whose
estimate falls more than 2 C_s below the best. Stage sizes grow doubly
exponentially, so the number of stages -- and hence policy switches -- stays
O(k ln ln T) no matter the gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import BanditInstance, Environment, substream
from .policies import PolicyTrace

__all__ = [
    "LowSwitchRun",
    "StageRecord",
    "StageSchedule",
    "plays_per_policy",
    "run_pi_low",
    "stage_schedule",
]


@dataclass(frozen=True)
class StageSchedule:
    """Precomputed stage sizes T_s and confidence radii C_s for a horizon."""

    horizon: int
    k: int
    delta: float
    sizes: tuple
    radii: tuple

    @property
    def num_stages(self) -> int:
        return len(self.sizes)

    def to_dict(self) -> dict:
        return {
            "T": self.horizon,
            "k": self.k,
            "delta": self.delta,
            "T_s": list(self.sizes),
            "C_s": list(self.radii),
            "S": self.num_stages,
        }


def stage_schedule(k: int, T: int, delta: float) -> StageSchedule:
    """Sizes T_s = ceil(T^(1 - 2^-s)); stop at the first S with sum(k + T_s) >= T.

    The stage count uses k as the active-set size (its upper bound), so the
    whole schedule, including the radii C_s = sqrt(k/(2 T_s) ln(2kS/delta)),
    is fixed before any data is seen.
    """
    if k < 1 or T < k:
        raise ValueError("need T >= k >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    sizes = []
    total = 0
    s = 1
    while True:
        v = float(T) ** (1.0 - 0.5**s)
        iv = round(v)
        # snap near-integer powers so exact roots do not ceil one too high
        ts = iv if abs(v - iv) < 1e-9 * max(1.0, abs(iv)) else math.ceil(v)
        ts = max(1, int(ts))
        sizes.append(ts)
        total += k + ts
        if total >= T:
            break
        s += 1
    S = len(sizes)
    radii = tuple(math.sqrt(k / (2.0 * ts) * math.log(2.0 * k * S / delta)) for ts in sizes)
    return StageSchedule(T, k, delta, tuple(sizes), radii)


def plays_per_policy(stage_size: int, m: int, active_count: int) -> int:
    """ceil(T_s / (m |A_s|)) + 1; the extra play is the calibration play."""
    if stage_size < 1 or m < 1 or active_count < 1:
        raise ValueError("all arguments must be positive")
    return -(-stage_size // (m * active_count)) + 1


@dataclass
class StageRecord:
    """What one stage saw: plays per cutoff, estimates, and the elimination."""

    stage: int
    active: tuple
    plays: dict
    pulls: dict
    estimates: dict
    best: int | None
    eliminated: tuple
    truncated: bool

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "active": list(self.active),
            "plays": {str(m): v for m, v in self.plays.items()},
            "pulls": {str(m): v for m, v in self.pulls.items()},
            "estimates": {str(m): float(v) for m, v in self.estimates.items()},
            "best": self.best,
            "eliminated": list(self.eliminated),
            "truncated": self.truncated,
        }


@dataclass
class LowSwitchRun:
    """Full run output: trace, per-stage records, survivors, switch count."""

    trace: PolicyTrace
    schedule: StageSchedule
    stages: list
    survivors: tuple
    total_switches: int
    tail_pulls: int
    arm_order: tuple


def run_pi_low(instance: BanditInstance, T: int, delta: float, seed: int = 0,
               arm_order=None, rng=None) -> LowSwitchRun:
    """Run the low-switch learner for exactly T pulls on a fresh environment.

    arm_order lets the caller plug in a learned ranking; by default the
    instance's own (true) order is used. Budget accounting counts every pull
    including calibration; the in-progress stage is truncated when T is hit,
    and any budget left after the last scheduled stage replays the final
    empirical best (the exploitation tail, excluded from estimates).
    """
    k = instance.k
    sched = stage_schedule(k, T, delta)
    order = tuple(arm_order) if arm_order is not None else tuple(range(k))
    if sorted(order) != list(range(k)):
        raise ValueError("arm_order must be a permutation of all arms")
    if rng is None:
        rng = substream(seed, "pi_low")
    env = Environment(instance, rng, capacity=T)
    active = list(range(1, k + 1))
    records: list[StageRecord] = []
    last_policy = None
    switches = 0
    for s in range(1, sched.num_stages + 1):
        if env.t >= T:
            break
        ts = sched.sizes[s - 1]
        stage_active = list(active)
        plays = {m: plays_per_policy(ts, m, len(stage_active)) for m in stage_active}
        sums: dict = {}
        counts: dict = {}
        pulls_done: dict = {}
        truncated = False
        for m in stage_active:
            target = plays[m] * m
            n = min(target, T - env.t)
            if n == 0:
                truncated = True
                break
            if last_policy is not None and last_policy != m:
                switches += 1
            last_policy = m
            ret_sum, ret_n = env.pull_cycles(order[:m], n, policy=m, retain_from=m)
            sums[m] = ret_sum
            counts[m] = ret_n
            pulls_done[m] = n
            if n < target:
                truncated = True
                break
        estimates = {m: sums[m] / counts[m] for m in stage_active if counts.get(m, 0) > 0}
        if truncated:
            records.append(StageRecord(s, tuple(stage_active), plays, pulls_done,
                                       estimates, None, (), True))
            break
        best = min(estimates, key=lambda m: (-estimates[m], m))
        cs = sched.radii[s - 1]
        eliminated = tuple(m for m in stage_active if estimates[m] < estimates[best] - 2 * cs)
        active = [m for m in stage_active if m not in eliminated]
        records.append(StageRecord(s, tuple(stage_active), plays, pulls_done,
                                   estimates, best, eliminated, False))
    tail = 0
    if env.t < T:
        # budget left after the final scheduled stage: exploit the last best
        best = records[-1].best if records and records[-1].best is not None else 1
        if last_policy is not None and last_policy != best:
            switches += 1
        tail = T - env.t
        env.pull_cycles(order[:best], tail, policy=best, retain_from=tail)
    trace = PolicyTrace.from_env(env)
    return LowSwitchRun(trace, sched, records, tuple(active), switches, tail, order)
