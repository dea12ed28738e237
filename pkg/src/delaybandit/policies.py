"""Ranking policies, the greedy rule, per-cutoff values g(m), and rollouts.

The ranking policy with cutoff m cycles deterministically over the m best
arms (baseline order). g(m) is its steady per-pull expected reward; the best
cutoff r_star defines the reference ("ghost") policy used for regret.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational

import numpy as np

from .core import BanditInstance, Environment, RewardSample, expected_payoff, segment_sum

__all__ = [
    "GhostSummary",
    "GreedyPolicy",
    "PolicyTrace",
    "RankingPolicy",
    "g_value",
    "ghost_summary",
    "greedy_arm",
    "ranking_arm",
    "rollout",
]


def ranking_arm(m: int, t: int) -> int:
    """Arm pulled at 0-based step t by the cutoff-m ranking policy: t mod m."""
    if m < 1:
        raise ValueError("cutoff must be >= 1")
    if t < 0:
        raise ValueError("step must be >= 0")
    return t % m


@dataclass(frozen=True)
class RankingPolicy:
    """Cycles over the first m arms of `order` (identity order by default)."""

    m: int
    order: tuple | None = None

    def __call__(self, t: int, state) -> int:
        idx = ranking_arm(self.m, t)
        return idx if self.order is None else self.order[idx]


def greedy_arm(instance: BanditInstance, state) -> int:
    """Arm with the highest expected payoff at the current delays, lowest index on ties."""
    best = 0
    best_val = expected_payoff(instance, 0, state[0])
    for i in range(1, instance.k):
        val = expected_payoff(instance, i, state[i])
        if val > best_val:
            best = i
            best_val = val
    return best


class GreedyPolicy:
    """Delay-vector feedback rule: always pull the currently best-looking arm."""

    def __init__(self, instance: BanditInstance):
        self.instance = instance

    def __call__(self, t: int, state) -> int:
        return greedy_arm(self.instance, state)


def g_value(instance: BanditInstance, m: int):
    """Steady per-pull expected reward of the cutoff-m ranking policy.

    In steady state every arm in the cycle is pulled exactly m rounds after
    its previous pull, so g(m) = (1/m) * sum_{j<m} payoff(j, m). Exact when
    the instance is exact.
    """
    if not 1 <= m <= instance.k:
        raise ValueError(f"cutoff {m} out of range for k={instance.k}")
    total = segment_sum(instance, 0, m, m)
    if isinstance(total, Rational):
        return Fraction(total) / m
    return total / m


@dataclass(frozen=True)
class GhostSummary:
    """All g(m) values plus the best cutoff and the approximation index r_zero."""

    g_values: tuple
    r_star: int
    r_zero: int

    def to_dict(self) -> dict:
        return {
            "g": [float(g) for g in self.g_values],
            "r_star": self.r_star,
            "r_zero": self.r_zero,
        }


def ghost_summary(instance: BanditInstance) -> GhostSummary:
    """Compute every g(m), the lowest maximizer r_star, and r_zero.

    r_zero is the largest r such that for every i = 2..r the i-th baseline
    beats every discounted replay of an earlier arm at distance i-j; it is 1
    as soon as the i = 2 condition fails (and for k = 1).
    """
    k = instance.k
    gs = tuple(g_value(instance, m) for m in range(1, k + 1))
    r_star = 1
    for m in range(2, k + 1):
        if gs[m - 1] > gs[r_star - 1]:
            r_star = m
    r_zero = 1
    for i in range(2, k + 1):
        mu_i = instance.arms[i - 1].mu
        best_replay = max(expected_payoff(instance, j - 1, i - j) for j in range(1, i))
        if mu_i > best_replay:
            r_zero = i
        else:
            break
    return GhostSummary(gs, r_star, r_zero)


@dataclass
class PolicyTrace:
    """Columnar pull log: expectation and realized channels plus policy ids.

    `policy` holds the ranking-policy cutoff executing each pull (-1 when not
    applicable); `retained` marks pulls that fed a learner's estimates.
    """

    arms: np.ndarray
    taus: np.ndarray
    gaps: np.ndarray
    expected: np.ndarray
    realized: np.ndarray
    policy: np.ndarray
    retained: np.ndarray

    @classmethod
    def from_env(cls, env: Environment) -> "PolicyTrace":
        return cls(**env.columns())

    def __len__(self) -> int:
        return len(self.arms)

    @cached_property
    def cum_expected(self) -> np.ndarray:
        return np.cumsum(self.expected)

    @cached_property
    def cum_realized(self) -> np.ndarray:
        return np.cumsum(self.realized.astype(np.int64))

    @cached_property
    def switch_flags(self) -> np.ndarray:
        """True where the executing policy id changes (first pull never counts)."""
        flags = np.zeros(len(self), bool)
        if len(self) > 1:
            flags[1:] = self.policy[1:] != self.policy[:-1]
        return flags

    @cached_property
    def cum_switches(self) -> np.ndarray:
        return np.cumsum(self.switch_flags.astype(np.int64))

    @property
    def total_switches(self) -> int:
        return int(self.cum_switches[-1]) if len(self) else 0

    def sample(self, i: int) -> RewardSample:
        return RewardSample(
            int(self.arms[i]), int(self.taus[i]), int(self.gaps[i]),
            float(self.expected[i]), int(self.realized[i]),
        )


def rollout(instance: BanditInstance, policy, horizon: int, rng: np.random.Generator,
            initial_state=None, policy_id: int = -1) -> PolicyTrace:
    """Run any callable policy(t, state) -> arm for `horizon` pulls.

    Deterministic given (instance, policy, horizon, stream state). The trace
    records both channels at every pull.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    env = Environment(instance, rng, capacity=max(horizon, 1), initial_state=initial_state)
    for t in range(horizon):
        arm = policy(t, env.delay_state())
        env.pull(arm, policy=policy_id)
    return PolicyTrace.from_env(env)
