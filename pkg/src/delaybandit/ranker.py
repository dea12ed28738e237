"""Learn the descending-baseline order of the arms by action elimination.

Every round samples each still-active arm once. An arm leaves the active set
as soon as its empirical mean is separated by more than twice the confidence
radius from every other active arm's mean, on the correct side; eliminated
arms grow a binary tree whose in-order traversal is the final permutation.

For delay-dependent environments the per-round samples come from a calibrated
wrapper: arms are grouped into cycles of length d0 > max_i d_i and each cycle
is pulled twice, keeping only the second pass, so every kept sample is an
unbiased draw of the baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Environment

__all__ = [
    "GapProfile",
    "RankLeaf",
    "RankNode",
    "RankingOutcome",
    "calibrated_sample_round",
    "calibrated_sampler",
    "epsilon_r",
    "gap_profile",
    "iid_bernoulli_sampler",
    "predicted_pull_budget",
    "rank_arms",
]


def epsilon_r(k: int, r: int, delta: float) -> float:
    """Confidence radius after r sampling rounds: sqrt(ln(2 k r (r+1) / delta) / (2r))."""
    if k < 2:
        raise ValueError("need at least two arms")
    if r < 1:
        raise ValueError("round index must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.sqrt(math.log(2.0 * k * r * (r + 1) / delta) / (2.0 * r))


@dataclass
class RankLeaf:
    """Not-yet-eliminated arms sharing the same slot between eliminated ones."""

    arms: list


@dataclass
class RankNode:
    """Eliminated arm; bigger/smaller hold the sides it split its leaf into."""

    arm: int
    round_removed: int
    bigger: "RankNode | RankLeaf"
    smaller: "RankNode | RankLeaf"


def _in_order(node, leaf_key) -> list:
    if isinstance(node, RankLeaf):
        return sorted(node.arms, key=leaf_key)
    return _in_order(node.bigger, leaf_key) + [node.arm] + _in_order(node.smaller, leaf_key)


@dataclass
class RankingOutcome:
    """Permutation (best arm first), elimination bookkeeping, and the tree."""

    permutation: tuple
    rounds: int
    pulls: int
    elimination_round: dict
    tree: "RankNode | RankLeaf"
    complete: bool
    means: dict = field(default_factory=dict)


def rank_arms(sampler, k: int, delta: float, pull_cap: int = 10**7) -> RankingOutcome:
    """Run the elimination until at most one arm stays active (or the cap hits).

    `sampler(active) -> (samples, pulls_used)` must return one unbiased [0, 1]
    sample per active arm. Arms whose comparison set is empty count as
    separated on that side, so the extreme arms are removable too. Sorting
    ties break on the original arm index; the survivor slots into its leaf.
    If the cap is exhausted first the partial tree is returned with
    complete=False and multi-arm leaves ordered by current empirical mean.
    """
    if k < 2:
        raise ValueError("need at least two arms")
    active = list(range(k))
    sums = [0.0] * k
    root: RankNode | RankLeaf = RankLeaf(list(range(k)))
    leaf_of = {i: root for i in range(k)}
    parent: dict = {}
    elim_round: dict = {i: None for i in range(k)}
    pulls = 0
    r = 0
    while len(active) > 1 and pulls < pull_cap:
        samples, used = sampler(list(active))
        pulls += used
        r += 1
        for i in active:
            sums[i] += samples[i]
        means = {i: sums[i] / r for i in active}
        eps = epsilon_r(k, r, delta)
        order = sorted(active, key=lambda i: (-means[i], i))
        for i in order:
            if len(active) <= 1:
                break
            if i not in means or i not in leaf_of:
                continue
            mi = means[i]
            above = [means[j] for j in active if j != i and means[j] >= mi]
            below = [means[j] for j in active if j != i and means[j] <= mi]
            sep_above = not above or min(above) > mi + 2 * eps
            sep_below = not below or max(below) < mi - 2 * eps
            if sep_above and sep_below:
                active.remove(i)
                elim_round[i] = r
                leaf = leaf_of.pop(i)
                bigger = [j for j in leaf.arms if j != i and means.get(j, -1.0) > mi]
                smaller = [j for j in leaf.arms if j != i and j in leaf_of and j not in bigger]
                node = RankNode(i, r, RankLeaf(bigger), RankLeaf(smaller))
                par = parent.get(id(leaf))
                if par is None:
                    root = node
                else:
                    pnode, side = par
                    setattr(pnode, side, node)
                parent[id(node.bigger)] = (node, "bigger")
                parent[id(node.smaller)] = (node, "smaller")
                for j in bigger:
                    leaf_of[j] = node.bigger
                for j in smaller:
                    leaf_of[j] = node.smaller
    complete = len(active) <= 1
    final_means = {i: sums[i] / r for i in range(k)} if r else {}
    perm = tuple(_in_order(root, lambda a: (-final_means.get(a, 0.0), a)))
    return RankingOutcome(perm, r, pulls, elim_round, root, complete, final_means)


def iid_bernoulli_sampler(mus, rng: np.random.Generator):
    """Plain stochastic-bandit sampler: one Bernoulli(mu_i) draw per active arm."""
    mus = [float(m) for m in mus]

    def sampler(active):
        us = rng.random(len(active))
        samples = {a: float(us[j] < mus[a]) for j, a in enumerate(active)}
        return samples, len(active)

    return sampler


def calibrated_sample_round(env: Environment, active_arms, d0: int):
    """One unbiased baseline sample per active arm from a delay environment.

    Active arms are split into groups of exactly d0 slots; each group cycle is
    pulled twice and only the second pass of the designated slots is kept, so
    every kept sample is taken d0 > max_i d_i rounds after the arm's previous
    pull. Deficient groups are padded with removed arms first (repeats are
    fine, their samples are dropped), then with actives from earlier groups.
    If no padding pool exists at all (fewer arms than d0, nothing removed
    yet), falls back to per-arm serialization: d0 filler pulls of other arms,
    then the designated pull, which keeps the sample unbiased at a gap > d0.
    """
    active = list(active_arms)
    if not active:
        raise ValueError("need at least one active arm")
    k = env.k
    if d0 <= max(env.instance.ds):
        raise ValueError("d0 must exceed every delay parameter")
    removed = [a for a in range(k) if a not in set(active)]
    samples: dict = {}
    pulls = 0
    groups = [active[i:i + d0] for i in range(0, len(active), d0)]
    for gi, group in enumerate(groups):
        pad_needed = d0 - len(group)
        if pad_needed > 0:
            pool = list(removed)
            for g in groups[:gi]:
                pool.extend(g)
            if not pool:
                return _serialized_round(env, active, d0)
            padding = [pool[j % len(pool)] for j in range(pad_needed)]
        else:
            padding = []
        cycle = group + padding
        for arm in cycle:                      # calibration pass, discarded
            env.pull(arm, policy=-1, retained=False)
        for slot, arm in enumerate(cycle):     # estimation pass
            keep = slot < len(group)
            rs = env.pull(arm, policy=-1, retained=keep)
            if keep:
                samples[arm] = float(rs.realized)
        pulls += 2 * d0
    return samples, pulls


def _serialized_round(env: Environment, active, d0: int):
    # fallback when no padding pool exists: a designated pull after d0 fillers
    samples = {}
    pulls = 0
    k = env.k
    for x in active:
        others = [a for a in range(k) if a != x]
        for j in range(d0):
            env.pull(others[j % len(others)], policy=-1, retained=False)
        rs = env.pull(x, policy=-1, retained=True)
        samples[x] = float(rs.realized)
        pulls += d0 + 1
    return samples, pulls


def calibrated_sampler(env: Environment, d0: int):
    """Adapter so rank_arms can run against a delay environment."""

    def sampler(active):
        return calibrated_sample_round(env, active, d0)

    return sampler


@dataclass(frozen=True)
class GapProfile:
    """Pairwise baseline gaps and the adjacent-gap vector driving sample cost."""

    mus: tuple
    adjacent: tuple

    def pairwise(self, i: int, j: int):
        return self.mus[i] - self.mus[j]


def gap_profile(mus) -> GapProfile:
    """Adjacent gaps: each arm's distance to its closest ordered neighbor."""
    mus = tuple(mus)
    k = len(mus)
    if k < 2:
        raise ValueError("need at least two arms")
    for a, b in zip(mus, mus[1:]):
        if not a > b:
            raise ValueError("baselines must be strictly decreasing")
    adj = []
    for i in range(k):
        if i == 0:
            adj.append(mus[0] - mus[1])
        elif i == k - 1:
            adj.append(mus[k - 2] - mus[k - 1])
        else:
            adj.append(min(mus[i - 1] - mus[i], mus[i] - mus[i + 1]))
    return GapProfile(mus, tuple(adj))


def predicted_pull_budget(profile: GapProfile, delta: float) -> float:
    """Order-of-magnitude pull estimate: sum_i (1/gap_i^2) ln(1/(delta gap_i)).

    Diagnostic only; acceptance checks use it for scaling, never control flow.
    """
    return float(sum((1.0 / g**2) * math.log(1.0 / (delta * g)) for g in profile.adjacent))
