"""Shared generators and independent oracles for the test suite."""

from fractions import Fraction as F

import networkx as nx
import numpy as np

from delaybandit import (
    Discount,
    build_state_graph,
    ghost_summary,
    make_instance,
)


def random_exact_instance(rng, kmax=3, dmax=3, denom=20):
    """Random instance with strictly decreasing rational baselines."""
    k = int(rng.integers(1, kmax + 1))
    mus = set()
    while len(mus) < k:
        mus.add(F(int(rng.integers(1, denom + 1)), denom))
    mus = sorted(mus, reverse=True)
    ds = [int(rng.integers(1, dmax + 1)) for _ in range(k)]
    kind = int(rng.integers(0, 3))
    if kind == 0:
        disc = Discount.geometric(F(int(rng.integers(1, 10)), 10))
    elif kind == 1:
        disc = Discount.constant(F(int(rng.integers(0, 11)), 10))
    else:
        n = int(rng.integers(1, 4))
        vals = sorted((F(int(rng.integers(0, 11)), 10) for _ in range(n)), reverse=True)
        disc = Discount.table(vals)
    return make_instance(mus, ds, disc)


def random_float_instance(rng, kmax=4, dmax=3):
    """Random instance with float parameters (forces the double-precision oracle path)."""
    k = int(rng.integers(1, kmax + 1))
    mus = np.sort(rng.uniform(0.02, 1.0, size=k))[::-1]
    while len(set(mus.tolist())) < k:
        mus = np.sort(rng.uniform(0.02, 1.0, size=k))[::-1]
    ds = [int(rng.integers(1, dmax + 1)) for _ in range(k)]
    if rng.random() < 0.5:
        disc = Discount.geometric(float(rng.uniform(0.05, 0.99)))
    else:
        n = int(rng.integers(1, 5))
        disc = Discount.table(sorted(rng.uniform(0.0, 1.0, size=n).tolist(), reverse=True))
    return make_instance(mus.tolist(), ds, disc)


def brute_force_max_mean(instance):
    """Independent oracle: enumerate every simple cycle reachable from the start."""
    g = build_state_graph(instance)
    reach = set()
    stack = [g.start]
    while stack:
        u = stack.pop()
        if u in reach:
            continue
        reach.add(u)
        for v, _ in g.succ[u]:
            stack.append(v)
    G = nx.DiGraph()
    for u in reach:
        for v, w in g.succ[u]:
            G.add_edge(u, v, weight=F(w))
    best = None
    for cyc in nx.simple_cycles(G):
        wsum = sum(G[u][v]["weight"] for u, v in zip(cyc, cyc[1:] + cyc[:1]))
        mean = F(wsum, len(cyc))
        if best is None or mean > best:
            best = mean
    return best


def _payoff(mu, d, disc, tau):
    if 0 < tau <= d:
        return (1 - disc(tau)) * mu
    return mu


def make_equal_optima(rng, kmax=4, dmax=3):
    """Instance whose cutoffs m < n share the maximal ranking-policy value.

    Draw everything but the last baseline, then solve the last one so that
    g(n) equals g(m) exactly (rational arithmetic); reject draws where the
    shared value is not the global maximum.
    """
    for _ in range(2000):
        k = int(rng.integers(2, kmax + 1))
        n = k
        m = int(rng.integers(1, n))
        ds = [int(rng.integers(1, dmax + 1)) for _ in range(k)]
        vals = set()
        while len(vals) < k - 1:
            vals.add(F(int(rng.integers(4, 41)), 40))
        head = sorted(vals, reverse=True)
        if rng.random() < 0.5:
            nvals = int(rng.integers(1, 4))
            disc = Discount.table(sorted((F(int(rng.integers(1, 10)), 10) for _ in range(nvals)),
                                         reverse=True))
        else:
            disc = Discount.constant(F(int(rng.integers(1, 10)), 10))
        g_m = sum(_payoff(head[j], ds[j], disc, m) for j in range(m)) / F(m)
        s_head = sum(_payoff(head[j], ds[j], disc, n) for j in range(n - 1))
        c_n = (1 - disc(n)) if n <= ds[n - 1] else F(1)
        if c_n == 0:
            continue
        mu_n = (n * g_m - s_head) / c_n
        if not 0 < mu_n < head[-1]:
            continue
        inst = make_instance(head + [mu_n], ds, disc)
        gs = ghost_summary(inst)
        if gs.g_values[m - 1] != gs.g_values[n - 1]:
            continue
        if max(gs.g_values) != gs.g_values[m - 1]:
            continue
        return inst, m, n
    raise RuntimeError("failed to construct an equal-optima instance")


def verify_maintenance_schedule(intervals, slots):
    """Check a witness: every machine serviced exactly every l_i slots."""
    period = len(slots)
    for machine, li in enumerate(intervals, start=1):
        times = [t for t in range(period) if slots[t] == machine]
        if len(times) != period // li:
            return False
        doubled = times + [t + period for t in times]
        for a, b in zip(doubled, doubled[1:]):
            if b - a != li:
                return False
    return True
