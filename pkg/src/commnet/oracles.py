"""Slow, obviously-correct reference implementations used to check the fast ones.

Nothing here is used by the pipeline itself; ``commnet selftest`` and the
test suite compare the production code against these on random inputs.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from itertools import permutations
from typing import Sequence

from .centrality import betweenness_oscillations, centrality_table
from .specfun import t_cdf
from .tempograph import GraphSnapshot, Window


def random_digraph(rng: random.Random, n_max: int, p: float | None = None) -> GraphSnapshot:
    n = rng.randint(1, n_max)
    nodes = [f"v{i}" for i in range(n)]
    p = rng.uniform(0.1, 0.7) if p is None else p
    arcs = {(a, b): 1 for a in nodes for b in nodes if a != b and rng.random() < p}
    return GraphSnapshot(Window(0, 1), frozenset(nodes), arcs)


def _successors(g: GraphSnapshot) -> dict:
    out = {v: [] for v in g.nodes}
    for s, t in g.arcs:
        out[s].append(t)
    return out


def _all_simple_paths(succ, s, t):
    stack = [(s, [s])]
    while stack:
        v, path = stack.pop()
        if v == t:
            yield path
            continue
        for w in succ[v]:
            if w not in path:
                stack.append((w, path + [w]))


def brute_betweenness(g: GraphSnapshot) -> dict:
    """Enumerate every simple path, keep the shortest per pair, count interior visits."""
    succ = _successors(g)
    nodes = sorted(g.nodes)
    n = len(nodes)
    score = {v: Fraction(0) for v in nodes}
    for s, t in permutations(nodes, 2):
        paths = list(_all_simple_paths(succ, s, t))
        if not paths:
            continue
        best = min(len(p) for p in paths)
        shortest = [p for p in paths if len(p) == best]
        for p in shortest:
            for v in p[1:-1]:
                score[v] += Fraction(1, len(shortest))
    norm = (n - 1) * (n - 2)
    return {v: (score[v] / norm if n >= 3 else Fraction(0)) for v in nodes}


def bfs_closeness(g: GraphSnapshot) -> dict:
    """Exact ``1 / sum of hop distances`` with rational arithmetic."""
    succ = _successors(g)
    out = {}
    for s in g.nodes:
        dist = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for v in frontier:
                for w in succ[v]:
                    if w not in dist:
                        dist[w] = dist[v] + 1
                        nxt.append(w)
            frontier = nxt
        total = sum(dist.values())
        out[s] = Fraction(1, total) if total else Fraction(0)
    return out


def brute_oscillations(series: Sequence[float]) -> int:
    """Scan every maximal plateau and test its two neighbouring values."""
    n = len(series)
    count = 0
    i = 0
    while i < n:
        j = i
        while j + 1 < n and series[j + 1] == series[i]:
            j += 1
        if i > 0 and j < n - 1:
            left, right, v = series[i - 1], series[j + 1], series[i]
            if (v > left and v > right) or (v < left and v < right):
                count += 1
        i = j + 1
    return count


def t_cdf_quadrature(t: float, df: float, steps: int = 20000) -> float:
    """Student t CDF by composite Simpson integration of the density from 0."""
    if t == 0:
        return 0.5
    logc = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)

    def pdf(x):
        return math.exp(logc - (df + 1) / 2 * math.log1p(x * x / df))

    a, b = 0.0, abs(t)
    h = (b - a) / steps
    acc = pdf(a) + pdf(b)
    for k in range(1, steps):
        acc += (4 if k % 2 else 2) * pdf(a + k * h)
    half = acc * h / 3
    return 0.5 + half if t > 0 else 0.5 - half


def check_betweenness(seed: int = 1, graphs: int = 100, n_max: int = 6, tol: float = 1e-9) -> list[str]:
    rng = random.Random(seed)
    errors = []
    for k in range(graphs):
        g = random_digraph(rng, n_max)
        fast = centrality_table(g)
        slow = brute_betweenness(g)
        for v in g.nodes:
            if abs(fast[v].betweenness - float(slow[v])) > tol:
                errors.append(f"graph {k} node {v}: {fast[v].betweenness} != {float(slow[v])}")
    return errors


def check_closeness(seed: int = 2, graphs: int = 50, n_max: int = 8, tol: float = 1e-12) -> list[str]:
    rng = random.Random(seed)
    errors = []
    for k in range(graphs):
        g = random_digraph(rng, n_max)
        fast = centrality_table(g)
        slow = bfs_closeness(g)
        for v in g.nodes:
            if abs(fast[v].closeness - float(slow[v])) > tol:
                errors.append(f"graph {k} node {v}: {fast[v].closeness} != {slow[v]}")
    return errors


def random_plateau_series(rng: random.Random, max_len: int = 12) -> list[float]:
    n = rng.randint(0, max_len)
    out: list[float] = []
    while len(out) < n:
        v = float(rng.randint(0, 4))
        out.extend([v] * rng.randint(1, 3))
    return out[:n]


def check_oscillations(seed: int = 3, series: int = 1000, max_len: int = 12) -> list[str]:
    rng = random.Random(seed)
    errors = []
    for k in range(series):
        s = random_plateau_series(rng, max_len)
        if not s:
            s = [0.0]
        fast, slow = betweenness_oscillations(s), brute_oscillations(s)
        if fast != slow:
            errors.append(f"series {k} {s}: {fast} != {slow}")
    return errors


def check_t_cdf(tol: float = 1e-8) -> list[str]:
    errors = []
    for t, df in [(0.0, 3), (1.812, 10), (-2.0, 5), (2.4495, 18), (0.3, 1.5), (4.0, 30)]:
        a, b = t_cdf(t, df), t_cdf_quadrature(t, df)
        if abs(a - b) > tol:
            errors.append(f"t_cdf({t}, {df}) = {a}, quadrature {b}")
    return errors


SUITES = {
    "betweenness": check_betweenness,
    "closeness": check_closeness,
    "oscillations": check_oscillations,
    "t_cdf": check_t_cdf,
}
