"""Degree, closeness and betweenness on directed snapshots, plus oscillation counts.

All path-based measures use unweighted (hop) distances along arc direction.
Closeness and betweenness share one breadth-first search per source; the
betweenness side is Brandes' dependency accumulation over the shortest-path
DAG, compiled with numba.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from numba import njit
from scipy import sparse

from .ingest import ActorId
from .tempograph import GraphSnapshot

@dataclass(frozen=True)
class CentralityRow:
    actor: ActorId
    degree: int
    neighbors: int
    closeness: float
    betweenness: float


def _index(snapshot: GraphSnapshot) -> tuple[list[ActorId], dict[ActorId, int]]:
    nodes = sorted(snapshot.nodes)
    return nodes, {a: i for i, a in enumerate(nodes)}


def _adjacency(snapshot: GraphSnapshot, idx: dict[ActorId, int]) -> sparse.csr_matrix:
    n = len(idx)
    if not snapshot.arcs:
        return sparse.csr_matrix((n, n))
    rows = np.fromiter((idx[s] for s, _ in snapshot.arcs), dtype=np.int64, count=len(snapshot.arcs))
    cols = np.fromiter((idx[t] for _, t in snapshot.arcs), dtype=np.int64, count=len(snapshot.arcs))
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))


@njit(cache=True)
def _brandes(indptr, indices, n, sources):
    close = np.zeros(n)
    btw = np.zeros(n)
    dist = np.empty(n, np.int64)
    sigma = np.empty(n)
    delta = np.empty(n)
    order = np.empty(n, np.int64)
    for s in sources:
        dist[:] = -1
        sigma[:] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head, tail, hops = 0, 1, 0
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v]
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    hops += dv + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        if hops > 0:
            close[s] = 1.0 / hops
        # reverse BFS order: every successor's dependency is final before use
        for i in range(tail - 1, -1, -1):
            v = order[i]
            dv = dist[v]
            acc = 0.0
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if dist[w] == dv + 1:
                    acc += (1.0 + delta[w]) / sigma[w]
            delta[v] = sigma[v] * acc
            if v != s:
                btw[v] += delta[v]
    return close, btw


def path_scores(snapshot: GraphSnapshot) -> tuple[list[ActorId], np.ndarray, np.ndarray]:
    """Closeness and normalized betweenness for every node.

    Returns ``(nodes, closeness, betweenness)`` with nodes in sorted order.
    """
    nodes, idx = _index(snapshot)
    n = len(nodes)
    if n == 0:
        return nodes, np.zeros(0), np.zeros(0)
    A = _adjacency(snapshot, idx)
    # sources without out-arcs reach nothing and mediate nothing
    sources = np.flatnonzero(np.diff(A.indptr) > 0).astype(np.int64)
    close, btw = _brandes(A.indptr.astype(np.int64), A.indices.astype(np.int64), n, sources)
    if n >= 3:
        btw /= (n - 1) * (n - 2)
    else:
        btw[:] = 0.0
    return nodes, close, btw


@lru_cache(maxsize=8)
def _cached_scores(snapshot: GraphSnapshot) -> dict[ActorId, CentralityRow]:
    return centrality_table(snapshot)


def centrality_table(snapshot: GraphSnapshot) -> dict[ActorId, CentralityRow]:
    """All per-node measures for one snapshot."""
    nodes, close, btw = path_scores(snapshot)
    deg = dict.fromkeys(nodes, 0)
    nbrs: dict[ActorId, set] = {a: set() for a in nodes}
    for s, t in snapshot.arcs:
        deg[s] += 1
        deg[t] += 1
        nbrs[s].add(t)
        nbrs[t].add(s)
    return {
        a: CentralityRow(a, deg[a], len(nbrs[a]), float(close[i]), float(btw[i]))
        for i, a in enumerate(nodes)
    }


def _row(snapshot: GraphSnapshot, actor: ActorId) -> CentralityRow:
    if actor not in snapshot.nodes:
        raise KeyError(f"{actor} is not a node of this snapshot")
    return _cached_scores(snapshot)[actor]


def degree(snapshot: GraphSnapshot, actor: ActorId) -> int:
    """In-arcs plus out-arcs; a reciprocated pair counts twice."""
    if actor not in snapshot.nodes:
        raise KeyError(f"{actor} is not a node of this snapshot")
    return sum((s == actor) + (t == actor) for s, t in snapshot.arcs)


def neighbor_count(snapshot: GraphSnapshot, actor: ActorId) -> int:
    """Distinct actors linked to ``actor`` in either direction."""
    if actor not in snapshot.nodes:
        raise KeyError(f"{actor} is not a node of this snapshot")
    return len({t if s == actor else s for s, t in snapshot.arcs if actor in (s, t)})


def closeness(snapshot: GraphSnapshot, actor: ActorId) -> float:
    """Reciprocal of the hop-distance sum to reachable nodes; 0 if none reachable."""
    return _row(snapshot, actor).closeness


def betweenness(snapshot: GraphSnapshot, actor: ActorId) -> float:
    return _row(snapshot, actor).betweenness


def oscillation_points(series: Sequence[float]) -> list[int]:
    """Start indices of strict local extrema, plateaus collapsed to one point.

    A plateau touching either end of the series is never an extremum.
    """
    runs: list[tuple[int, float]] = []
    for i, v in enumerate(series):
        if not runs or v != runs[-1][1]:
            runs.append((i, v))
    out = []
    for j in range(1, len(runs) - 1):
        prev, (i, v), nxt = runs[j - 1][1], runs[j], runs[j + 1][1]
        if (v > prev and v > nxt) or (v < prev and v < nxt):
            out.append(i)
    return out


def betweenness_oscillations(series: Sequence[float]) -> int:
    """Number of local maxima and minima in a weekly betweenness series."""
    if len(series) < 1:
        raise ValueError("empty series")
    return len(oscillation_points(series))
