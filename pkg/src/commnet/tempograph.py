"""Directed, message-count weighted graph snapshots over time windows."""

from __future__ import annotations

import bisect
import csv
import os
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .ingest import ActorId, MessageEvent

DAY = 86400
WEEK = 7 * DAY


@dataclass(frozen=True)
class Window:
    """Half-open interval ``[start, end)`` in epoch seconds."""

    start: int
    end: int

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError(f"empty window [{self.start}, {self.end})")

    def __contains__(self, ts: int) -> bool:
        return self.start <= ts < self.end

    @property
    def days(self) -> float:
        return (self.end - self.start) / 86400


@dataclass(frozen=True)
class GraphSnapshot:
    window: Window
    nodes: frozenset[ActorId]
    arcs: dict[tuple[ActorId, ActorId], int] = field(hash=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.arcs)

    def with_nodes(self, extra: Iterable[ActorId]) -> "GraphSnapshot":
        """Same arcs, node set widened by ``extra`` (isolated nodes)."""
        return GraphSnapshot(self.window, self.nodes | frozenset(extra), self.arcs)


def events_in(events: Sequence[MessageEvent], window: Window) -> Sequence[MessageEvent]:
    """Slice of a time-sorted event list falling inside ``window``."""
    lo = bisect.bisect_left(events, window.start, key=_ts)
    hi = bisect.bisect_left(events, window.end, lo=lo, key=_ts)
    return events[lo:hi]


def _ts(e: MessageEvent) -> int:
    return e.timestamp


def build_snapshot(events: Sequence[MessageEvent], window: Window) -> GraphSnapshot:
    weights: Counter = Counter()
    for e in events_in(events, window):
        s = e.sender
        for r in e.recipients:
            weights[(s, r)] += 1
    nodes = frozenset(a for arc in weights for a in arc)
    return GraphSnapshot(window, nodes, dict(sorted(weights.items())))


def weekly_windows(span: Window, anchor: int | None = None) -> list[Window]:
    """Consecutive 7-day bins covering ``span``; the last bin may be shorter.

    Bins start at ``anchor`` (default: ``span.start``), which must not lie
    after the span start.
    """
    start = span.start if anchor is None else anchor
    if start > span.start:
        raise ValueError("weekly anchor after span start")
    if span.end - span.start < WEEK:
        raise ValueError("span shorter than one week")
    # realign so the first bin contains span.start
    start += ((span.start - start) // WEEK) * WEEK
    out = []
    t = start
    while t < span.end:
        out.append(Window(max(t, span.start), min(t + WEEK, span.end)))
        t += WEEK
    return out


def weekly_series(events: Sequence[MessageEvent], span: Window, anchor: int | None = None) -> list[GraphSnapshot]:
    return [build_snapshot(events, w) for w in weekly_windows(span, anchor)]


def write_edge_list(snapshot: GraphSnapshot, target) -> None:
    """Dump ``source,target,weight`` rows for one window."""
    stream = open(target, "w", newline="", encoding="utf-8") if isinstance(target, (str, os.PathLike)) else target
    try:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(("source", "target", "weight"))
        for (s, t), x in snapshot.arcs.items():
            w.writerow((s, t, x))
    finally:
        if stream is not target:
            stream.close()


def _add_months(dt: datetime, k: int) -> datetime:
    y, m = divmod(dt.month - 1 + k, 12)
    return dt.replace(year=dt.year + y, month=m + 1)


def month_windows(start: int, months: int, month_days: int | None = None) -> list[Window]:
    """``months`` consecutive windows from ``start``.

    Calendar months by default (``start`` should then fall on a day that
    exists in every month, e.g. the 1st); fixed ``month_days``-long blocks
    otherwise.
    """
    if months < 1:
        raise ValueError("need at least one month")
    if month_days is not None:
        step = month_days * 86400
        return [Window(start + i * step, start + (i + 1) * step) for i in range(months)]
    t0 = datetime.fromtimestamp(start, tz=timezone.utc)
    edges = [int(_add_months(t0, i).timestamp()) for i in range(months + 1)]
    return [Window(a, b) for a, b in zip(edges, edges[1:])]
