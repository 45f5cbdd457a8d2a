"""Per-actor feature rows: one for the whole span, one per month."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, fields
from typing import Mapping, Optional, Sequence

from .centrality import betweenness_oscillations, centrality_table
from .ingest import ActorId, MessageEvent, RosterRecord
from .responsiveness import responsiveness_table
from .tempograph import Window, build_snapshot, events_in, month_windows, weekly_windows
from .textmetrics import CorpusStats, SentimentLexicon, load_lexicon, text_metrics_table

METRICS = (
    "activity",
    "alter_art",
    "ego_art",
    "alter_nudges",
    "ego_nudges",
    "betweenness",
    "oscillations",
    "degree",
    "closeness",
    "emotionality",
    "complexity",
)
CONTROLS = ("rank", "tenure", "months_since_promotion")
AUXILIARY = ("neighbors", "sentiment", "sentiment_spread")
FULL = "full"


@dataclass(frozen=True)
class ActorFeatureRow:
    actor: ActorId
    window: str
    month: Optional[int]
    present: bool
    left: int
    departure_month: Optional[int]
    rank: int
    tenure: float
    months_since_promotion: float
    skill: str
    country: str
    activity: Optional[float] = None
    alter_art: Optional[float] = None
    ego_art: Optional[float] = None
    alter_nudges: Optional[float] = None
    ego_nudges: Optional[float] = None
    betweenness: Optional[float] = None
    oscillations: Optional[float] = None
    degree: Optional[float] = None
    closeness: Optional[float] = None
    emotionality: Optional[float] = None
    complexity: Optional[float] = None
    neighbors: Optional[float] = None
    sentiment: Optional[float] = None
    sentiment_spread: Optional[float] = None

    def value(self, name: str) -> Optional[float]:
        return getattr(self, name)


COLUMNS = tuple(f.name for f in fields(ActorFeatureRow))


def analysis_months(span: Window, month_days: Optional[int] = None) -> list[Window]:
    """Month windows from the span start; the last one is clipped to the span."""
    out = []
    while True:
        w = month_windows(span.start, len(out) + 1, month_days)[-1]
        if w.start >= span.end:
            return out
        out.append(Window(w.start, min(w.end, span.end)))


def _window_metrics(events, window, actors, lexicon, corpus, text_cache):
    snap = build_snapshot(events, window).with_nodes(actors)
    cent = centrality_table(snap)
    resp = responsiveness_table(events, actors, window)
    text = text_metrics_table(events, actors, window, lexicon, corpus, text_cache)
    out = {}
    for a in actors:
        c, r, t = cent[a], resp[a], text[a]
        out[a] = {
            "activity": r.activity,
            "alter_art": r.alter_art,
            "ego_art": r.ego_art,
            "alter_nudges": r.alter_nudges,
            "ego_nudges": r.ego_nudges,
            "betweenness": c.betweenness,
            "degree": c.degree,
            "closeness": c.closeness,
            "neighbors": c.neighbors,
            "emotionality": t.emotionality if t else None,
            "complexity": t.complexity if t else None,
            "sentiment": t.sentiment if t else None,
            "sentiment_spread": t.sentiment_spread if t else None,
        }
    return out


def weekly_betweenness(events, span: Window, actors, anchor: Optional[int] = None):
    """``(weeks, {actor: [betweenness per week]})``; absent weeks count as 0."""
    weeks = weekly_windows(span, anchor)
    series = {a: [] for a in actors}
    for w in weeks:
        snap = build_snapshot(events, w)
        cent = centrality_table(snap) if snap.n else {}
        for a in actors:
            row = cent.get(a)
            series[a].append(row.betweenness if row else 0.0)
    return weeks, series


def compute_feature_table(
    events: Sequence[MessageEvent],
    roster: Mapping[ActorId, RosterRecord],
    span: Window,
    anchor: Optional[int] = None,
    lexicon: Optional[SentimentLexicon] = None,
    month_days: Optional[int] = None,
) -> list[ActorFeatureRow]:
    """Full-span row per roster actor, then per-month rows.

    Leavers get month rows up to and including their departure month.
    Actors that never appear in ``events`` keep rows with every metric
    absent; actors silent only in some window get zero centrality and
    activity there.
    """
    lexicon = lexicon or load_lexicon()
    actors = sorted(roster)
    events = events_in(sorted(events, key=lambda e: (e.timestamp, e.message_id)), span)
    senders = {e.sender for e in events}
    seen = senders | {r for e in events for r in e.recipients}
    present = [a for a in actors if a in seen]
    corpus = CorpusStats.from_subjects(e.subject for e in events) if events else None
    text_cache: dict = {}

    def rows_for(window_id, month, per_actor, osc):
        out = []
        for a in actors:
            rec = roster[a]
            base = dict(
                actor=a,
                window=window_id,
                month=month,
                present=a in seen,
                left=int(rec.left_company),
                departure_month=rec.departure_month,
                rank=rec.rank,
                tenure=rec.tenure,
                months_since_promotion=rec.months_since_promotion,
                skill=rec.skill,
                country=rec.country,
            )
            if month is not None and rec.departure_month is not None and month > rec.departure_month:
                continue
            if a in seen:
                base.update(per_actor[a])
                base["oscillations"] = osc[a]
            out.append(ActorFeatureRow(**base))
        return out

    if not present:
        empty = {}
        rows = rows_for(FULL, None, empty, empty)
        months = analysis_months(span, month_days)
        for i, _ in enumerate(months, start=1):
            rows += rows_for(f"m{i:02d}", i, empty, empty)
        return rows

    weeks, series = weekly_betweenness(events, span, present, anchor)
    full = _window_metrics(events, span, present, lexicon, corpus, text_cache)
    osc = {a: betweenness_oscillations(series[a]) for a in present}
    rows = rows_for(FULL, None, full, osc)
    for i, mw in enumerate(analysis_months(span, month_days), start=1):
        idx = [k for k, w in enumerate(weeks) if w.start in mw]
        per = _window_metrics(events, mw, present, lexicon, corpus, text_cache)
        mosc = {a: betweenness_oscillations([series[a][k] for k in idx]) if idx else 0 for a in present}
        rows += rows_for(f"m{i:02d}", i, per, mosc)
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return str(v)
        return repr(v)
    return str(v)


def write_features(rows: Sequence[ActorFeatureRow], target) -> None:
    stream = open(target, "w", newline="", encoding="utf-8") if isinstance(target, (str, os.PathLike)) else target
    try:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    finally:
        if stream is not target:
            stream.close()
