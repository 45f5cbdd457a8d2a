"""Reply-run reconstruction and the responsiveness measures built on it.

A run is the sequence of consecutive ``u -> v`` messages in one thread that
have not yet been answered by ``v``. The first ``v -> u`` message matched to
it closes the run; that message is then itself a ping of a ``v -> u`` run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import fmean
from typing import Literal, Optional, Sequence

from .ingest import ActorId, MessageEvent, normalize_subject
from .tempograph import Window, events_in

Direction = Literal["ego", "alter"]


@dataclass(slots=True)
class PingRun:
    sender: ActorId
    recipient: ActorId
    thread: str
    pings: list[int] = field(default_factory=list)
    reply_at: Optional[int] = None
    message_ids: list[str] = field(default_factory=list, repr=False)

    @property
    def terminated(self) -> bool:
        return self.reply_at is not None

    @property
    def latency_hours(self) -> float:
        """Waiting time from the earliest unanswered ping to the reply."""
        if self.reply_at is None:
            raise ValueError("run has no reply")
        return (self.reply_at - self.pings[0]) / 3600.0


@dataclass(frozen=True)
class ResponsivenessRow:
    actor: ActorId
    activity: int
    ego_nudges: Optional[float]
    alter_nudges: Optional[float]
    ego_art: Optional[float]
    alter_art: Optional[float]


def detect_runs(events: Sequence[MessageEvent], window: Optional[Window] = None) -> list[PingRun]:
    """Reconstruct ping runs from time-sorted events.

    Only events inside ``window`` are seen. A reply is matched through
    ``in_reply_to`` when it names a visible message between the same two
    actors; otherwise the open run of the opposite direction with the same
    thread key is closed. Runs come back in order of their first ping.
    """
    if window is not None:
        events = events_in(events, window)
    runs: list[PingRun] = []
    open_runs: dict[tuple[ActorId, ActorId, str], PingRun] = {}
    # message id -> {recipient: run holding that message as a ping}
    holder: dict[str, dict[ActorId, PingRun]] = {}
    for e in events:
        key = normalize_subject(e.subject)
        s = e.sender
        linked = holder.get(e.in_reply_to) if e.in_reply_to else None
        for r in e.recipients:
            # close the r -> s run this message answers
            target = linked.get(s) if linked else None
            if target is not None and target.sender == r:
                if target.reply_at is None:
                    target.reply_at = e.timestamp
                    open_runs.pop((r, s, target.thread), None)
            else:
                back = open_runs.pop((r, s, key), None)
                if back is not None:
                    back.reply_at = e.timestamp
            # extend or open the s -> r run
            run = open_runs.get((s, r, key))
            if run is None:
                run = PingRun(s, r, key)
                open_runs[(s, r, key)] = run
                runs.append(run)
            run.pings.append(e.timestamp)
            run.message_ids.append(e.message_id)
            holder.setdefault(e.message_id, {})[r] = run
    return runs


def activity(events: Sequence[MessageEvent], actor: ActorId, window: Optional[Window] = None) -> int:
    """Messages sent by ``actor``; a multi-recipient message counts once."""
    if window is not None:
        events = events_in(events, window)
    return sum(1 for e in events if e.sender == actor)


def _side(run: PingRun, actor: ActorId, direction: Direction) -> bool:
    return (run.recipient if direction == "ego" else run.sender) == actor


def _check(direction: str) -> None:
    if direction not in ("ego", "alter"):
        raise ValueError(f"direction must be 'ego' or 'alter', got {direction!r}")


def nudges(runs: Sequence[PingRun], actor: ActorId, direction: Direction) -> Optional[float]:
    """Mean pings per answered run; ``ego`` = runs the actor answered,
    ``alter`` = runs others answered for the actor. None when undefined."""
    _check(direction)
    counts = [len(r.pings) for r in runs if r.terminated and _side(r, actor, direction)]
    return fmean(counts) if counts else None


def art(runs: Sequence[PingRun], actor: ActorId, direction: Direction) -> Optional[float]:
    """Mean reply latency in hours, same sides as :func:`nudges`."""
    _check(direction)
    lat = [r.latency_hours for r in runs if r.terminated and _side(r, actor, direction)]
    return fmean(lat) if lat else None


def responsiveness_table(
    events: Sequence[MessageEvent],
    actors: Sequence[ActorId],
    window: Optional[Window] = None,
) -> dict[ActorId, ResponsivenessRow]:
    """Rows for ``actors`` in one pass over the runs (same values as the
    per-actor functions)."""
    if window is not None:
        events = events_in(events, window)
    runs = detect_runs(events)
    wanted = set(actors)
    sent = dict.fromkeys(wanted, 0)
    for e in events:
        if e.sender in wanted:
            sent[e.sender] += 1
    acc = {a: ([], [], [], []) for a in wanted}  # ego pings, alter pings, ego lat, alter lat
    for r in runs:
        if not r.terminated:
            continue
        if r.recipient in wanted:
            acc[r.recipient][0].append(len(r.pings))
            acc[r.recipient][2].append(r.latency_hours)
        if r.sender in wanted:
            acc[r.sender][1].append(len(r.pings))
            acc[r.sender][3].append(r.latency_hours)
    out = {}
    for a in actors:
        en, an, el, al = acc[a]
        out[a] = ResponsivenessRow(
            actor=a,
            activity=sent[a],
            ego_nudges=fmean(en) if en else None,
            alter_nudges=fmean(an) if an else None,
            ego_art=fmean(el) if el else None,
            alter_art=fmean(al) if al else None,
        )
    return out
