"""Seeded generator of organizational e-mail logs with a labeled leaver cohort.

The organization is a fixed set of seats. Each seat starts with a roster
actor; when a leaver departs (at the start of their departure month) a new
hire, who is not on the roster, takes the seat over so the network keeps
its size. Conversations are threads: the initiator pings a contact until
the contact answers or the initiator gives up. Broadcast announcements go
to several contacts and are never answered.

Leavers differ from stayers for their whole history (narrower contact set,
quicker replies in both directions) and, when the shift is enabled, change
during their final months: they reach out to new contacts, others answer
them less readily, and their weekly activity alternates between busy and
quiet weeks.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .ingest import MessageEvent, RosterRecord, parse_timestamp, write_event_log, write_roster
from .tempograph import WEEK, month_windows

HOUR = 3600
DAY = 86400

TOPICS = (
    "budget", "forecast", "contract", "vendor", "hiring", "onboarding", "roadmap", "pricing",
    "inventory", "shipment", "audit", "compliance", "training", "offsite", "quarterly", "campaign",
    "proposal", "invoice", "migration", "release", "staffing", "logistics", "procurement", "benchmark",
    "renewal", "workshop", "survey", "policy", "integration", "dashboard", "payroll", "warehouse",
    "client", "partner", "tender", "kpi", "headcount", "capacity", "pipeline", "rollout",
)
OBJECTS = (
    "review", "update", "plan", "draft", "meeting", "call", "report", "status", "numbers",
    "schedule", "notes", "agenda", "request", "summary", "approval", "timeline", "feedback",
    "slides", "figures", "checklist", "followup", "question", "options", "details", "decision",
)
POSITIVE = (
    "great", "thanks", "approved", "success", "congratulations", "progress", "resolved", "kudos",
    "welcome", "excellent", "achieved", "milestone", "improved", "ready", "celebration",
)
NEGATIVE = (
    "urgent", "delay", "issue", "problem", "overdue", "escalation", "risk", "failed", "concern",
    "missing", "blocked", "incident", "complaint", "unfortunately", "warning",
)
RARE = (
    "idempotency", "amortization", "reconciliation", "arbitrage", "escheatment", "heteroskedastic",
    "indemnification", "subrogation", "novation", "depreciation", "securitization", "accrual",
)
SKILLS = ("marketing", "supply_chain", "information_technology", "finance", "operations", "sales")
COUNTRIES = ("us", "uk", "de", "fr", "in", "br", "jp", "ch")


@dataclass
class SynthConfig:
    actors: int = 1000
    externals: int = 300
    months: int = 18
    start: str = "2013-10-01T00:00:00Z"
    leaver_fraction: float = 0.13
    thread_rate: float = 0.09  # threads opened per actor-day
    broadcast_rate: float = 0.06  # announcements per actor-day
    activity_sigma: float = 0.7  # lognormal spread of per-actor activity
    activity_floor: float = 0.7
    contacts_mean: float = 12.0
    external_share: float = 0.15  # fraction of contacts outside the company
    reply_probability: float = 0.45  # mean per-ping chance an internal recipient answers
    external_reply_probability: float = 0.5
    max_pings: int = 6
    followup_hours: float = 30.0
    latency_hours: float = 8.0
    # whole-history leaver traits
    leaver_contact_factor: float = 0.5
    leaver_prompt_factor: float = 0.4  # scales the chance of *not* answering, both directions
    leaver_popularity_factor: float = 0.3  # how often others list a leaver as a contact
    external_thread_rate: float = 0.02  # threads an external opens per day per internal actor listing it
    # final-months disengagement shift
    shift: bool = True
    shift_months: int = 5
    shift_new_contact_share: float = 0.5
    shift_new_contacts: float = 2.0  # extra contacts, as a multiple of the actor's list size
    shift_alter_reply_factor: float = 0.45
    shift_volatility: float = 0.8
    # leave propensity per SD of tenure / months since promotion
    tenure_effect: float = 0.8
    promotion_effect: float = -0.6

    def validate(self) -> None:
        if self.actors < 2:
            raise ValueError("need at least two actors")
        if self.externals < 0 or self.months < 1:
            raise ValueError("externals must be >= 0 and months >= 1")
        if not 0.0 <= self.leaver_fraction < 1.0:
            raise ValueError("leaver_fraction must lie in [0, 1)")
        for name in ("thread_rate", "contacts_mean", "reply_probability", "followup_hours", "latency_hours"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.reply_probability < 1 or not 0 <= self.external_reply_probability <= 1:
            raise ValueError("reply probabilities must lie in (0, 1)")
        if self.max_pings < 1 or self.shift_months < 1:
            raise ValueError("max_pings and shift_months must be >= 1")
        if self.leaver_popularity_factor <= 0 or self.external_thread_rate < 0:
            raise ValueError("leaver_popularity_factor must be positive, external_thread_rate >= 0")
        if not 0 <= self.shift_volatility < 1:
            raise ValueError("shift_volatility must lie in [0, 1)")
        parse_timestamp(self.start)


@dataclass
class GroundTruth:
    leavers: dict[str, int]  # actor -> departure month
    hires: dict[str, str]  # hire -> actor whose seat they took
    sent: dict[str, int]  # messages emitted per sender (all senders)
    params: dict[str, dict] = field(default_factory=dict)  # per roster actor
    shift_months: dict[str, list[int]] = field(default_factory=dict)  # leaver -> shifted month indices
    emitted: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)


@dataclass
class _Seat:
    actor: str
    leaver: bool = False
    departure_month: Optional[int] = None
    depart_at: Optional[int] = None
    shift_at: Optional[int] = None
    hire: Optional[str] = None
    activity: float = 1.0
    responsiveness: float = 0.5
    latency: float = 8.0
    valence: float = 0.0  # tilt of subject words, -1..1
    contacts: list = field(default_factory=list)  # ("s", seat) or ("x", external)
    weights: Optional[np.ndarray] = None
    late_contacts: list = field(default_factory=list)
    hire_contacts: list = field(default_factory=list)
    hire_weights: Optional[np.ndarray] = None


class _Emitter:
    def __init__(self, end: int):
        self.end = end
        self.rows: list[tuple] = []
        self.count = 0

    def emit(self, ts, sender, recipients, subject, in_reply_to=None) -> Optional[str]:
        if ts >= self.end:
            return None
        self.count += 1
        mid = f"<{self.count:09d}@synth.example>"
        self.rows.append((ts, mid, sender, tuple(recipients), subject, in_reply_to))
        return mid


def _zipf_weights(k: int, rng: np.random.Generator) -> np.ndarray:
    w = 1.0 / np.arange(1, k + 1) ** 0.9
    rng.shuffle(w)
    return w / w.sum()


def _draw_contacts(rng, seat_idx, n_seats, popularity, externals, size, ext_share):
    size = max(4, size)
    n_ext = min(externals, int(rng.binomial(size, ext_share))) if externals else 0
    n_int = min(n_seats - 1, max(1, size - n_ext))
    p = popularity.copy()
    p[seat_idx] = 0.0
    p /= p.sum()
    chosen = rng.choice(n_seats, size=n_int, replace=False, p=p)
    out = [("s", int(j)) for j in chosen]
    if n_ext:
        out += [("x", int(j)) for j in rng.choice(externals, size=n_ext, replace=False)]
    return out


def _subject(rng: np.random.Generator, valence: float) -> str:
    words = [TOPICS[rng.integers(len(TOPICS))], OBJECTS[rng.integers(len(OBJECTS))]]
    p_pos = 0.25 * (1 + valence)
    p_neg = 0.25 * (1 - valence)
    for _ in range(int(rng.integers(0, 3))):
        u = rng.random()
        if u < p_pos:
            words.append(POSITIVE[rng.integers(len(POSITIVE))])
        elif u < p_pos + p_neg:
            words.append(NEGATIVE[rng.integers(len(NEGATIVE))])
    if rng.random() < 0.08:
        words.append(RARE[rng.integers(len(RARE))])
    if rng.random() < 0.5:
        words.append(f"wk{int(rng.integers(1, 53))}")
    return " ".join(words)


def generate(config: SynthConfig, seed: int):
    """Build ``(events, roster, truth)``; same config and seed give the same output."""
    config.validate()
    rng = np.random.default_rng(seed)
    start = parse_timestamp(config.start)
    months = month_windows(start, config.months)
    end = months[-1].end
    n = config.actors

    actors = [f"m{i:04d}@corp.example" for i in range(n)]
    externals = [f"x{i:04d}@partner.example" for i in range(config.externals)]

    # roster attributes
    shape = (72.0 / 52.0) ** 2
    tenure = np.round(rng.gamma(shape, 72.0 / shape, size=n)) + 1
    mslp = np.minimum(tenure, np.round(tenure * rng.beta(3.0, 2.0, size=n) + rng.normal(0, 6, size=n)).clip(0))
    rank = 1 + (rng.random(n) < 0.25).astype(int)
    skill = rng.integers(len(SKILLS), size=n)
    country = rng.integers(len(COUNTRIES), size=n)

    def z(v):
        sd = v.std()
        return (v - v.mean()) / sd if sd > 0 else v * 0

    n_leave = int(round(config.leaver_fraction * n))
    propensity = config.tenure_effect * z(tenure) + config.promotion_effect * z(mslp)
    keys = propensity + rng.gumbel(size=n)
    leaver_idx = set(np.argsort(-keys, kind="stable")[:n_leave].tolist()) if n_leave else set()

    # departures happen at the start of a month; earliest month 8 leaves room
    # for a baseline before the shifted months
    lo, hi = min(8, config.months), config.months
    seats: list[_Seat] = []
    popularity = rng.pareto(2.0, size=n) + 1.0
    for i in leaver_idx:
        popularity[i] *= config.leaver_popularity_factor
    act = rng.lognormal(-0.5 * config.activity_sigma**2, config.activity_sigma, size=n).clip(config.activity_floor)
    for i in range(n):
        seat = _Seat(actor=actors[i], activity=float(act[i]))
        base = float(np.clip(rng.beta(6, 6) * 2 * config.reply_probability, 0.05, 0.95))
        seat.responsiveness = base
        seat.latency = float(config.latency_hours * rng.lognormal(-0.125, 0.5))
        seat.valence = float(np.clip(rng.normal(0.0, 0.4), -1, 1))
        if i in leaver_idx:
            seat.leaver = True
            dep_month = int(rng.integers(lo, hi + 1))
            seat.departure_month = dep_month
            seat.depart_at = months[dep_month - 1].start
            shift_month = max(1, dep_month - config.shift_months)
            seat.shift_at = months[shift_month - 1].start if config.shift else None
            seat.hire = f"h{i:04d}@corp.example"
            seat.responsiveness = 1.0 - (1.0 - base) * config.leaver_prompt_factor
        seats.append(seat)

    for i, seat in enumerate(seats):
        size = int(round(config.contacts_mean * rng.lognormal(-0.18, 0.6)))
        if seat.leaver:
            size = max(4, int(round(size * config.leaver_contact_factor)))
        seat.contacts = _draw_contacts(rng, i, n, popularity, config.externals, size, config.external_share)
        seat.weights = _zipf_weights(len(seat.contacts), rng)
        if seat.leaver:
            extra = max(2, int(round(len(seat.contacts) * config.shift_new_contacts)))
            have = {c for c in seat.contacts}
            pool = [("s", j) for j in range(n) if j != i and ("s", j) not in have]
            if pool:
                # new contacts lean toward well-connected colleagues
                w = np.array([popularity[j] for _, j in pool])
                pick = rng.choice(len(pool), size=min(extra, len(pool)), replace=False, p=w / w.sum())
                seat.late_contacts = [pool[j] for j in pick]
            hire_size = int(round(config.contacts_mean * rng.lognormal(-0.18, 0.6)))
            seat.hire_contacts = _draw_contacts(rng, i, n, popularity, config.externals, hire_size, config.external_share)
            seat.hire_weights = _zipf_weights(len(seat.hire_contacts), rng)

    ext_latency = config.latency_hours * 1.5

    def occupant(seat: _Seat, t: int) -> tuple[str, bool, bool]:
        """(address, is the original roster actor, shifted) at time t."""
        if seat.leaver and t >= seat.depart_at:
            return seat.hire, False, False
        shifted = seat.leaver and seat.shift_at is not None and t >= seat.shift_at
        return seat.actor, True, shifted

    out = _Emitter(end)

    def quiet(t: int) -> bool:
        return ((t - start) // WEEK) % 2 == 1

    def defer(t: int) -> int:
        """A shifted leaver holds messages written in a quiet week for the next busy one."""
        if quiet(t) and rng.random() < config.shift_volatility:
            return start + ((t - start) // WEEK + 1) * WEEK + int(rng.integers(DAY))
        return t

    def pick_target(seat: _Seat, original: bool, shifted: bool):
        if not original:
            return seat.hire_contacts[rng.choice(len(seat.hire_contacts), p=seat.hire_weights)]
        if shifted and seat.late_contacts and rng.random() < config.shift_new_contact_share:
            return seat.late_contacts[rng.integers(len(seat.late_contacts))]
        return seat.contacts[rng.choice(len(seat.contacts), p=seat.weights)]

    def thread(i: int, t0: int):
        seat = seats[i]
        sender, original, shifted = occupant(seat, t0)
        kind, j = pick_target(seat, original, shifted)
        subject = _subject(rng, seat.valence if original else 0.0)
        if kind == "x":
            target = externals[j]
            q = config.external_reply_probability
            lat = ext_latency
            tseat = None
        else:
            tseat = seats[j]
            target, t_orig, _ = occupant(tseat, t0)
            # a hire in a leaver's seat answers like an average colleague
            q = tseat.responsiveness if t_orig else config.reply_probability
            lat = tseat.latency
        if original and seat.leaver:
            q = 1.0 - (1.0 - q) * config.leaver_prompt_factor
            if shifted:
                q *= config.shift_alter_reply_factor
        t = t0
        last = None
        for k in range(config.max_pings):
            if shifted:
                t = defer(t)
            if occupant(seat, t)[0] != sender:
                return
            if tseat is not None and occupant(tseat, t)[0] != target:
                return
            last = out.emit(t, sender, (target,), subject)
            if last is None:
                return
            if rng.random() < q:
                t_reply = t + int(rng.exponential(lat * HOUR)) + 60
                if tseat is not None:
                    who, _, t_shifted = occupant(tseat, t_reply)
                    if t_shifted:
                        t_reply = defer(t_reply)
                        who = occupant(tseat, t_reply)[0]
                    if who != target:
                        return
                if occupant(seat, t_reply)[0] != sender:
                    return
                out.emit(t_reply, target, (sender,), "Re: " + subject, last)
                return
            t += int(HOUR * (4 + rng.exponential(config.followup_hours)))

    listers: list[list[int]] = [[] for _ in range(config.externals)]
    for i, seat in enumerate(seats):
        for kind, j in seat.contacts:
            if kind == "x":
                listers[j].append(i)

    # every partner deals with a few people inside, so it is never a private dead end
    for j, who in enumerate(listers):
        while len(who) < min(3, n):
            i = int(rng.integers(n))
            if i not in who:
                who.append(i)
                seats[i].contacts.append(("x", j))
                seats[i].weights = _zipf_weights(len(seats[i].contacts), rng)
    n_listers = np.array([max(len(v), 5) for v in listers], dtype=float)

    def external_thread(x: int, t0: int):
        if not listers[x]:
            return
        # the first addressee is the one expected to answer; the rest are copied
        k = min(len(listers[x]), 1 + int(rng.binomial(2, 0.5)))
        picks = rng.choice(len(listers[x]), size=k, replace=False)
        tseat = seats[listers[x][picks[0]]]
        target, t_orig, _ = occupant(tseat, t0)
        cc_seats = [seats[listers[x][p]] for p in picks[1:]]
        copied = [occupant(c, t0)[0] for c in cc_seats]
        q = tseat.responsiveness if t_orig else config.reply_probability
        sender = externals[x]
        subject = _subject(rng, 0.0)
        t = t0
        for _ in range(config.max_pings):
            if occupant(tseat, t)[0] != target:
                return
            copied = [occupant(c, t)[0] for c in cc_seats]
            last = out.emit(t, sender, (target, *copied), subject)
            if last is None:
                return
            if rng.random() < q:
                t_reply = t + int(rng.exponential(tseat.latency * HOUR)) + 60
                who, _, t_shifted = occupant(tseat, t_reply)
                if t_shifted:
                    t_reply = defer(t_reply)
                    who = occupant(tseat, t_reply)[0]
                if who == target:
                    out.emit(t_reply, target, (sender,), "Re: " + subject, last)
                return
            t += int(HOUR * (4 + rng.exponential(config.followup_hours)))

    def broadcast(i: int, t0: int):
        seat = seats[i]
        sender, original, shifted = occupant(seat, t0)
        if shifted:
            t0 = defer(t0)
            sender, original, shifted = occupant(seat, t0)
        pool = seat.contacts if original else seat.hire_contacts
        k = min(len(pool), int(rng.integers(3, 9)))
        if k < 1:
            return
        picks = rng.choice(len(pool), size=k, replace=False)
        recips = []
        for p in sorted(picks.tolist()):
            kind, j = pool[p]
            recips.append(externals[j] if kind == "x" else occupant(seats[j], t0)[0])
        recips = [r for r in dict.fromkeys(recips) if r != sender]
        if recips:
            out.emit(t0, sender, recips, _subject(rng, seat.valence if original else 0.0))

    base_act = np.array([s.activity for s in seats])
    n_days = (end - start) // DAY
    for d in range(n_days):
        day0 = start + d * DAY
        week_parity = ((day0 - start) // WEEK) % 2
        mult = base_act.copy()
        for i, s in enumerate(seats):
            if s.leaver and s.shift_at is not None and s.shift_at <= day0 < s.depart_at:
                mult[i] *= (1 + config.shift_volatility) if week_parity == 0 else (1 - config.shift_volatility)
        threads = rng.poisson(config.thread_rate * mult)
        casts = rng.poisson(config.broadcast_rate * mult)
        for i in np.flatnonzero(threads + casts):
            for _ in range(int(threads[i])):
                thread(int(i), day0 + int(rng.integers(DAY)))
            for _ in range(int(casts[i])):
                broadcast(int(i), day0 + int(rng.integers(DAY)))
        if config.externals:
            opened = rng.poisson(config.external_thread_rate * n_listers)
            for x in np.flatnonzero(opened):
                for _ in range(int(opened[x])):
                    external_thread(int(x), day0 + int(rng.integers(DAY)))

    out.rows.sort(key=lambda r: (r[0], r[1]))
    events = [MessageEvent(mid, ts, s, rec, subj, irt) for ts, mid, s, rec, subj, irt in out.rows]
    sent: dict[str, int] = {}
    for e in events:
        sent[e.sender] = sent.get(e.sender, 0) + 1

    roster = []
    truth = GroundTruth(leavers={}, hires={}, sent=dict(sorted(sent.items())), emitted=len(events))
    for i, seat in enumerate(seats):
        dep = None
        if seat.leaver:
            dep = seat.departure_month
            truth.leavers[seat.actor] = dep
            truth.hires[seat.hire] = seat.actor
            if seat.shift_at is not None:
                first = next(m for m, w in enumerate(months, start=1) if w.start == seat.shift_at)
                truth.shift_months[seat.actor] = list(range(first, dep))
        roster.append(
            RosterRecord(
                actor=seat.actor,
                left_company=seat.leaver,
                departure_month=dep,
                rank=int(rank[i]),
                tenure=float(tenure[i]),
                months_since_promotion=float(mslp[i]),
                skill=SKILLS[skill[i]],
                country=COUNTRIES[country[i]],
            )
        )
        truth.params[seat.actor] = {
            "activity": round(seat.activity, 6),
            "responsiveness": round(seat.responsiveness, 6),
            "latency_hours": round(seat.latency, 6),
            "contacts": len(seat.contacts),
            "late_contacts": len(seat.late_contacts),
        }
    return events, roster, truth


def write_corpus(events, roster, truth: GroundTruth, out_dir: str | os.PathLike) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"events": out / "events.csv", "roster": out / "roster.csv", "truth": out / "truth.json"}
    write_event_log(events, paths["events"])
    write_roster(roster, paths["roster"])
    paths["truth"].write_text(truth.to_json() + "\n", encoding="utf-8")
    return paths


def span_of(config: SynthConfig) -> tuple[int, int]:
    start = parse_timestamp(config.start)
    return start, month_windows(start, config.months)[-1].end
