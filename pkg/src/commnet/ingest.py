"""Parsing of raw message sources into canonical, time-sorted event lists.

Only subject lines are retained; message bodies are never read.
"""

from __future__ import annotations

import csv
import io
import mailbox
import os
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from email.utils import getaddresses, parsedate_to_datetime
from functools import lru_cache
from typing import Iterable, Mapping, Optional, TextIO, Union

EVENT_COLUMNS = ("message_id", "timestamp", "sender", "to", "cc", "subject", "in_reply_to")
ROSTER_COLUMNS = (
    "actor",
    "left_company",
    "departure_month",
    "rank",
    "tenure",
    "months_since_promotion",
    "skill",
    "country",
)

ActorId = str
ThreadKey = str


class AddressError(ValueError):
    """Raised when a participant string carries no usable address token."""


class InputError(ValueError):
    """Raised for structurally unusable input files (missing header, bad roster)."""


@dataclass(frozen=True, slots=True)
class MessageEvent:
    message_id: str
    timestamp: int  # seconds since the Unix epoch, UTC
    sender: ActorId
    recipients: tuple[ActorId, ...]
    subject: str = ""
    in_reply_to: Optional[str] = None

    @property
    def when(self) -> datetime:
        return datetime.fromtimestamp(self.timestamp, tz=timezone.utc)


@dataclass(frozen=True, slots=True)
class RejectedLine:
    line_number: int
    reason: str
    raw: str


@dataclass(frozen=True, slots=True)
class RosterRecord:
    actor: ActorId
    left_company: bool
    departure_month: Optional[int]
    rank: int
    tenure: float
    months_since_promotion: float
    skill: str = ""
    country: str = ""

    def __post_init__(self):
        if self.left_company != (self.departure_month is not None):
            raise InputError(f"{self.actor}: departure_month must be set iff left_company")
        if self.tenure < 0 or self.months_since_promotion < 0:
            raise InputError(f"{self.actor}: tenure and months_since_promotion must be >= 0")


# ---------------------------------------------------------------------------
# canonical forms

_ANGLE = re.compile(r"<([^<>]*)>")
_TRIM = " \t\r\n,;\"'"
_SPACE = re.compile(r"\s")


@lru_cache(maxsize=1 << 16)
def canonicalize_address(raw: str) -> ActorId:
    """Reduce ``"Jane Doe <JDoe@Corp.com>"`` style strings to ``"jdoe@corp.com"``."""
    if raw is None or not raw.strip():
        raise AddressError("empty participant")
    text = raw.strip()
    m = _ANGLE.search(text)
    if m:
        token = m.group(1).strip(_TRIM)
    else:
        candidates = [t.strip(_TRIM) for t in text.split()]
        candidates = [t for t in candidates if "@" in t]
        if len(candidates) != 1:
            raise AddressError(f"no address token in {raw!r}")
        token = candidates[0]
    if not token or "@" not in token or _SPACE.search(token):
        raise AddressError(f"no address token in {raw!r}")
    return token.lower()


_WS = re.compile(r"\s+")
_COUNTER = r"(?:\[\d+\]|\(\d+\))"
_MARKERS = re.compile(
    rf"^(?:(?:re|fwd?)\s*{_COUNTER}?\s*:\s*(?:{_COUNTER}\s*)?)+",
)


@lru_cache(maxsize=1 << 18)
def normalize_subject(subject: Optional[str]) -> ThreadKey:
    """Thread key of a subject: case-folded, reply/forward prefixes removed."""
    if not subject:
        return ""
    text = _WS.sub(" ", subject.casefold()).strip()
    text = _MARKERS.sub("", text)
    return text.strip()


# ---------------------------------------------------------------------------
# CSV event log

_TS = re.compile(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z")


def parse_timestamp(text: str) -> int:
    if not _TS.fullmatch(text):
        raise ValueError(f"bad timestamp {text!r}")
    dt = datetime.fromisoformat(text[:-1]).replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _resolve(raw: str, aliases: Mapping[str, str]) -> ActorId:
    actor = canonicalize_address(raw)
    return aliases.get(actor, actor)


def _split_addresses(field: str) -> list[str]:
    return [part for part in (field or "").split(";") if part.strip()]


class _EventBuilder:
    """Shared validation for every reader; tracks seen ids for duplicate removal."""

    def __init__(self, aliases: Optional[Mapping[str, str]] = None):
        self.aliases = dict(aliases or {})
        self.seen: set[str] = set()
        self.events: list[MessageEvent] = []
        self.rejected: list[RejectedLine] = []

    def reject(self, line_number: int, reason: str, raw: str) -> None:
        self.rejected.append(RejectedLine(line_number, reason, raw))

    def add(
        self,
        line_number: int,
        raw: str,
        message_id: str,
        timestamp: Optional[int],
        sender: str,
        recipients: Iterable[str],
        subject: str,
        in_reply_to: str,
    ) -> None:
        message_id = (message_id or "").strip()
        if not message_id:
            return self.reject(line_number, "missing_message_id", raw)
        if timestamp is None:
            return self.reject(line_number, "bad_timestamp", raw)
        if not (sender or "").strip():
            return self.reject(line_number, "empty_sender", raw)
        try:
            src = _resolve(sender, self.aliases)
        except AddressError:
            return self.reject(line_number, "bad_sender", raw)
        dsts: list[str] = []
        try:
            for r in recipients:
                a = _resolve(r, self.aliases)
                if a != src and a not in dsts:
                    dsts.append(a)
        except AddressError:
            return self.reject(line_number, "bad_recipient", raw)
        if not dsts:
            return self.reject(line_number, "no_recipients", raw)
        if message_id in self.seen:
            return self.reject(line_number, "duplicate_message_id", raw)
        self.seen.add(message_id)
        self.events.append(
            MessageEvent(
                message_id=message_id,
                timestamp=timestamp,
                sender=src,
                recipients=tuple(dsts),
                subject=subject or "",
                in_reply_to=(in_reply_to or "").strip() or None,
            )
        )

    def result(self) -> tuple[list[MessageEvent], list[RejectedLine]]:
        events = sorted(self.events, key=lambda e: (e.timestamp, e.message_id))
        return events, self.rejected


def _open_text(source: Union[str, os.PathLike, TextIO]):
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8")
    return source


def parse_event_log(
    source: Union[str, os.PathLike, TextIO],
    aliases: Optional[Mapping[str, str]] = None,
) -> tuple[list[MessageEvent], list[RejectedLine]]:
    """Read the event CSV; returns ``(events, rejected)``.

    Events come back sorted by ``(timestamp, message_id)``. Bad rows never
    abort the read; each becomes a :class:`RejectedLine` with a reason code.
    A missing or incomplete header raises :class:`InputError`.
    """
    stream = _open_text(source)
    try:
        reader = csv.reader(stream)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(EVENT_COLUMNS):
            raise InputError(f"event log header must be {','.join(EVENT_COLUMNS)}")
        builder = _EventBuilder(aliases)
        for row in reader:
            line = reader.line_num
            raw = ",".join(row)
            if len(row) != len(EVENT_COLUMNS):
                builder.reject(line, "malformed_row", raw)
                continue
            mid, ts, sender, to, cc, subject, irt = row
            try:
                stamp = parse_timestamp(ts.strip())
            except ValueError:
                stamp = None
            builder.add(line, raw, mid, stamp, sender, _split_addresses(to) + _split_addresses(cc), subject, irt)
        return builder.result()
    finally:
        if stream is not source:
            stream.close()


def write_event_log(events: Iterable[MessageEvent], target: Union[str, os.PathLike, TextIO]) -> None:
    """Write events in the ingest CSV schema (all recipients go to ``to``)."""
    stream = open(target, "w", newline="", encoding="utf-8") if isinstance(target, (str, os.PathLike)) else target
    try:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for e in events:
            w.writerow(
                (e.message_id, format_timestamp(e.timestamp), e.sender, ";".join(e.recipients), "", e.subject, e.in_reply_to or "")
            )
    finally:
        if stream is not target:
            stream.close()


def parse_mbox(path: Union[str, os.PathLike], aliases: Optional[Mapping[str, str]] = None):
    """mbox reader mapping the usual headers onto :class:`MessageEvent`."""
    builder = _EventBuilder(aliases)
    for i, msg in enumerate(mailbox.mbox(os.fspath(path), create=False), start=1):
        raw = f"{msg.get('Message-ID', '')} {msg.get('Date', '')}"
        try:
            dt = parsedate_to_datetime(msg.get("Date", ""))
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=timezone.utc)
            stamp = int(dt.timestamp())
        except (TypeError, ValueError, IndexError):
            stamp = None
        pairs = getaddresses(msg.get_all("To", []) + msg.get_all("Cc", []))
        recipients = [addr or name for name, addr in pairs if addr or name]
        _, from_addr = getaddresses([msg.get("From", "")])[0]
        mid = (msg.get("Message-ID") or "").strip()
        irt = (msg.get("In-Reply-To") or "").strip()
        builder.add(i, raw, mid, stamp, from_addr, recipients, str(msg.get("Subject") or ""), irt)
    return builder.result()


# ---------------------------------------------------------------------------
# roster and aliases

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise InputError(f"bad boolean {text!r}")


def read_roster(
    source: Union[str, os.PathLike, TextIO],
    aliases: Optional[Mapping[str, str]] = None,
) -> dict[ActorId, RosterRecord]:
    aliases = aliases or {}
    stream = _open_text(source)
    try:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != list(ROSTER_COLUMNS):
            raise InputError(f"roster header must be {','.join(ROSTER_COLUMNS)}")
        roster: dict[ActorId, RosterRecord] = {}
        for row in reader:
            try:
                actor = _resolve(row["actor"], aliases)
                left = _parse_bool(row["left_company"])
                dep = row["departure_month"].strip()
                rec = RosterRecord(
                    actor=actor,
                    left_company=left,
                    departure_month=int(dep) if dep else None,
                    rank=int(row["rank"]),
                    tenure=float(row["tenure"]),
                    months_since_promotion=float(row["months_since_promotion"]),
                    skill=row["skill"].strip(),
                    country=row["country"].strip(),
                )
            except (AddressError, ValueError, TypeError) as exc:
                raise InputError(f"roster line {reader.line_num}: {exc}") from exc
            if actor in roster:
                raise InputError(f"roster line {reader.line_num}: duplicate actor {actor}")
            roster[actor] = rec
        return roster
    finally:
        if stream is not source:
            stream.close()


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_roster(records: Iterable[RosterRecord], target: Union[str, os.PathLike, TextIO]) -> None:
    stream = open(target, "w", newline="", encoding="utf-8") if isinstance(target, (str, os.PathLike)) else target
    try:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(ROSTER_COLUMNS)
        for r in records:
            w.writerow(
                (
                    r.actor,
                    "1" if r.left_company else "0",
                    "" if r.departure_month is None else r.departure_month,
                    r.rank,
                    _fmt_num(r.tenure),
                    _fmt_num(r.months_since_promotion),
                    r.skill,
                    r.country,
                )
            )
    finally:
        if stream is not target:
            stream.close()


def read_aliases(source: Union[str, os.PathLike, TextIO]) -> dict[str, ActorId]:
    """Alias CSV with header ``alias,actor``; both sides are canonicalized."""
    stream = _open_text(source)
    try:
        reader = csv.DictReader(stream)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["alias", "actor"]:
            raise InputError("alias map header must be alias,actor")
        out = {}
        for row in reader:
            try:
                out[canonicalize_address(row["alias"])] = canonicalize_address(row["actor"])
            except AddressError as exc:
                raise InputError(f"alias line {reader.line_num}: {exc}") from exc
        return out
    finally:
        if stream is not source:
            stream.close()


def parse_event_text(text: str, aliases: Optional[Mapping[str, str]] = None):
    """Convenience wrapper for in-memory CSV text."""
    return parse_event_log(io.StringIO(text), aliases)
