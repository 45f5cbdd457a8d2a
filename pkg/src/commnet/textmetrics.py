"""Subject-line sentiment, emotionality and complexity."""

from __future__ import annotations

import csv
import math
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from statistics import fmean
from typing import Iterable, Mapping, Optional, Protocol, Sequence

from .ingest import ActorId, MessageEvent, normalize_subject
from .tempograph import Window, events_in

_TOKEN = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.casefold()) if text else []


class ValenceScorer(Protocol):
    """Anything that maps a case-folded token to a valence in [-1, 1] or None."""

    def valence(self, token: str) -> Optional[float]: ...


@dataclass(frozen=True)
class SentimentLexicon:
    words: Mapping[str, float]
    language: str = "en"

    def __post_init__(self):
        folded = {}
        for w, v in self.words.items():
            v = float(v)
            if not -1.0 <= v <= 1.0 or math.isnan(v):
                raise ValueError(f"valence of {w!r} outside [-1, 1]: {v}")
            folded[w.casefold()] = v
        object.__setattr__(self, "words", folded)

    def valence(self, token: str) -> Optional[float]:
        return self.words.get(token.casefold())


def load_lexicon(path: Optional[str | os.PathLike] = None, language: str = "en") -> SentimentLexicon:
    """Read a ``word,valence`` CSV; without a path the bundled English list is used."""
    if path is None:
        text = resources.files("commnet.data").joinpath("lexicon.csv").read_text(encoding="utf-8")
        rows = list(csv.DictReader(text.splitlines()))
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    words = {}
    for row in rows:
        words[row["word"].strip()] = float(row["valence"])
    return SentimentLexicon(words, language)


def _pstdev(vals: Sequence[float]) -> float:
    m = math.fsum(vals) / len(vals)
    return math.sqrt(math.fsum((v - m) ** 2 for v in vals) / len(vals))


def _mapped(tokens: Iterable[str], scorer: ValenceScorer) -> list[float]:
    out = []
    for t in tokens:
        v = scorer.valence(t)
        if v is not None:
            out.append((v + 1.0) / 2.0)
    return out


def sentiment(text: str, lexicon: ValenceScorer) -> float:
    """Mean matched valence rescaled to [0, 1]; 0.5 when nothing matches."""
    vals = _mapped(tokenize(text), lexicon)
    return fmean(vals) if vals else 0.5


def emotionality(text: str, lexicon: ValenceScorer) -> float:
    """Population SD of the rescaled token valences (0 below two matches)."""
    vals = _mapped(tokenize(text), lexicon)
    return _pstdev(vals) if len(vals) >= 2 else 0.0


@dataclass(frozen=True)
class CorpusStats:
    documents: int
    df: Mapping[str, int] = field(repr=False)

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "CorpusStats":
        n = 0
        df: dict[str, int] = {}
        for t in texts:
            n += 1
            for tok in set(tokenize(t)):
                df[tok] = df.get(tok, 0) + 1
        return cls(n, df)

    @classmethod
    def from_subjects(cls, subjects: Iterable[str]) -> "CorpusStats":
        """One document per subject line, reply/forward markers removed."""
        return cls.from_texts(normalize_subject(s) for s in subjects)

    def surprisal(self, token: str) -> float:
        return math.log(self.documents / self.df.get(token, 1))


def complexity(text: str, corpus: CorpusStats) -> float:
    """Mean per-token ``ln(N / df)``; tokens unseen in the corpus use df = 1."""
    if corpus.documents <= 0:
        raise ValueError("corpus is empty")
    toks = tokenize(text)
    if not toks:
        return 0.0
    return fmean(corpus.surprisal(t) for t in toks)


@dataclass(frozen=True)
class TextMetricsRow:
    actor: ActorId
    messages: int
    sentiment: float
    emotionality: float
    complexity: float
    sentiment_spread: float  # SD of per-message sentiment across messages


def actor_text_metrics(
    events: Sequence[MessageEvent],
    actor: ActorId,
    window: Optional[Window],
    lexicon: ValenceScorer,
    corpus: CorpusStats,
) -> Optional[TextMetricsRow]:
    """Averages of per-message scores over subjects the actor sent.

    Subjects are scored without their reply/forward markers. Messages whose
    subject has no tokens are not scoreable and are skipped; returns None
    when nothing is left.
    """
    if window is not None:
        events = events_in(events, window)
    return _row(actor, [e.subject for e in events if e.sender == actor], lexicon, corpus)


def message_scores(subject: str, lexicon: ValenceScorer, corpus: CorpusStats) -> Optional[tuple[float, float, float]]:
    """``(sentiment, emotionality, complexity)`` of one subject, None if it has no tokens."""
    toks = tokenize(subject)
    if not toks:
        return None
    vals = _mapped(toks, lexicon)
    sent = fmean(vals) if vals else 0.5
    emo = _pstdev(vals) if len(vals) >= 2 else 0.0
    comp = fmean(corpus.surprisal(t) for t in toks)
    return sent, emo, comp


def _row(actor, subjects, lexicon, corpus, cache=None) -> Optional[TextMetricsRow]:
    sents, emos, comps = [], [], []
    for subj in subjects:
        subj = normalize_subject(subj)
        if cache is not None and subj in cache:
            sc = cache[subj]
        else:
            sc = message_scores(subj, lexicon, corpus)
            if cache is not None:
                cache[subj] = sc
        if sc is None:
            continue
        sents.append(sc[0])
        emos.append(sc[1])
        comps.append(sc[2])
    if not sents:
        return None
    return TextMetricsRow(actor, len(sents), fmean(sents), fmean(emos), fmean(comps), _pstdev(sents))


def text_metrics_table(
    events: Sequence[MessageEvent],
    actors: Sequence[ActorId],
    window: Optional[Window],
    lexicon: ValenceScorer,
    corpus: CorpusStats,
    cache: Optional[dict] = None,
) -> dict[ActorId, Optional[TextMetricsRow]]:
    """:func:`actor_text_metrics` for many actors with one pass over the events.

    ``cache`` may be shared across calls that use the same lexicon and corpus.
    """
    if window is not None:
        events = events_in(events, window)
    by_actor: dict[ActorId, list[str]] = {a: [] for a in actors}
    for e in events:
        bucket = by_actor.get(e.sender)
        if bucket is not None:
            bucket.append(e.subject)
    if cache is None:
        cache = {}
    return {a: _row(a, by_actor[a], lexicon, corpus, cache) for a in actors}
