"""Pipeline configuration read from a TOML file.

Example::

    span_start = "2013-10-01T00:00:00Z"
    span_end = "2015-04-01T00:00:00Z"
    weekly_anchor = "2013-10-01T00:00:00Z"   # optional, defaults to span_start
    month_days = 30                          # optional, calendar months otherwise
    lexicon = "lexicon.csv"                  # optional, bundled list otherwise
    aliases = "aliases.csv"                  # optional
    alpha = 0.05

    [[models]]
    name = "M8"
    columns = ["tenure", "months_since_promotion", "ego_nudges", "alter_nudges", "closeness"]

    [synth]
    actors = 1000
    months = 18

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analysis import DEFAULT_MODELS, ModelSpec
from .ingest import InputError, parse_timestamp
from .synthcorpus import SynthConfig, span_of

_KEYS = {"span_start", "span_end", "weekly_anchor", "month_days", "lexicon", "aliases", "alpha", "models", "synth"}


@dataclass
class PipelineConfig:
    span_start: Optional[int] = None
    span_end: Optional[int] = None
    weekly_anchor: Optional[int] = None
    month_days: Optional[int] = None
    lexicon: Optional[Path] = None
    aliases: Optional[Path] = None
    alpha: float = 0.05
    models: tuple[ModelSpec, ...] = DEFAULT_MODELS
    synth: SynthConfig = field(default_factory=SynthConfig)

    def span(self) -> tuple[int, int]:
        """Configured span, or the span the synthetic generator would cover."""
        if self.span_start is not None and self.span_end is not None:
            return self.span_start, self.span_end
        return span_of(self.synth)


def _ts(doc, key) -> Optional[int]:
    v = doc.get(key)
    if v is None:
        return None
    try:
        return parse_timestamp(str(v))
    except ValueError as exc:
        raise InputError(f"config {key}: {exc}") from None


def load_config(path: Optional[str | os.PathLike]) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    unknown = set(doc) - _KEYS
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    base = path.parent

    def _path(key):
        v = doc.get(key)
        return None if v is None else (base / v)

    cfg = PipelineConfig(
        span_start=_ts(doc, "span_start"),
        span_end=_ts(doc, "span_end"),
        weekly_anchor=_ts(doc, "weekly_anchor"),
        month_days=doc.get("month_days"),
        lexicon=_path("lexicon"),
        aliases=_path("aliases"),
        alpha=float(doc.get("alpha", 0.05)),
    )
    if (cfg.span_start is None) != (cfg.span_end is None):
        raise InputError("span_start and span_end must be given together")
    if cfg.span_start is not None and cfg.span_end <= cfg.span_start:
        raise InputError("span_end must be after span_start")
    if cfg.month_days is not None and (not isinstance(cfg.month_days, int) or cfg.month_days < 1):
        raise InputError("month_days must be a positive integer")
    if not 0 < cfg.alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    if "models" in doc:
        try:
            cfg.models = tuple(ModelSpec(str(m["name"]), tuple(m["columns"])) for m in doc["models"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad model spec: {exc}") from None
    if "synth" in doc:
        names = {f.name for f in fields(SynthConfig)}
        extra = set(doc["synth"]) - names
        if extra:
            raise InputError(f"unknown synth keys: {sorted(extra)}")
        cfg.synth = SynthConfig(**doc["synth"])
        try:
            cfg.synth.validate()
        except ValueError as exc:
            raise InputError(f"synth config: {exc}") from None
    return cfg
