"""Command line entry point: ``commnet analyze | synth | selftest``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import oracles
from .analysis import build_report, report_json, report_text
from .config import load_config
from .features import compute_feature_table, write_features
from .ingest import AddressError, InputError, parse_event_log, read_aliases, read_roster
from .stats import DegenerateStatisticError
from .synthcorpus import generate, write_corpus
from .tempograph import DAY, Window
from .textmetrics import load_lexicon

log = logging.getLogger("commnet")

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3


def _event_span(events) -> Window:
    """Whole UTC days from the first to the last event."""
    first = events[0].timestamp // DAY * DAY
    last = events[-1].timestamp // DAY * DAY + DAY
    return Window(first, last)


def analyze(events_path, roster_path, config_path, out_dir) -> int:
    cfg = load_config(config_path)
    aliases = read_aliases(cfg.aliases) if cfg.aliases else None
    events, rejected = parse_event_log(events_path, aliases)
    if rejected:
        log.warning("%d event lines rejected", len(rejected))
    roster = read_roster(roster_path, aliases)
    if not roster:
        raise InputError("roster is empty")
    if cfg.span_start is not None:
        span = Window(cfg.span_start, cfg.span_end)
    elif events:
        span = _event_span(events)
    else:
        raise InputError("no usable events and no span configured")
    lexicon = load_lexicon(cfg.lexicon) if cfg.lexicon else load_lexicon()
    try:
        rows = compute_feature_table(events, roster, span, cfg.weekly_anchor, lexicon, cfg.month_days)
    except ValueError as exc:
        # bad span / anchor combinations surface from the window helpers
        raise InputError(str(exc)) from None
    meta = {
        "events": len(events),
        "rejected": len(rejected),
        "roster": len(roster),
        "span_start": span.start,
        "span_end": span.end,
    }
    report = build_report(rows, cfg.models, cfg.alpha, meta)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_features(rows, out / "features.csv")
    (out / "report.json").write_text(report_json(report), encoding="utf-8")
    (out / "report.txt").write_text(report_text(report), encoding="utf-8")
    return EXIT_OK


def synth(config_path, seed: int, out_dir) -> int:
    cfg = load_config(config_path)
    events, roster, truth = generate(cfg.synth, seed)
    paths = write_corpus(events, roster, truth, out_dir)
    log.info("wrote %d events to %s", len(events), paths["events"])
    return EXIT_OK


def selftest() -> int:
    failed = 0
    for name, check in oracles.SUITES.items():
        errors = check()
        print(f"{name:14s} {'ok' if not errors else f'FAILED ({len(errors)})'}")
        for e in errors[:5]:
            print("   ", e)
        failed += bool(errors)
    return EXIT_OK if not failed else 1


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="commnet", description="E-mail network features and leaver analysis.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="compute features and the statistical report")
    a.add_argument("--events", required=True)
    a.add_argument("--roster", required=True)
    a.add_argument("--config")
    a.add_argument("--out", required=True)

    s = sub.add_parser("synth", help="write a synthetic corpus")
    s.add_argument("--config")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--out", required=True)

    sub.add_parser("selftest", help="compare fast metrics against brute-force oracles")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "analyze":
            return analyze(args.events, args.roster, args.config, args.out)
        if args.command == "synth":
            if args.seed < 0:
                raise InputError("seed must be non-negative")
            return synth(args.config, args.seed, args.out)
        return selftest()
    except DegenerateStatisticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, AddressError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
