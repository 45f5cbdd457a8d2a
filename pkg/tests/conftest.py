import pytest

from commnet.ingest import MessageEvent, parse_timestamp
from commnet.synthcorpus import SynthConfig, generate, span_of
from commnet.tempograph import Window

T0 = parse_timestamp("2014-01-06T00:00:00Z")
HOUR = 3600


def ev(mid, t, sender, *recipients, subject="", irt=None):
    """Compact event constructor; ``t`` is hours after T0."""
    return MessageEvent(str(mid), T0 + int(round(t * HOUR)), sender, tuple(recipients), subject, irt)


SMALL = SynthConfig(actors=60, externals=15, months=10)


@pytest.fixture(scope="session")
def small_corpus():
    events, roster, truth = generate(SMALL, 5)
    return events, {r.actor: r for r in roster}, truth, Window(*span_of(SMALL))


ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the summary prints them all at the end of the run."""

    def record(name, ok, detail=""):
        ACCEPTANCE.append((name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name:28s} {detail}")
