import csv
import json

import pytest

from commnet.cli import main

CONFIG = '''
[synth]
actors = 60
externals = 15
months = 10
'''


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfg = d / "synth.toml"
    cfg.write_text(CONFIG, encoding="utf-8")
    assert main(["synth", "--config", str(cfg), "--seed", "5", "--out", str(d / "corpus")]) == 0
    return d, cfg


def test_synth_outputs(corpus):
    d, _ = corpus
    names = sorted(p.name for p in (d / "corpus").iterdir())
    assert names == ["events.csv", "roster.csv", "truth.json"]
    truth = json.loads((d / "corpus" / "truth.json").read_text())
    with open(d / "corpus" / "events.csv", newline="") as fh:
        assert sum(1 for _ in csv.reader(fh)) - 1 == truth["emitted"]


def test_analyze_writes_outputs_deterministically(corpus):
    d, cfg = corpus
    outs = []
    for k in range(2):
        out = d / f"out{k}"
        code = main(["analyze", "--events", str(d / "corpus/events.csv"), "--roster", str(d / "corpus/roster.csv"),
                     "--config", str(cfg), "--out", str(out)])
        assert code == 0
        outs.append(out)
    for name in ("features.csv", "report.json", "report.txt"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    report = json.loads((outs[0] / "report.json").read_text())
    assert report["meta"]["roster"] == 60 and report["meta"]["rejected"] == 0
    assert "M8" in report["models"]


def test_analyze_without_config_uses_event_span(corpus):
    d, _ = corpus
    out = d / "nocfg"
    assert main(["analyze", "--events", str(d / "corpus/events.csv"), "--roster", str(d / "corpus/roster.csv"), "--out", str(out)]) == 0
    meta = json.loads((out / "report.json").read_text())["meta"]
    assert meta["span_start"] % 86400 == 0 and meta["span_end"] % 86400 == 0


def test_input_errors_exit_2(corpus, tmp_path, capsys):
    d, cfg = corpus
    ev, ro = str(d / "corpus/events.csv"), str(d / "corpus/roster.csv")
    assert main(["analyze", "--events", str(tmp_path / "missing.csv"), "--roster", ro, "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("colour = 'blue'\n")
    assert main(["analyze", "--events", ev, "--roster", ro, "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["synth", "--seed", "-1", "--out", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_degenerate_exit_3(corpus, tmp_path):
    d, cfg = corpus
    # drop every leaver from the roster: the cohort comparison has nothing to compare
    rows = list(csv.DictReader(open(d / "corpus/roster.csv", newline="")))
    stayers = [r for r in rows if r["left_company"] in ("0", "false", "False")]
    assert 0 < len(stayers) < len(rows)
    roster = tmp_path / "roster.csv"
    with open(roster, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(stayers)
    code = main(["analyze", "--events", str(d / "corpus/events.csv"), "--roster", str(roster),
                 "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert code == 3


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count(" ok") == 4
