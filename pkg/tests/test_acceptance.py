"""One test per acceptance criterion, each recording a PASS/FAIL line."""

import json
import os
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest
from scipy import stats as sps

from commnet import oracles
from commnet.analysis import predeparture_shift
from commnet.cli import main
from commnet.features import METRICS, compute_feature_table
from commnet.stats import DegenerateStatisticError, add_intercept, logit_fit, paired_t, pearson, welch_t
from commnet.specfun import t_cdf
from commnet.synthcorpus import SynthConfig, generate, span_of
from commnet.tempograph import Window


def test_betweenness_oracle(criterion):
    t0 = time.perf_counter()
    errors = oracles.check_betweenness(seed=1, graphs=100, n_max=6, tol=1e-9)
    dt = time.perf_counter() - t0
    ok = not errors and dt < 5
    criterion("betweenness equivalence", ok, f"100 graphs n<=6, {len(errors)} mismatches, {dt:.2f}s")
    assert ok, errors[:5]


def test_closeness_oracle(criterion):
    errors = oracles.check_closeness(seed=2, graphs=50, n_max=8, tol=1e-12)
    criterion("closeness equivalence", not errors, f"50 graphs n<=8, {len(errors)} mismatches")
    assert not errors, errors[:5]


def test_oscillation_oracle(criterion):
    errors = oracles.check_oscillations(seed=3, series=1000, max_len=12)
    criterion("oscillation equivalence", not errors, f"1000 series, {len(errors)} mismatches")
    assert not errors, errors[:5]


def test_logit(criterion):
    x = np.tile(np.array([0.0] * 4 + [1.0] * 4), 5)
    y = np.tile(np.array([1.0, 0, 0, 0, 1, 1, 1, 0]), 5)
    two = logit_fit(add_intercept(x), y)
    a = abs(two.coef[0] - np.log(1 / 3)) < 1e-6 and abs(two.coef[1] - np.log(9)) < 1e-6

    rng = np.random.default_rng(42)
    beta = np.array([-1.0, 0.8, -0.5])
    X = add_intercept(rng.standard_normal((5000, 2)))
    yy = (rng.random(5000) < 1 / (1 + np.exp(-X @ beta))).astype(float)
    m = logit_fit(X, yy)
    b = bool(np.all(np.abs(m.coef - beta) < 0.1))
    score = float(np.max(np.abs(m.score(X, yy))))
    c = score < 1e-6
    d = m.aic == 2 * m.k - 2 * m.loglik and m.bic == m.k * np.log(m.n) - 2 * m.loglik
    ok = a and b and c and d
    criterion("logit correctness", ok, f"two-point={a} recovery={b} coef={np.round(m.coef, 3).tolist()} |score|={score:.1e} ic={d}")
    assert ok


def _exact(n, mean, sd, seed):
    v = np.random.default_rng(seed).standard_normal(n)
    return mean + sd * (v - v.mean()) / v.std(ddof=1)


def test_stat_fixtures(criterion):
    rng = np.random.default_rng(0)
    # orthonormal, mean-zero u and e make corr(u, .5u + sqrt(.75)e) exactly .5
    z = rng.standard_normal((20, 2))
    q, _ = np.linalg.qr(z - z.mean(0))
    u, e = q[:, 0], q[:, 1]
    cell = pearson(u, 0.5 * u + np.sqrt(0.75) * e)
    p_ok = abs(cell.r - 0.5) < 1e-12 and abs(cell.p - 0.0249) < 1e-3

    a, b = _exact(10, 1.0, 1.0, 1), _exact(12, 2.0, 1.5, 2)
    w = welch_t(a, b)
    va, vb = 1.0 / 10, 2.25 / 12
    t_hand = -1.0 / np.sqrt(va + vb)
    df_hand = (va + vb) ** 2 / (va**2 / 9 + vb**2 / 11)
    w_ok = abs(w.t - t_hand) < 1e-6 and abs(w.df - df_hand) < 1e-6 and abs(w.p - 2 * sps.t.sf(abs(t_hand), df_hand)) < 1e-6

    before = rng.normal(10, 2, 15)
    after = before + rng.normal(0.7, 1.0, 15)
    d = after - before
    t_pair = d.mean() / (d.std(ddof=1) / np.sqrt(15))
    pt = paired_t(before, after)
    pr_ok = abs(pt.t - t_pair) < 1e-6 and abs(pt.p - 2 * sps.t.sf(abs(t_pair), 14)) < 1e-6

    cdf_ok = all(t_cdf(0.0, df) == 0.5 for df in (1, 4.5, 30, 1e4))
    ok = p_ok and w_ok and pr_ok and cdf_ok
    criterion("statistics fixtures", ok, f"pearson p={cell.p:.5f} welch={w_ok} paired={pr_ok} t_cdf(0)={cdf_ok}")
    assert ok


E2E_TARGETS = {
    "cohort": ("closeness", "ego_nudges", "alter_nudges"),
    "shift": ("degree", "closeness", "oscillations", "alter_nudges"),
    "m8": {"tenure": 1, "months_since_promotion": -1, "ego_nudges": -1, "alter_nudges": -1, "closeness": -1},
}


def test_end_to_end(criterion, tmp_path):
    t0 = time.perf_counter()
    assert main(["synth", "--seed", "7", "--out", str(tmp_path / "corpus")]) == 0
    assert main(["analyze", "--events", str(tmp_path / "corpus/events.csv"), "--roster",
                 str(tmp_path / "corpus/roster.csv"), "--out", str(tmp_path / "out")]) == 0
    dt = time.perf_counter() - t0
    rep = json.loads((tmp_path / "out/report.json").read_text())
    meta = rep["meta"]

    coh = rep["cohort"]["tests"]
    a = {m: coh[m]["t"] < 0 and coh[m]["p"] < 0.05 for m in E2E_TARGETS["cohort"]}
    sh = rep["shift"]["tests"]
    b = {m: sh[m]["t"] > 0 and sh[m]["p"] < 0.05 for m in E2E_TARGETS["shift"]}
    coef = rep["models"]["M8"]["coefficients"]
    c = {k: np.sign(coef[k]["beta"]) == s for k, s in E2E_TARGETS["m8"].items()}
    auc = rep["models"]["M8"]["auc"]
    ok = all(a.values()) and all(b.values()) and all(c.values()) and auc >= 0.75 and dt < 60
    detail = (f"actors={meta['roster']} messages={meta['events']} "
              f"cohort={all(a.values())} shift={all(b.values())} M8 signs={all(c.values())} AUC={auc:.3f} {dt:.1f}s")
    criterion("end-to-end directions", ok, detail)
    assert all(a.values()), a
    assert all(b.values()), b
    assert all(c.values()), c
    assert auc >= 0.75
    assert dt < 60, f"full run took {dt:.1f}s"


NULL = SynthConfig(actors=120, externals=36, shift=False)


def test_null_calibration(criterion):
    # without the late shift, each leaver's late window is exchangeable with
    # their baseline, so the paired tests should flag at the nominal rate
    flagged = total = 0
    span = Window(*span_of(NULL))
    for seed in range(20):
        events, roster, _ = generate(NULL, seed)
        rows = compute_feature_table(events, {r.actor: r for r in roster}, span)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                tests = predeparture_shift(rows, alpha=0.05)["tests"]
            except DegenerateStatisticError:
                continue
        for m in METRICS:
            if "p" in tests[m]:
                total += 1
                flagged += tests[m]["p"] < 0.05
    lo, hi = sps.binom.ppf([0.005, 0.995], total, 0.05)
    ok = total >= 150 and lo <= flagged <= hi
    criterion("null calibration", ok, f"{flagged}/{total} flagged, 99% binomial band [{lo:.0f}, {hi:.0f}]")
    assert total >= 150
    assert lo <= flagged <= hi


DET_CONFIG = """
[synth]
actors = 150
externals = 40
months = 12
"""


def _run(tmp, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    cfg = tmp / "det.toml"
    cfg.write_text(DET_CONFIG, encoding="utf-8")
    out = tmp / f"run{hashseed}"
    for args in (["synth", "--config", str(cfg), "--seed", "3", "--out", str(out / "corpus")],
                 ["analyze", "--events", str(out / "corpus/events.csv"), "--roster", str(out / "corpus/roster.csv"),
                  "--config", str(cfg), "--out", str(out / "res")]):
        subprocess.run([sys.executable, "-m", "commnet", *args], check=True, env=env)
    return out


def test_determinism(criterion, tmp_path):
    a, b = _run(tmp_path, 1), _run(tmp_path, 2)
    same = {name: (a / "res" / name).read_bytes() == (b / "res" / name).read_bytes()
            for name in ("features.csv", "report.json")}
    same["events.csv"] = (a / "corpus/events.csv").read_bytes() == (b / "corpus/events.csv").read_bytes()
    ok = all(same.values())
    criterion("determinism", ok, " ".join(f"{k}={'same' if v else 'DIFFERENT'}" for k, v in same.items()))
    assert ok, same
