"""Leaver/stayer comparison, pre-departure shift and the logit model table.

Every statistic excludes rows with a missing value listwise and reports
the ``n`` it was computed on.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .features import CONTROLS, FULL, METRICS, ActorFeatureRow
from .stats import DegenerateStatisticError, SeparationWarning, add_intercept, logit_fit, paired_t, pearson, roc_auc, vif, welch_t

LABEL = "left"


@dataclass(frozen=True)
class ModelSpec:
    name: str
    columns: tuple[str, ...]


DEFAULT_MODELS = (
    ModelSpec("M1", ("rank", "tenure", "months_since_promotion")),
    ModelSpec("M2", ("ego_nudges", "alter_nudges", "alter_art", "ego_art")),
    ModelSpec("M3", ("oscillations", "betweenness")),
    ModelSpec("M4", ("closeness",)),
    ModelSpec("M5", ("degree",)),
    ModelSpec("M6", ("emotionality", "complexity")),
    ModelSpec("M7", ("rank", "tenure", "months_since_promotion", "ego_nudges", "alter_nudges", "closeness", "emotionality")),
    ModelSpec("M8", ("tenure", "months_since_promotion", "ego_nudges", "alter_nudges", "closeness")),
)

# the centrality block regressed jointly for the collinearity screen
CENTRALITY = ("betweenness", "oscillations", "degree", "closeness")


def _full_rows(rows: Sequence[ActorFeatureRow]) -> list[ActorFeatureRow]:
    return [r for r in rows if r.window == FULL]


def _column(rows, name):
    return [getattr(r, name) for r in rows]


def _complete(rows, names):
    return [r for r in rows if all(getattr(r, c) is not None for c in names)]


def _num(v) -> Optional[float]:
    """JSON-safe float: non-finite values become strings."""
    if v is None:
        return None
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return str(v)
    return v


def descriptives(rows: Sequence[ActorFeatureRow], columns=(LABEL, *METRICS, *CONTROLS)) -> dict:
    full = _full_rows(rows)
    out = {}
    for c in columns:
        vals = np.array([v for v in _column(full, c) if v is not None], dtype=float)
        out[c] = {
            "n": int(len(vals)),
            "mean": _num(vals.mean()) if len(vals) else None,
            "sd": _num(vals.std(ddof=1)) if len(vals) > 1 else None,
        }
    return out


def correlation_matrix(rows: Sequence[ActorFeatureRow], columns=(LABEL, *METRICS, *CONTROLS)) -> dict:
    """Pairwise Pearson cells; the leave label enters as 0/1."""
    full = _full_rows(rows)
    out: dict[str, dict] = {}
    for i, a in enumerate(columns):
        out[a] = {}
        for b in columns[:i]:
            pairs = [(getattr(r, a), getattr(r, b)) for r in full]
            pairs = [(x, y) for x, y in pairs if x is not None and y is not None]
            try:
                cell = pearson([x for x, _ in pairs], [y for _, y in pairs])
                out[a][b] = {"r": _num(cell.r), "p": _num(cell.p), "n": cell.n}
            except DegenerateStatisticError as exc:
                out[a][b] = {"r": None, "p": None, "n": len(pairs), "error": str(exc)}
    return out


def cohort_comparison(rows: Sequence[ActorFeatureRow], metrics=METRICS, alpha: float = 0.05) -> dict:
    """Welch t-test leavers vs stayers per metric over the full span.

    ``t`` is leaver minus stayer. Raises when either cohort is empty.
    """
    full = [r for r in _full_rows(rows) if r.present]
    leavers = [r for r in full if r.left]
    stayers = [r for r in full if not r.left]
    if not leavers or not stayers:
        raise DegenerateStatisticError("need both leavers and stayers")
    tests = {}
    for m in metrics:
        a = [v for v in _column(leavers, m) if v is not None]
        b = [v for v in _column(stayers, m) if v is not None]
        try:
            t = welch_t(a, b)
        except DegenerateStatisticError as exc:
            tests[m] = {"error": str(exc), "n_leavers": len(a), "n_stayers": len(b)}
            continue
        tests[m] = {
            "mean_leavers": _num(t.mean_a),
            "mean_stayers": _num(t.mean_b),
            "t": _num(t.t),
            "df": _num(t.df),
            "p": _num(t.p),
            "n_leavers": t.n_a,
            "n_stayers": t.n_b,
            "significant": bool(t.p < alpha),
        }
    return {"leavers": len(leavers), "stayers": len(stayers), "tests": tests}


def shift_months(departure_month: int, baseline_last: int = 13) -> tuple[list[int], list[int]]:
    """``(baseline months, late months)`` for a leaver departing in month d.

    The late window is the fifth and fourth month before departure; the
    baseline is months 1..13 cut short so it never touches the late window.
    """
    late = [departure_month - 5, departure_month - 4]
    base = list(range(1, min(baseline_last, departure_month - 6) + 1))
    return base, [m for m in late if m >= 1]


def predeparture_shift(rows: Sequence[ActorFeatureRow], metrics=METRICS, alpha: float = 0.05) -> dict:
    """Paired t-test, per metric, of each leaver's late-window mean against their baseline mean."""
    monthly: dict[str, dict[int, ActorFeatureRow]] = {}
    for r in rows:
        if r.window != FULL and r.left and r.present and r.month is not None:
            monthly.setdefault(r.actor, {})[r.month] = r
    eligible = {}
    for actor, months in monthly.items():
        dep = next(iter(months.values())).departure_month
        if dep is None:
            continue
        base, late = shift_months(dep)
        if any(m in months for m in base) and any(m in months for m in late):
            eligible[actor] = (months, base, late)
    if not eligible:
        raise DegenerateStatisticError("no leaver has months on both sides of the split")
    tests = {}
    for m in metrics:
        before, after = [], []
        for actor in sorted(eligible):
            months, base, late = eligible[actor]
            b = [getattr(months[k], m) for k in base if k in months and getattr(months[k], m) is not None]
            a = [getattr(months[k], m) for k in late if k in months and getattr(months[k], m) is not None]
            if b and a:
                before.append(float(np.mean(b)))
                after.append(float(np.mean(a)))
        try:
            t = paired_t(before, after)
        except DegenerateStatisticError as exc:
            tests[m] = {"error": str(exc), "n": len(before)}
            continue
        tests[m] = {
            "baseline": _num(t.mean_a),
            "late": _num(t.mean_b),
            "t": _num(t.t),
            "df": _num(t.df),
            "p": _num(t.p),
            "n": t.n_a,
            "significant": bool(t.p < alpha),
        }
    return {"leavers": len(eligible), "tests": tests}


def _design(rows, columns):
    full = _complete([r for r in _full_rows(rows) if r.present], columns)
    X = np.array([[float(getattr(r, c)) for c in columns] for r in full]).reshape(len(full), len(columns))
    y = np.array([float(r.left) for r in full])
    return X, y


def fit_model(rows: Sequence[ActorFeatureRow], spec: ModelSpec):
    X, y = _design(rows, spec.columns)
    return logit_fit(add_intercept(X), y, ["const", *spec.columns])


def fit_model_table(rows: Sequence[ActorFeatureRow], specs: Sequence[ModelSpec] = DEFAULT_MODELS) -> dict:
    known = set(METRICS) | set(CONTROLS) | {"neighbors", "sentiment", "sentiment_spread"}
    for s in specs:
        bad = [c for c in s.columns if c not in known]
        if bad:
            raise ValueError(f"model {s.name}: unknown columns {bad}")
    out = {}
    for s in specs:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", SeparationWarning)
            try:
                X, y = _design(rows, s.columns)
                m = logit_fit(add_intercept(X), y, ["const", *s.columns])
                auc = roc_auc(m.predict(add_intercept(X)), y)
            except DegenerateStatisticError as exc:
                out[s.name] = {"columns": list(s.columns), "error": str(exc)}
                continue
        out[s.name] = {
            "columns": list(s.columns),
            "n": m.n,
            "coefficients": {
                name: {"beta": _num(b), "se": _num(se), "z": _num(z), "p": _num(p)}
                for name, b, se, z, p in zip(m.names, m.coef, m.se, m.z, m.p)
            },
            "loglik": _num(m.loglik),
            "loglik_null": _num(m.loglik_null),
            "mcfadden_adj": _num(m.mcfadden_adj),
            "auc": _num(auc),
            "aic": _num(m.aic),
            "bic": _num(m.bic),
            "converged": m.converged,
            "separation": m.separation or any(issubclass(w.category, SeparationWarning) for w in caught),
            "iterations": m.iterations,
        }
    return out


def vif_report(rows: Sequence[ActorFeatureRow], columns=CENTRALITY) -> dict:
    X, _ = _design(rows, columns)
    v = vif(X, list(columns))
    finite = [x for x in v.values() if math.isfinite(x)]
    return {
        "columns": list(columns),
        "n": int(X.shape[0]),
        "vif": {k: _num(x) for k, x in v.items()},
        "mean": _num(float(np.mean(list(v.values())))) if v else None,
        "max": _num(max(v.values())) if v else None,
        "finite": len(finite) == len(v),
    }


def build_report(
    rows: Sequence[ActorFeatureRow],
    specs: Sequence[ModelSpec] = DEFAULT_MODELS,
    alpha: float = 0.05,
    meta: Optional[Mapping] = None,
) -> dict:
    report = {
        "meta": dict(meta or {}),
        "alpha": alpha,
        "descriptives": descriptives(rows),
        "correlations": correlation_matrix(rows),
        "cohort": cohort_comparison(rows, alpha=alpha),
    }
    try:
        report["shift"] = predeparture_shift(rows, alpha=alpha)
    except DegenerateStatisticError as exc:
        report["shift"] = {"error": str(exc)}
    report["models"] = fit_model_table(rows, specs)
    try:
        report["vif"] = vif_report(rows)
    except DegenerateStatisticError as exc:
        report["vif"] = {"error": str(exc)}
    return report


def report_json(report: Mapping) -> str:
    return json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n"


def _f(v, width=10, prec=4) -> str:
    if v is None:
        return "-".rjust(width)
    if isinstance(v, str):
        return v.rjust(width)
    if v != 0 and (abs(v) < 10 ** -prec or abs(v) >= 10**6):
        return f"{v:{width}.{prec - 1}e}"
    return f"{v:{width}.{prec}f}"


def _stars(p) -> str:
    if not isinstance(p, float):
        return ""
    return "***" if p < 0.001 else "**" if p < 0.01 else "*" if p < 0.05 else ""


def report_text(report: Mapping) -> str:
    lines = []
    add = lines.append

    add("DESCRIPTIVES (full span)")
    add(f"{'column':24s}{'n':>6s}{'mean':>12s}{'sd':>12s}")
    for c, d in report["descriptives"].items():
        add(f"{c:24s}{d['n']:6d}{_f(d['mean'], 12)}{_f(d['sd'], 12)}")

    add("")
    add(f"CORRELATIONS WITH {LABEL.upper()}")
    add(f"{'column':24s}{'r':>10s}{'p':>12s}{'n':>6s}")
    corr = report["correlations"]
    for c in corr:
        cell = corr[c].get(LABEL)
        if cell is not None:
            add(f"{c:24s}{_f(cell['r'])}{_f(cell['p'], 12)}{cell['n']:6d} {_stars(cell['p'])}")

    cohort = report["cohort"]
    add("")
    add(f"LEAVERS VS STAYERS (Welch; leavers={cohort['leavers']}, stayers={cohort['stayers']})")
    add(f"{'metric':16s}{'leavers':>12s}{'stayers':>12s}{'t':>9s}{'p':>11s}")
    for m, t in cohort["tests"].items():
        if "error" in t:
            add(f"{m:16s}  {t['error']}")
        else:
            add(f"{m:16s}{_f(t['mean_leavers'], 12)}{_f(t['mean_stayers'], 12)}{_f(t['t'], 9, 2)}{_f(t['p'], 11)} {_stars(t['p'])}")

    shift = report["shift"]
    add("")
    if "error" in shift:
        add(f"PRE-DEPARTURE SHIFT: {shift['error']}")
    else:
        add(f"PRE-DEPARTURE SHIFT (paired; leavers={shift['leavers']})")
        add(f"{'metric':16s}{'baseline':>12s}{'late':>12s}{'t':>9s}{'p':>11s}{'n':>6s}")
        for m, t in shift["tests"].items():
            if "error" in t:
                add(f"{m:16s}  {t['error']}")
            else:
                add(f"{m:16s}{_f(t['baseline'], 12)}{_f(t['late'], 12)}{_f(t['t'], 9, 2)}{_f(t['p'], 11)}{t['n']:6d} {_stars(t['p'])}")

    add("")
    add("LOGIT MODELS")
    for name, m in report["models"].items():
        if "error" in m:
            add(f"{name}: {m['error']}")
            continue
        flag = "" if m["converged"] else " (not converged)"
        if m["separation"]:
            flag += " (separation)"
        add(f"{name}  n={m['n']}  McFadden adj={_f(m['mcfadden_adj'], 0)}  AUC={_f(m['auc'], 0, 3)}  AIC={_f(m['aic'], 0, 2)}  BIC={_f(m['bic'], 0, 2)}{flag}")
        for c, b in m["coefficients"].items():
            add(f"    {c:24s}{_f(b['beta'], 12)}{_f(b['se'], 12)}{_f(b['p'], 11)} {_stars(b['p'])}")

    v = report["vif"]
    add("")
    if "error" in v:
        add(f"VIF: {v['error']}")
    else:
        add(f"VIF (n={v['n']}; mean={_f(v['mean'], 0, 2)}, max={_f(v['max'], 0, 2)})")
        for c, x in v["vif"].items():
            add(f"    {c:24s}{_f(x, 12, 3)}")
    return "\n".join(lines) + "\n"
