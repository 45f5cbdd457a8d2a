"""Correlation, t-tests, logistic regression and variance inflation factors."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .specfun import normal_sf2, t_sf2


class DegenerateStatisticError(ValueError):
    """The statistic is undefined for this input (constant data, empty group...)."""


class SeparationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CorrelationCell:
    r: float
    p: float
    n: int


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    mean_a: float
    mean_b: float
    n_a: int
    n_b: int


def _vec(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrelationCell:
    """Product-moment correlation with a two-sided t-based p-value."""
    x, y = _vec(x, "x"), _vec(y, "y")
    n = len(x)
    if len(y) != n:
        raise ValueError("x and y differ in length")
    if n < 3:
        raise DegenerateStatisticError("correlation needs at least 3 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise DegenerateStatisticError("correlation undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return CorrelationCell(r, 0.0, n)
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return CorrelationCell(r, t_sf2(t, n - 2), n)


def welch_t(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Unequal-variance two-sample t-test; ``t > 0`` when mean(a) > mean(b)."""
    a, b = _vec(a, "a"), _vec(b, "b")
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise DegenerateStatisticError("each group needs at least 2 observations")
    va = a.var(ddof=1) / na
    vb = b.var(ddof=1) / nb
    se2 = va + vb
    if se2 == 0:
        raise DegenerateStatisticError("both groups have zero variance")
    diff = a.mean() - b.mean()
    t = float(diff / math.sqrt(se2))
    df = float(se2**2 / (va**2 / (na - 1) + vb**2 / (nb - 1)))
    return TTestResult(t, df, t_sf2(t, df), float(a.mean()), float(b.mean()), na, nb)


def paired_t(before: Sequence[float], after: Sequence[float]) -> TTestResult:
    """One-sample t on ``after - before``; ``t > 0`` when values rose."""
    before, after = _vec(before, "before"), _vec(after, "after")
    if len(before) != len(after):
        raise ValueError("paired samples differ in length")
    n = len(before)
    if n < 2:
        raise DegenerateStatisticError("paired test needs at least 2 pairs")
    d = after - before
    mb, ma = float(before.mean()), float(after.mean())
    sd = d.std(ddof=1)
    if sd == 0:
        if np.all(d == 0):
            return TTestResult(0.0, n - 1, 1.0, mb, ma, n, n)
        raise DegenerateStatisticError("differences have zero variance")
    t = float(d.mean() / (sd / math.sqrt(n)))
    return TTestResult(t, n - 1, t_sf2(t, n - 1), mb, ma, n, n)


# ---------------------------------------------------------------------------
# logistic regression


@dataclass
class LogitModel:
    names: list[str]
    coef: np.ndarray
    se: np.ndarray
    z: np.ndarray
    p: np.ndarray
    loglik: float
    loglik_null: float
    n: int
    iterations: int
    converged: bool
    separation: bool = False
    loglik_trace: list[float] = field(default_factory=list, repr=False)

    @property
    def k(self) -> int:
        return len(self.coef)

    @property
    def aic(self) -> float:
        return 2 * self.k - 2 * self.loglik

    @property
    def bic(self) -> float:
        return self.k * math.log(self.n) - 2 * self.loglik

    @property
    def mcfadden(self) -> float:
        return 1.0 - self.loglik / self.loglik_null

    @property
    def mcfadden_adj(self) -> float:
        return 1.0 - (self.loglik - self.k) / self.loglik_null

    def predict(self, X) -> np.ndarray:
        return _sigmoid(np.asarray(X, dtype=float) @ self.coef)

    def score(self, X, y) -> np.ndarray:
        """Gradient of the log-likelihood at the fitted coefficients."""
        X = np.asarray(X, dtype=float)
        return X.T @ (np.asarray(y, dtype=float) - self.predict(X))


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * eta))


def _loglik(eta: np.ndarray, y: np.ndarray) -> float:
    # y*eta - log(1 + e^eta), stable for large |eta|
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def null_loglik(y: Sequence[float]) -> float:
    y = np.asarray(y, dtype=float)
    n, n1 = len(y), float(y.sum())
    n0 = n - n1
    out = 0.0
    if n1 > 0:
        out += n1 * math.log(n1 / n)
    if n0 > 0:
        out += n0 * math.log(n0 / n)
    return out


def logit_fit(
    X,
    y,
    names: Optional[Sequence[str]] = None,
    tol: float = 1e-8,
    max_iter: int = 100,
    separation_bound: float = 1e3,
) -> LogitModel:
    """Maximum-likelihood logistic regression by IRLS with step-halving.

    ``X`` must already contain the intercept column. Iteration runs on
    columns rescaled to unit standard deviation (constant columns untouched);
    convergence is ``max |step| < tol`` in that scale. Coefficients and
    standard errors are reported in the original units.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or len(y) != X.shape[0]:
        raise ValueError("design must be (n, k) and y of length n")
    n, k = X.shape
    if n <= k:
        raise DegenerateStatisticError(f"need more rows than columns (n={n}, k={k})")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("y must be binary 0/1")
    if y.min() == y.max():
        raise DegenerateStatisticError("y contains a single class")
    names = list(names) if names is not None else [f"x{j}" for j in range(k)]

    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = X / scale
    beta = np.zeros(k)
    eta = Z @ beta
    ll = _loglik(eta, y)
    trace = [ll]
    converged = False
    separation = False
    it = 0
    for it in range(1, max_iter + 1):
        p = _sigmoid(eta)
        w = p * (1.0 - p)
        H = (Z * w[:, None]).T @ Z
        g = Z.T @ (y - p)
        try:
            if np.linalg.cond(H) > 1e14:
                raise np.linalg.LinAlgError
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            if np.max(np.abs(beta)) > 10 and np.min(w) < 1e-12:
                separation = True
                break
            raise DegenerateStatisticError("weighted normal equations are singular") from None
        t = 1.0
        for _ in range(60):
            cand = beta + t * step
            eta_c = Z @ cand
            ll_c = _loglik(eta_c, y)
            if ll_c >= ll - 1e-12 * abs(ll):
                break
            t *= 0.5
        else:
            cand, eta_c, ll_c = beta, eta, ll
        delta = np.max(np.abs(cand - beta))
        improving = ll_c > ll
        beta, eta, ll = cand, eta_c, max(ll_c, ll)
        trace.append(ll)
        if delta < tol:
            converged = True
            break
        if np.max(np.abs(beta)) > separation_bound and improving:
            separation = True
            break
    if not separation and not converged and np.min(_sigmoid(eta) * (1 - _sigmoid(eta))) < 1e-12:
        separation = True
    if separation:
        warnings.warn("perfect or quasi-perfect separation: coefficients diverge", SeparationWarning, stacklevel=2)

    p = _sigmoid(eta)
    w = p * (1.0 - p)
    H = (Z * w[:, None]).T @ Z
    try:
        cov = np.linalg.inv(H)
        se_z = np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        se_z = np.full(k, np.inf)
    coef = beta / scale
    se = se_z / scale
    with np.errstate(divide="ignore", invalid="ignore"):
        zstat = np.where(se > 0, coef / se, np.nan)
    pvals = np.array([normal_sf2(z) if np.isfinite(z) else float("nan") for z in zstat])
    return LogitModel(
        names=names,
        coef=coef,
        se=se,
        z=zstat,
        p=pvals,
        loglik=_loglik(X @ coef, y),
        loglik_null=null_loglik(y),
        n=n,
        iterations=it,
        converged=converged,
        separation=separation,
        loglik_trace=trace,
    )


def add_intercept(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack([np.ones(len(X)), X])


# ---------------------------------------------------------------------------
# collinearity


def vif(design, names: Optional[Sequence[str]] = None) -> dict[str, float]:
    """Variance inflation factor of every non-constant column.

    Each column is regressed (least squares, with intercept) on the others;
    ``VIF = 1 / (1 - R^2)``. Exact collinearity yields ``inf``.
    """
    X = np.asarray(design, dtype=float)
    if X.ndim != 2:
        raise ValueError("design must be two-dimensional")
    names = list(names) if names is not None else [f"x{j}" for j in range(X.shape[1])]
    cols = [j for j in range(X.shape[1]) if np.ptp(X[:, j]) > 0]
    if len(cols) < 2:
        raise DegenerateStatisticError("VIF needs at least two non-constant columns")
    n = X.shape[0]
    out = {}
    for j in cols:
        target = X[:, j]
        others = np.column_stack([np.ones(n)] + [X[:, c] for c in cols if c != j])
        beta, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ beta
        ssr = float(resid @ resid)
        centered = target - target.mean()
        sst = float(centered @ centered)
        if ssr <= 1e-12 * sst or np.linalg.matrix_rank(np.column_stack([others, target])) <= np.linalg.matrix_rank(others):
            out[names[j]] = math.inf
        else:
            out[names[j]] = sst / ssr
    return out


def roc_auc(scores: Sequence[float], labels: Sequence[float]) -> float:
    """Area under the ROC curve via the rank-sum identity; ties count one half."""
    s = _vec(scores, "scores")
    y = _vec(labels, "labels")
    if len(s) != len(y):
        raise ValueError("scores and labels differ in length")
    pos = y == 1
    n1, n0 = int(pos.sum()), int((~pos).sum())
    if n1 == 0 or n0 == 0 or n1 + n0 != len(y):
        raise DegenerateStatisticError("AUC needs 0/1 labels with both classes present")
    ranks = rankdata(s)
    return float((ranks[pos].sum() - n1 * (n1 + 1) / 2) / (n1 * n0))
