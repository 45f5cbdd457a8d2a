import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special
from scipy import stats as sps

from commnet.oracles import t_cdf_quadrature
from commnet.specfun import betainc, normal_sf2, t_cdf, t_sf2
from commnet.stats import (
    DegenerateStatisticError,
    SeparationWarning,
    add_intercept,
    logit_fit,
    null_loglik,
    paired_t,
    pearson,
    roc_auc,
    vif,
    welch_t,
)


# --- special functions -------------------------------------------------------

@pytest.mark.parametrize("a, b, x", [(0.5, 0.5, 0.3), (2, 3, 0.4), (10, 0.5, 0.9), (0.5, 400, 0.001), (1e3, 1e3, 0.51), (7.5, 0.5, 0.2)])
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), rel=1e-10, abs=1e-300)


def test_betainc_edges():
    assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0
    with pytest.raises(ValueError):
        betainc(0, 1, 0.5)
    with pytest.raises(ValueError):
        betainc(1, 1, 1.5)


def test_t_cdf_reference_points():
    for df in (1, 2.5, 10, 1000):
        assert t_cdf(0.0, df) == 0.5
    assert t_cdf(1.812, 10) == pytest.approx(0.95, abs=1e-3)
    assert t_cdf(1.812, 10) == pytest.approx(t_cdf_quadrature(1.812, 10), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(-40, 40), st.floats(0.5, 500))
def test_t_tail_matches_scipy(t, df):
    want = 2 * sps.t.sf(abs(t), df)
    assert t_sf2(t, df) == pytest.approx(want, rel=1e-9, abs=1e-300)
    assert 0 <= t_sf2(t, df) <= 1


def test_normal_tail():
    assert normal_sf2(1.959963984540054) == pytest.approx(0.05, abs=1e-12)
    assert normal_sf2(0) == 1.0


# --- correlation and t-tests --------------------------------------------------

def _with_r(r, n, seed=0):
    """Two vectors whose sample correlation is exactly r."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    z -= z.mean(0)
    q, _ = np.linalg.qr(z)
    x, e = q[:, 0], q[:, 1]
    return x, r * x + math.sqrt(1 - r * r) * e


def test_pearson_fixture():
    x, y = _with_r(0.5, 20)
    cell = pearson(x, y)
    assert cell.r == pytest.approx(0.5, abs=1e-12) and cell.n == 20
    assert cell.p == pytest.approx(0.0249, abs=1e-3)
    t = 0.5 * math.sqrt(18 / 0.75)
    assert t == pytest.approx(2.4495, abs=1e-4)
    assert cell.p == pytest.approx(1 - (t_cdf_quadrature(t, 18) - t_cdf_quadrature(-t, 18)), abs=1e-9)


def test_pearson_trivial_and_errors():
    x = [1.0, 2.0, 4.0, 8.0]
    assert pearson(x, x).r == 1.0 and pearson(x, x).p == 0.0
    assert pearson(x, [-v for v in x]).r == -1.0
    with pytest.raises(DegenerateStatisticError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(DegenerateStatisticError):
        pearson([1, 2], [1, 2])
    with pytest.raises(ValueError):
        pearson([1, 2, 3], [1, 2])


def _exact(n, mean, sd, seed):
    v = np.random.default_rng(seed).standard_normal(n)
    v = (v - v.mean()) / v.std(ddof=1)
    return mean + sd * v


def test_welch_fixture():
    a, b = _exact(10, 1.0, 1.0, 1), _exact(12, 2.0, 1.5, 2)
    res = welch_t(a, b)
    va, vb = 1.0 / 10, 2.25 / 12
    t = (1.0 - 2.0) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / 9 + vb**2 / 11)
    assert res.t == pytest.approx(t, abs=1e-6)
    assert res.df == pytest.approx(df, abs=1e-6)
    assert res.p == pytest.approx(2 * sps.t.sf(abs(t), df), abs=1e-6)
    ref = sps.ttest_ind(a, b, equal_var=False)
    assert res.p == pytest.approx(ref.pvalue, abs=1e-9)
    assert (res.mean_a, res.mean_b, res.n_a, res.n_b) == (pytest.approx(1.0), pytest.approx(2.0), 10, 12)


def test_welch_trivial_and_errors():
    a = [1.0, 2.0, 3.0, 5.0]
    res = welch_t(a, a)
    assert res.t == 0 and res.p == 1.0
    with pytest.raises(DegenerateStatisticError):
        welch_t([0, 0, 0, 0], [1, 1, 1, 1])
    with pytest.raises(DegenerateStatisticError):
        welch_t([1.0], [1.0, 2.0])


def test_paired_fixture():
    rng = np.random.default_rng(15)
    before = rng.normal(10, 2, 15)
    after = before + rng.normal(0.7, 1.0, 15)
    res = paired_t(before, after)
    d = after - before
    t = d.mean() / (d.std(ddof=1) / math.sqrt(15))
    assert res.t == pytest.approx(t, abs=1e-6) and res.df == 14
    assert res.p == pytest.approx(2 * sps.t.sf(abs(t), 14), abs=1e-6)
    assert res.p == pytest.approx(sps.ttest_rel(after, before).pvalue, abs=1e-9)


def test_paired_trivial_and_errors():
    x = [1.0, 2.0, 3.0]
    res = paired_t(x, x)
    assert res.t == 0 and res.p == 1.0
    with pytest.raises(DegenerateStatisticError):
        paired_t(x, [v + 1 for v in x])
    with pytest.raises(ValueError):
        paired_t(x, x[:2])


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        welch_t([1, 2, float("nan")], [1, 2, 3])


# --- logistic regression --------------------------------------------------------

def test_two_point_closed_form():
    # p(y=1 | x=0) = 1/4, p(y=1 | x=1) = 3/4
    x = np.array([0] * 4 + [1] * 4, dtype=float)
    y = np.array([1, 0, 0, 0, 1, 1, 1, 0], dtype=float)
    x, y = np.tile(x, 5), np.tile(y, 5)
    m = logit_fit(add_intercept(x), y, ["const", "x"])
    assert m.converged
    assert m.coef[0] == pytest.approx(math.log(1 / 3), abs=1e-6)
    assert m.coef[1] == pytest.approx(math.log(9), abs=1e-6)


def _draw(n=5000, beta=(-1.0, 0.8, -0.5), seed=42):
    rng = np.random.default_rng(seed)
    X = add_intercept(rng.standard_normal((n, len(beta) - 1)))
    p = 1 / (1 + np.exp(-X @ np.array(beta)))
    return X, (rng.random(n) < p).astype(float)


def test_recovers_known_coefficients():
    X, y = _draw()
    m = logit_fit(X, y, ["const", "a", "b"])
    assert m.converged
    assert np.all(np.abs(m.coef - np.array([-1.0, 0.8, -0.5])) < 0.1)
    assert np.max(np.abs(m.score(X, y))) < 1e-6
    assert all(0 <= p <= 1 for p in m.p)


def test_matches_statsmodels():
    sm = pytest.importorskip("statsmodels.api")
    X, y = _draw(n=800, seed=3)
    ours = logit_fit(X, y)
    ref = sm.Logit(y, X).fit(disp=0)
    assert np.allclose(ours.coef, ref.params, atol=1e-7)
    assert np.allclose(ours.se, ref.bse, rtol=1e-6)
    assert ours.loglik == pytest.approx(ref.llf, abs=1e-6)
    assert ours.loglik >= ref.llf - 1e-12
    # statsmodels fits the null model iteratively; ours is the closed form
    assert ours.loglik_null == pytest.approx(ref.llnull, abs=1e-6)
    k = y.sum()
    assert ours.loglik_null == pytest.approx(k * math.log(k / len(y)) + (len(y) - k) * math.log(1 - k / len(y)), abs=1e-9)


def test_information_criteria_exact():
    X, y = _draw(n=600, seed=8)
    m = logit_fit(X, y)
    assert m.aic == 2 * m.k - 2 * m.loglik
    assert m.bic == m.k * math.log(m.n) - 2 * m.loglik
    assert m.mcfadden_adj == 1 - (m.loglik - m.k) / m.loglik_null
    assert m.aic < m.bic
    assert m.loglik >= m.loglik_null


def test_loglik_never_decreases():
    X, y = _draw(n=400, beta=(0.5, 3.0, -2.5), seed=5)
    m = logit_fit(X, y)
    assert all(b >= a - 1e-9 * abs(a) for a, b in zip(m.loglik_trace, m.loglik_trace[1:]))


def test_intercept_only():
    y = np.array([1, 0, 0, 1, 0, 0, 0, 1, 0, 0], dtype=float)
    X = np.ones((10, 1))
    m = logit_fit(X, y, ["const"])
    assert np.allclose(m.predict(X), y.mean())
    assert m.mcfadden == pytest.approx(0.0, abs=1e-12)
    # the penalty alone remains: 1 - (LL0 - k) / LL0
    assert m.mcfadden_adj == pytest.approx(m.k / m.loglik_null)
    assert m.mcfadden_adj < 0
    assert m.loglik == pytest.approx(null_loglik(y), abs=1e-12)


def test_separation_flagged():
    x = np.arange(20, dtype=float)
    y = (x >= 10).astype(float)
    with pytest.warns(SeparationWarning):
        m = logit_fit(add_intercept(x), y)
    assert m.separation


def test_singular_design_raises():
    X, y = _draw(n=200, seed=1)
    X = np.column_stack([X, X[:, 1]])
    with pytest.raises(DegenerateStatisticError):
        logit_fit(X, y)


def test_logit_input_errors():
    with pytest.raises(DegenerateStatisticError):
        logit_fit(np.ones((5, 1)), np.ones(5))
    with pytest.raises(DegenerateStatisticError):
        logit_fit(np.ones((2, 2)), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        logit_fit(np.ones((4, 1)), np.array([0, 1, 2, 1.0]))


# --- VIF ------------------------------------------------------------------------

def _vif_oracle(X, j):
    others = np.column_stack([np.ones(len(X)), np.delete(X, j, axis=1)])
    beta = np.linalg.solve(others.T @ others, others.T @ X[:, j])
    resid = X[:, j] - others @ beta
    r2 = 1 - resid @ resid / np.sum((X[:, j] - X[:, j].mean()) ** 2)
    return 1 / (1 - r2)


def test_vif_orthogonal():
    X = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
    assert vif(X, ["a", "b"]) == {"a": pytest.approx(1.0), "b": pytest.approx(1.0)}


def test_vif_duplicate_is_infinite():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(50)
    out = vif(np.column_stack([a, a, rng.standard_normal(50)]), ["a", "a2", "c"])
    assert out["a"] == math.inf and out["a2"] == math.inf and math.isfinite(out["c"])


def test_vif_three_column_fixture():
    rng = np.random.default_rng(6)
    cov = np.full((3, 3), 0.6) + 0.4 * np.eye(3)
    X = rng.multivariate_normal(np.zeros(3), cov, size=400)
    got = vif(X, ["a", "b", "c"])
    for j, name in enumerate("abc"):
        assert got[name] == pytest.approx(_vif_oracle(X, j), abs=1e-9)
    # population value 1 / (1 - R^2) with R^2 = 2 * .6^2 / 1.6
    assert got["a"] == pytest.approx(1 / (1 - 0.45), rel=0.2)


def test_vif_needs_two_columns():
    with pytest.raises(DegenerateStatisticError):
        vif(np.column_stack([np.ones(5), np.arange(5.0)]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_welch_symmetry(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(0, 1, 8), rng.normal(0.3, 2, 11)
    ab, ba = welch_t(a, b), welch_t(b, a)
    assert ab.t == pytest.approx(-ba.t) and ab.p == pytest.approx(ba.p) and 0 <= ab.p <= 1


# --- AUC ------------------------------------------------------------------------

def _auc_pairs(s, y):
    pos = [a for a, l in zip(s, y) if l == 1]
    neg = [a for a, l in zip(s, y) if l == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 1)), min_size=2, max_size=30))
def test_auc_matches_pair_count(data):
    s = [float(a) for a, _ in data]
    y = [float(b) for _, b in data]
    if len(set(y)) < 2:
        with pytest.raises(DegenerateStatisticError):
            roc_auc(s, y)
        return
    assert roc_auc(s, y) == pytest.approx(_auc_pairs(s, y), abs=1e-12)


def test_auc_extremes():
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert roc_auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0
    assert roc_auc([0.5] * 4, [0, 1, 0, 1]) == 0.5
