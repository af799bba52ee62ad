"""Count forecasting: OLS, zero-inflated Poisson, and epsilon-SVR models.

The harness mirrors the published forecast tables: four models, two
training variants (with and without the 2022-2023 pandemic-era years), six
predicted years 2025-2030, and error metrics.  Fitting uses the
chronologically-first 80% of each variant's series with metrics on the
held-out tail; that protocol reproduces the published linear-regression
predictions exactly (fitting on the full series does not).

The year covariate is centered and scaled (x = (year - 2011.5) / 10)
before any exponential link.  OLS and linear-kernel SVR predictions are
invariant to that affine choice; ZIP and RBF-SVR defaults are defined on
the scaled axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .corpus import Incident, yearly_series

X_CENTER = 2011.5
X_SCALE = 10.0

VARIANTS = ("with_covid", "without_covid")
TARGETS = ("events", "casualties")

PREDICT_YEARS = tuple(range(2025, 2031))

TRAINING_LABELS = {
    "with_covid": "1999-2024",
    "without_covid": "1999-2021 and 2024",
}


def scale_year(year) -> float:
    return (np.asarray(year, dtype=float) - X_CENTER) / X_SCALE


@dataclass(frozen=True)
class RegressionDataset:
    years: tuple
    ys: tuple
    variant: str

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.years, self.years[1:])):
            raise ValueError("years must be strictly increasing")

    @property
    def xs(self) -> np.ndarray:
        return scale_year(np.array(self.years))

    def __len__(self) -> int:
        return len(self.years)


def build_dataset(incidents: list[Incident], target: str, variant: str,
                  drop_full_pandemic: bool = False) -> RegressionDataset:
    """Yearly series for one target/variant.

    ``without_covid`` drops 2022-2023 (the published table's training label);
    ``drop_full_pandemic`` widens the exclusion to 2020-2023 instead.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    label = "events" if target == "events" else "casualty"
    series = yearly_series(incidents, label)
    dropped = ()
    if variant == "without_covid":
        dropped = tuple(range(2020, 2024)) if drop_full_pandemic else (2022, 2023)
    pairs = [(y, v) for y, v in zip(series.years(), series.values) if y not in dropped]
    return RegressionDataset(tuple(y for y, _ in pairs), tuple(v for _, v in pairs), variant)


def split_train_test(data: RegressionDataset) -> tuple[RegressionDataset, RegressionDataset]:
    """Chronological 80/20 split (test size rounded up)."""
    n_test = math.ceil(0.2 * len(data))
    n_train = len(data) - n_test
    if n_train < 2:
        raise ValueError("dataset too small to split")
    train = RegressionDataset(data.years[:n_train], data.ys[:n_train], data.variant)
    test = RegressionDataset(data.years[n_train:], data.ys[n_train:], data.variant)
    return train, test


# ---------------------------------------------------------------------------
# Ordinary least squares


@dataclass(frozen=True)
class OlsModel:
    slope: float      # per unit of scaled x
    intercept: float  # at scaled x = 0

    def predict_x(self, xs) -> np.ndarray:
        return self.intercept + self.slope * np.asarray(xs, dtype=float)


def fit_ols(data: RegressionDataset) -> OlsModel:
    xs = data.xs
    if len(set(data.years)) < 2:
        raise ValueError("need at least 2 distinct years")
    ys = np.array(data.ys, dtype=float)
    xbar, ybar = xs.mean(), ys.mean()
    sxx = float(((xs - xbar) ** 2).sum())
    slope = float(((xs - xbar) * (ys - ybar)).sum()) / sxx
    return OlsModel(slope, float(ybar - slope * xbar))


# ---------------------------------------------------------------------------
# Zero-inflated Poisson via EM

_CLIP = 30.0


@dataclass
class ZipModel:
    g0: float             # logit-link zero-inflation coefficients
    g1: float
    b0: float             # log-link Poisson coefficients
    b1: float
    log_likelihood: float
    converged: bool
    pi_frozen: bool = False
    ll_trace: tuple = field(default=())

    def pi(self, xs) -> np.ndarray:
        if self.pi_frozen:
            return np.zeros_like(np.asarray(xs, dtype=float))
        eta = np.clip(self.g0 + self.g1 * np.asarray(xs, dtype=float), -_CLIP, _CLIP)
        return 1.0 / (1.0 + np.exp(-eta))

    def lam(self, xs) -> np.ndarray:
        eta = np.clip(self.b0 + self.b1 * np.asarray(xs, dtype=float), -_CLIP, _CLIP)
        return np.exp(eta)

    def predict_x(self, xs) -> np.ndarray:
        return (1.0 - self.pi(xs)) * self.lam(xs)


def _zip_loglik(y, x, g, b, pi_frozen):
    if pi_frozen:
        pi = np.zeros_like(x)
    else:
        pi = 1.0 / (1.0 + np.exp(-np.clip(g[0] + g[1] * x, -_CLIP, _CLIP)))
    lam = np.exp(np.clip(b[0] + b[1] * x, -_CLIP, _CLIP))
    zero = y == 0
    ll = np.sum(np.log(pi[zero] + (1.0 - pi[zero]) * np.exp(-lam[zero]) + 1e-300))
    pos = ~zero
    ll += np.sum(np.log1p(-pi[pos] + 1e-300) + y[pos] * np.log(lam[pos]) - lam[pos]
                 - [math.lgamma(v + 1.0) for v in y[pos]])
    return float(ll)


def _newton_logistic(x, z, g):
    # Weighted logistic regression with fractional responses z.
    X = np.column_stack([np.ones_like(x), x])
    g = np.array(g, dtype=float)

    def ll(gv):
        eta = np.clip(X @ gv, -_CLIP, _CLIP)
        return float(np.sum(z * eta - np.log1p(np.exp(eta))))

    current = ll(g)
    for _ in range(100):
        eta = np.clip(X @ g, -_CLIP, _CLIP)
        p = 1.0 / (1.0 + np.exp(-eta))
        grad = X.T @ (z - p)
        w = np.maximum(p * (1.0 - p), 1e-12)
        hess = X.T @ (X * w[:, None]) + 1e-10 * np.eye(2)
        step = np.linalg.solve(hess, grad)
        scale = 1.0
        while scale > 1e-8:
            trial = g + scale * step
            if ll(trial) >= current - 1e-12:
                break
            scale *= 0.5
        g = g + scale * step
        new = ll(g)
        if abs(new - current) < 1e-12:
            current = new
            break
        current = new
    return tuple(g)


def _newton_poisson(x, y, w, b):
    # Weighted Poisson regression, log link.
    X = np.column_stack([np.ones_like(x), x])
    b = np.array(b, dtype=float)

    def ll(bv):
        eta = np.clip(X @ bv, -_CLIP, _CLIP)
        return float(np.sum(w * (y * eta - np.exp(eta))))

    current = ll(b)
    for _ in range(100):
        eta = np.clip(X @ b, -_CLIP, _CLIP)
        mu = np.exp(eta)
        grad = X.T @ (w * (y - mu))
        hess = X.T @ (X * (w * mu)[:, None]) + 1e-10 * np.eye(2)
        step = np.linalg.solve(hess, grad)
        scale = 1.0
        while scale > 1e-8:
            if ll(b + scale * step) >= current - 1e-12:
                break
            scale *= 0.5
        b = b + scale * step
        new = ll(b)
        if abs(new - current) < 1e-12:
            current = new
            break
        current = new
    return tuple(b)


def fit_zip(data: RegressionDataset, freeze_pi: bool = False,
            tol: float = 1e-8, max_iter: int = 500) -> ZipModel:
    """EM fit.  The E-step assigns structural-zero responsibilities; the
    M-step runs weighted logistic and weighted Poisson Newton updates.
    ``freeze_pi`` pins the zero-inflation component at zero, reducing the
    model to plain Poisson regression."""
    x = data.xs
    y = np.array(data.ys, dtype=float)
    if np.any(y < 0) or np.any(y != np.round(y)):
        raise ValueError("ZIP requires non-negative integer counts")
    if not np.any(y > 0):
        raise ValueError("degenerate: zero-inflation unidentifiable (all counts zero)")

    frac_zero = float(np.mean(y == 0))
    pi0 = min(max(frac_zero / 2.0, 1e-6), 1.0 - 1e-6)
    g = (math.log(pi0 / (1.0 - pi0)), 0.0)
    b = (math.log(float(np.mean(y[y > 0]))), 0.0)

    trace = [_zip_loglik(y, x, g, b, freeze_pi)]
    converged = False
    for _ in range(max_iter):
        # E-step
        if freeze_pi:
            z = np.zeros_like(y)
        else:
            pi = 1.0 / (1.0 + np.exp(-np.clip(g[0] + g[1] * x, -_CLIP, _CLIP)))
            lam = np.exp(np.clip(b[0] + b[1] * x, -_CLIP, _CLIP))
            z = np.where(y == 0, pi / (pi + (1.0 - pi) * np.exp(-lam) + 1e-300), 0.0)
        # M-step
        if not freeze_pi:
            g = _newton_logistic(x, z, g)
        b = _newton_poisson(x, y, 1.0 - z, b)
        trace.append(_zip_loglik(y, x, g, b, freeze_pi))
        if trace[-1] - trace[-2] < tol:
            converged = True
            break
    return ZipModel(g[0], g[1], b[0], b[1], trace[-1], converged,
                    pi_frozen=freeze_pi, ll_trace=tuple(trace))


# ---------------------------------------------------------------------------
# Support vector regression (SMO on the epsilon-insensitive dual)


@dataclass
class SvrModel:
    kernel: str
    c: float
    epsilon: float
    gamma: float
    dual_coefs: np.ndarray   # beta_i = alpha_i - alpha_i*, in [-c, c]
    bias: float
    support_xs: np.ndarray
    kkt_residual: float
    duality_gap: float

    def _k(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.kernel == "linear":
            return np.outer(a, b)
        return np.exp(-self.gamma * (a[:, None] - b[None, :]) ** 2)

    def predict_x(self, xs) -> np.ndarray:
        k = self._k(np.atleast_1d(xs), self.support_xs)
        return k @ self.dual_coefs + self.bias


def default_gamma(xs: Sequence[float]) -> float:
    return 1.0 / (2.0 * float(np.var(np.asarray(xs, dtype=float))))


def _kernel_matrix(kernel: str, xs: np.ndarray, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return np.outer(xs, xs)
    return np.exp(-gamma * (xs[:, None] - xs[None, :]) ** 2)


def _pair_objective(delta, dy, df, eta, eps, bi, bj):
    return (dy * delta - df * delta - 0.5 * eta * delta * delta
            - eps * (abs(bi + delta) - abs(bi))
            - eps * (abs(bj - delta) - abs(bj)))


def _best_pair_step(dy, df, eta, eps, bi, bj, c):
    lo = max(-c - bi, bj - c)
    hi = min(c - bi, bj + c)
    if hi - lo < 1e-15:
        return 0.0, 0.0
    knots = sorted({lo, hi, min(max(-bi, lo), hi), min(max(bj, lo), hi)})
    candidates = set(knots)
    for left, right in zip(knots, knots[1:]):
        mid = 0.5 * (left + right)
        si = math.copysign(1.0, bi + mid)
        sj = math.copysign(1.0, bj - mid)
        stationary = (dy - df - eps * (si - sj)) / eta
        candidates.add(min(max(stationary, left), right))
    best_delta, best_gain = 0.0, 0.0
    for delta in candidates:
        gain = _pair_objective(delta, dy, df, eta, eps, bi, bj)
        if gain > best_gain:
            best_delta, best_gain = delta, gain
    return best_delta, best_gain


def _svr_bias(beta, y, f, eps, c) -> float:
    on_margin = (np.abs(beta) > 1e-9 * c) & (np.abs(beta) < c * (1 - 1e-9))
    if np.any(on_margin):
        return float(np.mean(y[on_margin] - f[on_margin]
                             - eps * np.sign(beta[on_margin])))
    lower, upper = [], []
    for bi, yi, fi in zip(beta, y, f):
        if bi >= c * (1 - 1e-9):
            upper.append(yi - fi - eps)
        elif bi <= -c * (1 - 1e-9):
            lower.append(yi - fi + eps)
        else:
            lower.append(yi - fi - eps)
            upper.append(yi - fi + eps)
    lo = max(lower) if lower else -math.inf
    hi = min(upper) if upper else math.inf
    if lo > hi:
        lo, hi = hi, lo
    if math.isinf(lo):
        return hi
    if math.isinf(hi):
        return lo
    return 0.5 * (lo + hi)


def _svr_kkt_residual(beta, y, f, bias, eps, c) -> float:
    worst = 0.0
    for bi, yi, fi in zip(beta, y, f):
        g = yi - (fi + bias)
        if bi >= c * (1 - 1e-9):
            viol = max(0.0, eps - g)
        elif bi <= -c * (1 - 1e-9):
            viol = max(0.0, g + eps)
        elif abs(bi) <= 1e-9 * max(c, 1.0):
            viol = max(0.0, abs(g) - eps)
        elif bi > 0:
            viol = abs(g - eps)
        else:
            viol = abs(g + eps)
        worst = max(worst, viol)
    return worst


def fit_svr(data: RegressionDataset, kernel: str = "linear", c: float = 1.0,
            epsilon: float = 0.1, gamma: Optional[float] = None,
            max_sweeps: int = 10000, tol: float = 1e-8) -> SvrModel:
    """Epsilon-insensitive SVR solved by SMO over coefficient pairs.

    Pairs are visited in a fixed order each sweep, so the fit is fully
    deterministic.  Sweeps continue until no pair yields a dual improvement
    above ``tol`` squared.
    """
    if kernel not in ("linear", "rbf"):
        raise ValueError(f"unknown kernel {kernel!r}")
    if c <= 0:
        raise ValueError("c must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    xs = data.xs
    if len(xs) < 2:
        raise ValueError("need at least 2 points")
    if gamma is None:
        gamma = default_gamma(xs) if kernel == "rbf" else 1.0
    if kernel == "rbf" and gamma <= 0:
        raise ValueError("gamma must be positive")

    y = np.array(data.ys, dtype=float)
    n = len(y)
    K = _kernel_matrix(kernel, xs, gamma)
    beta = np.zeros(n)
    f = np.zeros(n)

    for _ in range(max_sweeps):
        best_improvement = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
                if eta < 1e-12:
                    continue
                delta, gain = _best_pair_step(
                    y[i] - y[j], f[i] - f[j], eta, epsilon, beta[i], beta[j], c)
                if gain > 1e-15:
                    beta[i] += delta
                    beta[j] -= delta
                    f += delta * (K[:, i] - K[:, j])
                    best_improvement = max(best_improvement, gain)
        if best_improvement < tol * tol:
            break

    bias = _svr_bias(beta, y, f, epsilon, c)
    kkt = _svr_kkt_residual(beta, y, f, bias, epsilon, c)
    dual = float(y @ beta - epsilon * np.sum(np.abs(beta)) - 0.5 * beta @ K @ beta)
    primal = float(0.5 * beta @ K @ beta
                   + c * np.sum(np.maximum(0.0, np.abs(y - (f + bias)) - epsilon)))
    return SvrModel(kernel, c, epsilon, gamma, beta, bias, xs.copy(),
                    kkt_residual=kkt, duality_gap=primal - dual)


# ---------------------------------------------------------------------------
# Prediction, metrics, harness


def predict(model, years: Sequence[int], clamp: bool = False) -> list[float]:
    for year in years:
        if not 1999 <= year <= 2050:
            raise ValueError(f"year {year} outside supported range")
    raw = model.predict_x(scale_year(np.array(years)))
    if clamp:
        raw = np.maximum(raw, 0.0)
    return [float(v) for v in raw]


@dataclass(frozen=True)
class Metrics:
    mse: float
    mae: float
    mape: Optional[float]
    n_mape_excluded: int


def metrics(actual: Sequence[float], predicted: Sequence[float]) -> Metrics:
    if len(actual) != len(predicted) or not actual:
        raise ValueError("need equal-length non-empty vectors")
    errs = [p - a for a, p in zip(actual, predicted)]
    mse = sum(e * e for e in errs) / len(errs)
    mae = sum(abs(e) for e in errs) / len(errs)
    ape = [abs(e) / abs(a) for a, e in zip(actual, errs) if a != 0]
    mape = sum(ape) / len(ape) if ape else None
    return Metrics(mse, mae, mape, len(actual) - len(ape))


@dataclass(frozen=True)
class ForecastRow:
    model_id: str
    model_name: str
    target: str
    training_variant: str
    training_data: str
    predictions: dict
    predictions_clamped: dict
    mse: float
    mae: float
    mape: Optional[float]


MODEL_ORDER = (
    ("1", "Zero-Inflated Poisson"),
    ("2", "Linear Regression"),
    ("3", "SVR Linear"),
    ("4", "SVR RBF"),
)
VARIANT_SUFFIX = {"with_covid": "a", "without_covid": "b"}


def _fit_model(number: str, train: RegressionDataset):
    if number == "1":
        return fit_zip(train)
    if number == "2":
        return fit_ols(train)
    if number == "3":
        return fit_svr(train, kernel="linear")
    return fit_svr(train, kernel="rbf")


def run_harness(incidents: list[Incident],
                targets: Sequence[str] = TARGETS,
                variants: Sequence[str] = VARIANTS,
                drop_full_pandemic: bool = False) -> list[ForecastRow]:
    """All model/variant fits for the requested targets: 8 rows per target."""
    rows = []
    for target in targets:
        for number, name in MODEL_ORDER:
            for variant in variants:
                data = build_dataset(incidents, target, variant,
                                     drop_full_pandemic=drop_full_pandemic)
                train, test = split_train_test(data)
                model = _fit_model(number, train)
                test_pred = predict(model, test.years)
                m = metrics(test.ys, test_pred)
                raw = predict(model, PREDICT_YEARS)
                rows.append(ForecastRow(
                    model_id=f"{number}{VARIANT_SUFFIX[variant]}",
                    model_name=name,
                    target=target,
                    training_variant=variant,
                    training_data=TRAINING_LABELS[variant],
                    predictions=dict(zip(PREDICT_YEARS, raw)),
                    predictions_clamped={yr: max(0.0, v)
                                         for yr, v in zip(PREDICT_YEARS, raw)},
                    mse=m.mse,
                    mae=m.mae,
                    mape=m.mape,
                ))
    return rows
