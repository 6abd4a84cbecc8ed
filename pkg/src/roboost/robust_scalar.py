"""Scalar mean estimators that stay accurate under heavy tails.

Each estimator here can serve as the validation routine of
:func:`roboost.boosting.rv_sgd_ave`: it receives the losses of one candidate
on held-out data and returns an estimate of that candidate's risk.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .vecmath import quantile, scalar_median

VALIDATOR_KINDS = ("mom", "catoni", "trunc", "mean")

# deviation-bound constants c for  |estimate - mean| <= c * sqrt((1 + log(1/delta)) * var / n)
DEVIATION_CONSTANTS = {
    "mom": 2.0 * math.sqrt(2.0) * math.e,
    "catoni": 2.0,
    "trunc": 9.0 * math.sqrt(2.0),
}


def _as_sample(xs):
    xs = np.asarray(xs, dtype=np.float64).ravel()
    if xs.shape[0] == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(xs)):
        raise ValueError("sample contains NaN or Inf")
    return xs


def deviation_bound(kind, n, variance, delta):
    """Half-width ``c * sqrt((1 + log(1/delta)) * variance / n)`` guaranteed with probability 1 - delta."""
    return DEVIATION_CONSTANTS[kind] * math.sqrt((1.0 + math.log(1.0 / delta)) * variance / n)


def median_of_means(xs, k):
    """Median of the means of ``k`` contiguous blocks.

    Blocks follow ``np.array_split``: the first ``n % k`` blocks get one extra
    element, so every block has at least ``n // k`` points.
    """
    xs = _as_sample(xs)
    n = xs.shape[0]
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if k == 1:
        return float(np.mean(xs))
    block_means = [blk.mean() for blk in np.array_split(xs, k)]
    return scalar_median(block_means)


def catoni_psi(x):
    """Catoni's narrowest influence function ``sign(x) * log(1 + |x| + x**2 / 2)``."""
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    return np.sign(x) * np.log1p(ax + 0.5 * ax * ax)


def catoni_scale(n, variance, delta):
    """Return ``(q2, s)``: the variance inflation term and the M-estimator scale."""
    L = math.log(2.0 / delta)
    if n <= 2.0 * L:
        raise ValueError(
            f"sample of size {n} too small for confidence delta={delta}: need n > 2*log(2/delta) = {2 * L:.3f}"
        )
    q2 = 2.0 * variance * L / (n - 2.0 * L)
    s2 = n * (variance + q2) / (2.0 * L)
    return q2, math.sqrt(s2)


def _bisect_decreasing(f, lo, hi, xtol, max_iter=400):
    """Root of a non-increasing function on ``[lo, hi]`` with ``f(lo) >= 0 >= f(hi)``."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid <= lo or mid >= hi:
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def catoni_mean(xs, variance, delta):
    """Catoni-type M-estimate of the mean.

    Parameters
    ----------
    xs : array-like of shape (n,)
    variance : float
        Variance proxy sigma^2 (> 0) used to calibrate the scale.
    delta : float
        Confidence level in (0, 1).

    Returns the root of ``theta -> sum(psi((x_i - theta) / s))``, found by
    bisection on ``[min(xs), max(xs)]``.
    """
    xs = _as_sample(xs)
    n = xs.shape[0]
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    _, s = catoni_scale(n, variance, delta)
    lo, hi = float(xs.min()), float(xs.max())
    if lo == hi:
        return lo
    xtol = 1e-12 * min(1.0, s)
    return _bisect_decreasing(lambda th: float(np.sum(catoni_psi((xs - th) / s))), lo, hi, xtol)


def catoni_mean_columns(G, delta, variances=None):
    """Column-wise Catoni estimates of an (n, d) array, solved jointly by vectorized bisection.

    ``variances`` defaults to the per-column empirical variance; columns with
    zero spread return their common value.
    """
    G = np.asarray(G, dtype=np.float64)
    n, d = G.shape
    if variances is None:
        variances = G.var(axis=0, ddof=1) if n > 1 else np.zeros(d)
    variances = np.asarray(variances, dtype=np.float64)
    lo = G.min(axis=0)
    hi = G.max(axis=0)
    out = lo.copy()
    live = (hi > lo) & (variances > 0)
    if not np.any(live):
        return out
    L = math.log(2.0 / delta)
    if n <= 2.0 * L:
        raise ValueError(
            f"sample of size {n} too small for confidence delta={delta}: need n > 2*log(2/delta) = {2 * L:.3f}"
        )
    V = variances[live]
    s = np.sqrt(n * (V + 2.0 * V * L / (n - 2.0 * L)) / (2.0 * L))
    Gl = G[:, live]
    out[live] = _catoni_newton(Gl, s, lo[live], hi[live])
    return out


def _catoni_newton(G, s, a, b, max_iter=200):
    """Column roots of ``theta -> sum_i psi((G_i - theta) / s)`` by bracketed Newton steps.

    The sum is strictly decreasing in theta, so a bracket ``[a, b]`` is kept
    and any Newton step that leaves it is replaced by bisection.
    """
    a, b = a.copy(), b.copy()
    theta = np.median(G, axis=0)
    xtol = 1e-12 * np.maximum(1.0, np.abs(theta)) * np.minimum(1.0, s) + 1e-300
    active = np.ones(theta.shape, dtype=bool)
    for _ in range(max_iter):
        z = (G[:, active] - theta[active]) / s[active]
        az = np.abs(z)
        q = 1.0 + az + 0.5 * az * az
        f = np.sum(np.sign(z) * np.log(q), axis=0)
        fp = np.sum((1.0 + az) / q, axis=0) / s[active]
        th = theta[active]
        a_act = np.where(f > 0.0, th, a[active])
        b_act = np.where(f > 0.0, b[active], th)
        step = f / fp
        nxt = th + step
        bad = ~((nxt > a_act) & (nxt < b_act))
        nxt = np.where(bad, 0.5 * (a_act + b_act), nxt)
        a[active], b[active] = a_act, b_act
        done = (np.abs(nxt - th) <= xtol[active]) | (f == 0.0) | (b_act - a_act <= xtol[active])
        theta[active] = np.where(f == 0.0, th, nxt)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not np.any(active):
            break
    return theta


def truncated_mean(xs, delta):
    """Mean of the first half after zeroing values outside quantile thresholds set on the second half.

    With ``beta = 32 log(8/delta) / (3n)``, the thresholds are the lower
    empirical ``beta`` and ``1 - beta`` quantiles of the second half. The
    first half takes indices ``[0, ceil(n/2))``.
    """
    xs = _as_sample(xs)
    n = xs.shape[0]
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    L = math.log(8.0 / delta)
    if n < 16.0 * L / 3.0:
        raise ValueError(f"need n >= (16/3) log(8/delta) = {16 * L / 3:.2f}, got n={n}")
    beta = 32.0 * L / (3.0 * n)
    if beta >= 0.5:
        raise ValueError(f"beta = {beta:.3f} must be below 1/2; need n > {64 * L / 3:.2f}, got n={n}")
    n1 = (n + 1) // 2
    first, second = xs[:n1], xs[n1:]
    a = quantile(second, beta)
    b = quantile(second, 1.0 - beta)
    keep = (first >= a) & (first <= b)
    return float(np.sum(np.where(keep, first, 0.0)) / n1)


@dataclass(frozen=True)
class Validator:
    """Configuration of a scalar risk estimator.

    ``k_blocks`` only applies to ``"mom"`` (default ``ceil(log(1/delta))``);
    ``variance`` only to ``"catoni"`` (default: empirical variance of the
    losses being scored).
    """

    kind: str = "catoni"
    delta: float = 0.05
    k_blocks: Optional[int] = None
    variance: Optional[float] = None

    def __post_init__(self):
        if self.kind not in VALIDATOR_KINDS:
            raise ValueError(f"unknown validator kind {self.kind!r}; expected one of {VALIDATOR_KINDS}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.k_blocks is not None and self.k_blocks < 1:
            raise ValueError("k_blocks must be >= 1")
        if self.variance is not None and not self.variance > 0:
            raise ValueError("variance must be positive")

    def blocks(self):
        if self.k_blocks is not None:
            return int(self.k_blocks)
        return max(1, math.ceil(math.log(1.0 / self.delta)))

    def __call__(self, losses):
        return validate(self, losses)


def validate(v, losses):
    """Score a candidate by robustly estimating the mean of its held-out losses."""
    xs = _as_sample(losses)
    if v.kind == "mean":
        return float(np.mean(xs))
    if v.kind == "mom":
        # only the default block count adapts to tiny samples; an explicit one must fit
        k = v.blocks() if v.k_blocks is not None else min(v.blocks(), xs.shape[0])
        return median_of_means(xs, k)
    if v.kind == "trunc":
        return truncated_mean(xs, v.delta)
    variance = v.variance
    if variance is None:
        if xs.min() == xs.max():
            return float(xs[0])
        variance = float(np.var(xs, ddof=1))
    return catoni_mean(xs, variance, v.delta)


class RobustLocation(BaseEstimator):
    """Estimator wrapper around the scalar validators.

    Parameters
    ----------
    method : {"mom", "catoni", "trunc", "mean"}
    delta : float
    k_blocks : int or None
    variance : float or None

    Attributes
    ----------
    location_ : float
    """

    def __init__(self, method="catoni", delta=0.05, k_blocks=None, variance=None):
        self.method = method
        self.delta = delta
        self.k_blocks = k_blocks
        self.variance = variance

    def fit(self, X, y=None):
        x = np.asarray(X, dtype=np.float64)
        if x.ndim == 2 and x.shape[1] == 1:
            x = x[:, 0]
        if x.ndim != 1:
            raise ValueError("RobustLocation expects a 1-d sample or a single column")
        v = Validator(self.method, self.delta, self.k_blocks, self.variance)
        self.location_ = validate(v, x)
        return self

    def predict(self, X):
        check_is_fitted(self, "location_")
        return np.full(np.asarray(X).shape[0], self.location_)
