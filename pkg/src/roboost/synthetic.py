"""Noisy quadratic testbed with bounded inputs, heavy-tailed noise and an exact excess-risk oracle.

Samples are ``Z = (X, E)`` with ``X_j = c_j * Uniform[-1, 1]`` independent
across coordinates and centered additive noise ``E``. The loss is

    l(w; Z) = (<w - w*, X> + E)^2 / 2,

so the risk is ``<Sigma (w - w*), w - w*> + E[E^2] / 2`` with the diagonal
``Sigma = E[X X^T] / 2``, and the excess risk is available in closed form.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boosting import k_from_delta
from .robust_scalar import DEVIATION_CONSTANTS
from .sgd_engine import GradOracle, StepSchedule

NOISE_FAMILIES = ("normal", "lognormal")
CURVATURES = ("identity", "halfflat")

FLAT_EIGENVALUE = 1e-4
UNIT_EIGENVALUE = 1.0 / 6.0

# constant c in the strongly convex high-probability bound, per merge rule
MERGE_BOUND_CONSTANTS = {"smball": 288.0, "geomed": 1536.0, "median": 1536.0}


@dataclass(frozen=True)
class NoiseModel:
    """Centered noise built from a latent ``Y ~ Normal(0, b^2)``.

    ``normal``: E = Y.  ``lognormal``: E = exp(Y) - exp(b^2 / 2).
    """

    family: str = "lognormal"
    b: float = 1.75

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}; expected one of {NOISE_FAMILIES}")
        if not (self.b >= 0 and math.isfinite(self.b)):
            raise ValueError(f"b must be a non-negative finite number, got {self.b}")

    def sample(self, rng, size):
        y = rng.normal(0.0, self.b, size=size)
        if self.family == "normal":
            return y
        return np.exp(y) - math.exp(self.b ** 2 / 2.0)

    def moment(self, p):
        """Raw moment E[E^p] for integer p >= 0."""
        p = int(p)
        b2 = self.b ** 2
        if self.family == "normal":
            if p % 2:
                return 0.0
            # (p - 1)!! b^p
            return b2 ** (p // 2) * float(np.prod(np.arange(p - 1, 0, -2)))
        m = math.exp(b2 / 2.0)
        return float(sum(math.comb(p, j) * math.exp(j * j * b2 / 2.0) * (-m) ** (p - j)
                         for j in range(p + 1)))

    @property
    def variance(self):
        return noise_variance(self)

    def to_dict(self):
        return {"family": self.family, "b": self.b}


def noise_variance(m):
    """Var E: ``b^2`` for Normal, ``(exp(b^2) - 1) exp(b^2)`` for log-Normal."""
    b2 = m.b ** 2
    if m.family == "normal":
        return b2
    return math.expm1(b2) * math.exp(b2)


def curvature_diag(d, curvature):
    if d < 1:
        raise ValueError("d must be >= 1")
    if curvature == "identity":
        return np.full(d, UNIT_EIGENVALUE)
    if curvature == "halfflat":
        out = np.full(d, FLAT_EIGENVALUE)
        out[: (d + 1) // 2] = UNIT_EIGENVALUE
        return out
    raise ValueError(f"unknown curvature {curvature!r}; expected one of {CURVATURES}")


class QuadraticOracle(GradOracle):
    """Loss/gradient oracle over rows of a realized quadratic dataset."""

    def __init__(self, X, E, w_star):
        super().__init__()
        self.X = X
        self.E = E
        self.w_star = w_star
        self.n, self.d = X.shape

    def _residuals_rows(self, W, idx):
        return np.sum((W - self.w_star) * self.X[idx], axis=1) + self.E[idx]

    def _pointwise(self, W, idx):
        return self._residuals_rows(W, idx)[:, np.newaxis] * self.X[idx]

    def _batch(self, w, idx):
        Xi = self.X[idx]
        r = Xi @ (w - self.w_star) + self.E[idx]
        return r[:, np.newaxis] * Xi

    def _losses(self, w, idx):
        r = self.X[idx] @ (w - self.w_star) + self.E[idx]
        return 0.5 * r * r

    def loss_matrix(self, W, idx=None):
        W = np.atleast_2d(np.asarray(W, dtype=np.float64))
        idx = np.arange(self.n) if idx is None else self._check_idx(idx)
        R = (W - self.w_star) @ self.X[idx].T + self.E[idx]
        return 0.5 * R * R


@dataclass
class QuadraticProblem:
    """A realized problem instance; arrays are read-only after construction."""

    sigma_diag: np.ndarray
    w_star: np.ndarray
    noise: NoiseModel
    X: np.ndarray
    E: np.ndarray
    seed: Optional[int] = None
    curvature: str = "identity"

    def __post_init__(self):
        for name in ("sigma_diag", "w_star", "X", "E"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            setattr(self, name, arr)
        if np.any(self.sigma_diag <= 0):
            raise ValueError("sigma_diag entries must be positive")

    @property
    def d(self):
        return self.sigma_diag.shape[0]

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def scales(self):
        """Support half-widths c_j = sqrt(6 Sigma_jj)."""
        return np.sqrt(6.0 * self.sigma_diag)

    @property
    def y(self):
        """Responses for the equivalent least-squares problem: ``<w*, X> - E``."""
        return self.X @ self.w_star - self.E

    def oracle(self, rows=None):
        """Fresh oracle (own cost counter) over all samples or a subset of rows."""
        if rows is None:
            return QuadraticOracle(self.X, self.E, self.w_star)
        rows = np.asarray(rows, dtype=np.intp) if not isinstance(rows, slice) else rows
        return QuadraticOracle(self.X[rows], self.E[rows], self.w_star)

    def loss_and_grad(self, w, i, oracle=None):
        oracle = oracle or self.oracle()
        return oracle.loss(w, i), oracle.grad(w, i)

    def excess_risk(self, w):
        diff = np.asarray(w, dtype=np.float64) - self.w_star
        if diff.shape != self.w_star.shape:
            raise ValueError(f"expected a vector of length {self.d}, got shape {diff.shape}")
        return float(np.sum(self.sigma_diag * diff * diff))

    def risk_gradient(self, w):
        return 2.0 * self.sigma_diag * (np.asarray(w, dtype=np.float64) - self.w_star)

    def min_risk(self):
        """R* = E[E^2] / 2."""
        return 0.5 * self.noise.moment(2)

    def draw(self, m, rng):
        """Fresh (X, E) samples from the same distribution."""
        X = rng.uniform(-1.0, 1.0, size=(m, self.d)) * self.scales
        return X, self.noise.sample(rng, m)

    def fresh_losses(self, w, m, rng):
        X, E = self.draw(m, rng)
        r = X @ (np.asarray(w, dtype=np.float64) - self.w_star) + E
        return 0.5 * r * r

    def fresh_grads(self, w, m, rng):
        X, E = self.draw(m, rng)
        r = X @ (np.asarray(w, dtype=np.float64) - self.w_star) + E
        return r[:, np.newaxis] * X

    def loss_variance(self, w=None):
        """Exact Var l(w; Z); uses the symmetry of ``<w - w*, X>``."""
        diff = np.zeros(self.d) if w is None else np.asarray(w, dtype=np.float64) - self.w_star
        a2 = (diff * self.scales) ** 2
        s = float(np.sum(a2))
        u2 = s / 3.0
        u4 = float(np.sum(a2 * a2)) / 5.0 + (s * s - float(np.sum(a2 * a2))) / 3.0
        e2, e4 = self.noise.moment(2), self.noise.moment(4)
        m2 = u2 + e2
        m4 = u4 + 6.0 * u2 * e2 + e4  # odd cross terms vanish
        return 0.25 * m4 - 0.25 * m2 * m2

    def grad_noise_at_opt(self):
        """E ||G(w*; Z)||^2 = E[E^2] * sum_j 2 Sigma_jj."""
        return self.noise.moment(2) * float(np.sum(2.0 * self.sigma_diag))


def make_problem(d, n, curvature="identity", noise=None, seed=None):
    """Draw w* ~ Uniform[0,1]^d and n samples, all from ``np.random.default_rng(seed)``."""
    if d < 1 or n < 1:
        raise ValueError(f"need d >= 1 and n >= 1, got d={d}, n={n}")
    noise = noise if noise is not None else NoiseModel()
    sigma = curvature_diag(int(d), curvature)
    rng = np.random.default_rng(seed)
    w_star = rng.uniform(0.0, 1.0, size=d)
    X = rng.uniform(-1.0, 1.0, size=(n, d)) * np.sqrt(6.0 * sigma)
    E = noise.sample(rng, n)
    return QuadraticProblem(sigma, w_star, noise, X, E, seed=seed, curvature=curvature)


@dataclass
class TheoryBounds:
    lam: float
    beta1: float
    beta0: float
    k_strong: int
    k_general: int
    c_merge: float
    last_iterate_bound: float
    M_star: float
    M_delta: float
    smooth_last_iterate_bound: float
    sigma_loss2: float
    sigma_grad2: float
    diameter: float
    averaged_bound: float
    extras: dict = field(default_factory=dict)


def theory_report(p, delta, schedule=None, merge="geomed", w0=None, init_radius=None,
                  validator="catoni"):
    """Constants and bound values of the three high-probability guarantees at this instance.

    Informational only: nothing here feeds back into the learners.

    Parameters
    ----------
    p : QuadraticProblem
    delta : float
    schedule : StepSchedule, optional
        A ``horizon`` schedule supplies ``a``; otherwise a = 1.
    merge : {"geomed", "smball", "median"}
    w0 : array, optional
        Initial point; defaults to ``w*`` shifted by ``init_radius`` along the first axis.
    init_radius : float, optional
        Radius of the initialization ball around w*, default ``5 sqrt(d)``.
    validator : {"mom", "catoni", "trunc"}
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    d, n = p.d, p.n
    lam = 2.0 * float(p.sigma_diag.min())
    c = p.scales
    beta1 = float(np.sum(c * c))
    R0 = 5.0 * math.sqrt(d) if init_radius is None else float(init_radius)
    if w0 is None:
        w0 = p.w_star.copy()
        w0[0] += R0
    dist0 = float(np.linalg.norm(np.asarray(w0) - p.w_star))
    xnorm = np.linalg.norm(p.X, axis=1)
    beta0 = float(np.max((R0 * xnorm + np.abs(p.E)) * xnorm))
    L = math.log(1.0 / delta)

    c_merge = MERGE_BOUND_CONSTANTS[merge] * (d if merge == "median" else 1.0)
    last_iterate_bound = (beta0 ** 2 * beta1 ** 2 / lam ** 3) * c_merge * L / n

    a = schedule.a if isinstance(schedule, StepSchedule) and schedule.kind == "horizon" else 1.0
    b = 2.0 * a * beta1
    g_star = p.grad_noise_at_opt()
    ratio = beta1 * lam * dist0 ** 2 / g_star if g_star > 0 else math.inf
    M_star = (4.0 * beta1 / lam) * (max(ratio, 1.0) - 1.0)
    M_delta = 16.0 * L * (M_star - b)
    if n > M_delta:
        smooth_last_iterate_bound = g_star * (a * beta1 / lam) ** 2 * 2.0 * c_merge * L / (n - M_delta)
    else:
        smooth_last_iterate_bound = math.inf

    sigma_loss2 = p.loss_variance()
    sigma_grad2 = g_star
    diameter = 2.0 * R0
    k_gen = k_from_delta(delta, "general") if delta <= 1.0 / 3.0 else k_from_delta(1.0 / 3.0, "general")
    c_val = DEVIATION_CONSTANTS[validator]
    conf = 1.0 + math.log(2.0 * math.ceil(L) / delta)
    averaged_bound = 2.0 * c_val * math.sqrt(2.0 * conf * sigma_loss2 / n) + 3.0 * (
        k_gen * diameter ** 2 * beta1 / n + math.sqrt(2.0 * k_gen * diameter ** 2 * sigma_grad2 / n))
    return TheoryBounds(
        lam=lam, beta1=beta1, beta0=beta0, k_strong=k_from_delta(delta, "strong_convex"),
        k_general=k_gen, c_merge=c_merge, last_iterate_bound=last_iterate_bound, M_star=M_star,
        M_delta=M_delta, smooth_last_iterate_bound=smooth_last_iterate_bound,
        sigma_loss2=sigma_loss2, sigma_grad2=sigma_grad2, diameter=diameter,
        averaged_bound=averaged_bound,
        extras={"a": a, "b": b, "dist0": dist0},
    )
