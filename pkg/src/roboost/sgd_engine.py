"""Projected SGD with step-size schedules, iterate averaging and gradient-cost accounting.

Two drivers share the same arithmetic:

* :func:`run_sgd` walks one index sequence with a single iterate. It is the
  plain reference implementation.
* :func:`run_lockstep` advances k independent sub-processes together, holding
  their iterates as the rows of a (k, d) matrix. Each row only ever sees its
  own indices, so the rows are exactly the iterates ``run_sgd`` would produce
  on each subset; stacking them just removes Python overhead.
"""

import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .vecmath import FeasibleSet, as_param_vec, project_rows

SCHEDULE_KINDS = ("constant", "inverse_t", "horizon")


# ---------------------------------------------------------------------------
# gradient oracles
# ---------------------------------------------------------------------------


class GradOracle:
    """Losses and gradients over a fixed dataset of ``n`` samples.

    Subclasses implement :meth:`_pointwise` (residual-style gradients, one
    sample per row of ``W``) and :meth:`_losses`. Every gradient evaluation
    adds one to :attr:`cost`; loss evaluations are free.
    """

    n: int
    d: int

    def __init__(self):
        self._cost = 0
        self._lock = threading.Lock()

    def __getstate__(self):
        state = self.__dict__.copy()
        state.pop("_lock", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    @property
    def cost(self):
        return self._cost

    def charge(self, m):
        if m < 0:
            raise ValueError("cannot charge a negative cost")
        with self._lock:
            self._cost += int(m)

    def reset_cost(self):
        with self._lock:
            self._cost = 0

    def _check_idx(self, idx):
        idx = np.asarray(idx, dtype=np.intp)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError(f"sample index out of range [0, {self.n})")
        return idx

    def pointwise_grads(self, W, idx):
        """Row ``r`` of the result is the gradient at ``W[r]`` on sample ``idx[r]``."""
        W = np.asarray(W, dtype=np.float64)
        idx = self._check_idx(idx)
        if W.shape != (idx.shape[0], self.d):
            raise ValueError(f"expected W of shape ({idx.shape[0]}, {self.d}), got {W.shape}")
        G = self._pointwise(W, idx)
        self.charge(idx.shape[0])
        return G

    def grad(self, w, i):
        w = as_param_vec(w, self.d)
        return self.pointwise_grads(w[np.newaxis, :], [i])[0]

    def batch_grads(self, w, idx=None):
        """Gradients at one point over many samples, shape (m, d)."""
        w = as_param_vec(w, self.d)
        idx = np.arange(self.n) if idx is None else self._check_idx(idx)
        G = self._batch(w, idx)
        self.charge(idx.shape[0])
        return G

    def losses(self, w, idx=None):
        w = as_param_vec(w, self.d)
        idx = np.arange(self.n) if idx is None else self._check_idx(idx)
        return self._losses(w, idx)

    def loss(self, w, i):
        return float(self.losses(w, [i])[0])

    def loss_matrix(self, W, idx=None):
        """Losses of every candidate row of ``W`` on the samples ``idx``, shape (k, m)."""
        W = np.atleast_2d(np.asarray(W, dtype=np.float64))
        return np.vstack([self.losses(w, idx) for w in W])

    def _pointwise(self, W, idx):
        raise NotImplementedError

    def _batch(self, w, idx):
        return self._pointwise(np.broadcast_to(w, (idx.shape[0], self.d)), idx)

    def _losses(self, w, idx):
        raise NotImplementedError


class SquaredLossOracle(GradOracle):
    """Least-squares loss ``(<w, x_i> - y_i)^2 / 2`` on a design matrix."""

    def __init__(self, X, y):
        super().__init__()
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
            raise ValueError(f"incompatible shapes X {X.shape}, y {y.shape}")
        self.X = X
        self.y = y
        self.n, self.d = X.shape

    def _pointwise(self, W, idx):
        Xi = self.X[idx]
        r = np.sum(W * Xi, axis=1) - self.y[idx]
        return r[:, np.newaxis] * Xi

    def _batch(self, w, idx):
        Xi = self.X[idx]
        r = Xi @ w - self.y[idx]
        return r[:, np.newaxis] * Xi

    def _losses(self, w, idx):
        r = self.X[idx] @ w - self.y[idx]
        return 0.5 * r * r

    def loss_matrix(self, W, idx=None):
        W = np.atleast_2d(np.asarray(W, dtype=np.float64))
        idx = np.arange(self.n) if idx is None else self._check_idx(idx)
        R = W @ self.X[idx].T - self.y[idx]
        return 0.5 * R * R


# ---------------------------------------------------------------------------
# step sizes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepSchedule:
    """Step-size rule alpha_t.

    ``constant``: alpha_t = alpha.
    ``inverse_t``: alpha_t = 1 / (lam * max(1, t)).
    ``horizon``: alpha_0 = 1 / (2 beta1), then alpha_t = a / (lam * n_sub + 2 a beta1),
    where ``n_sub`` is the number of samples the sub-process owns.
    """

    kind: str = "constant"
    alpha: Optional[float] = None
    lam: Optional[float] = None
    a: Optional[float] = None
    beta1: Optional[float] = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        need = {"constant": ("alpha",), "inverse_t": ("lam",), "horizon": ("a", "lam", "beta1")}[self.kind]
        for name in need:
            val = getattr(self, name)
            if val is None or not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{self.kind} schedule needs a positive finite {name}, got {val}")
        if self.kind == "horizon" and self.a / self.b_offset > self.alpha0:
            raise ValueError("horizon schedule violates alpha_t <= alpha_0")

    @classmethod
    def constant(cls, alpha):
        return cls("constant", alpha=float(alpha))

    @classmethod
    def inverse_t(cls, lam):
        return cls("inverse_t", lam=float(lam))

    @classmethod
    def horizon(cls, a, lam, beta1):
        return cls("horizon", a=float(a), lam=float(lam), beta1=float(beta1))

    @property
    def b_offset(self):
        return 2.0 * self.a * self.beta1

    @property
    def alpha0(self):
        return 1.0 / (2.0 * self.beta1)

    def alphas(self, t, n_sub):
        """Vectorized alpha_t for arrays of step indices and sub-process sizes."""
        t = np.asarray(t)
        if self.kind == "constant":
            return np.full(t.shape, self.alpha)
        if self.kind == "inverse_t":
            return 1.0 / (self.lam * np.maximum(1, t))
        n_sub = np.broadcast_to(np.asarray(n_sub, dtype=np.float64), t.shape)
        later = self.a / (self.lam * n_sub + self.b_offset)
        return np.where(t == 0, self.alpha0, later)

    def alpha_at(self, t, n_sub=1):
        return float(self.alphas(np.array([t]), np.array([n_sub]))[0])

    def to_dict(self):
        out = {"kind": self.kind}
        for name in ("alpha", "lam", "a", "beta1"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        return out

    @classmethod
    def from_dict(cls, spec):
        if isinstance(spec, (int, float)):
            return cls.constant(spec)
        spec = dict(spec)
        kind = spec.pop("kind", "constant")
        return cls(kind, **spec)


def as_schedule(step):
    if isinstance(step, StepSchedule):
        return step
    return StepSchedule.from_dict(step)


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------


@dataclass
class SgdRunResult:
    last_iterate: np.ndarray
    average_iterate: np.ndarray
    gradients_used: int


def sgd_step(w, g, alpha, feasible):
    """One projected step ``proj(w - alpha g)``."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    w = as_param_vec(w, feasible.dim)
    g = as_param_vec(g, feasible.dim, name="g")
    return project_rows((w - alpha * g)[np.newaxis, :], feasible)[0]


def run_sgd(oracle, indices, w0, sched, feasible=None):
    """Projected SGD over ``indices`` in order, one gradient per index.

    The average is over the iterates entering each step, w_0, ..., w_{T-1}.
    """
    indices = np.asarray(indices, dtype=np.intp).ravel()
    if indices.shape[0] == 0:
        raise ValueError("run_sgd needs at least one index")
    feasible = feasible or FeasibleSet.ball(oracle.d)
    sched = as_schedule(sched)
    w = as_param_vec(w0, oracle.d, name="w0").copy()
    if not feasible.contains(w):
        raise ValueError("w0 is not feasible")
    n_sub = indices.shape[0]
    total = np.zeros_like(w)
    for t, i in enumerate(indices):
        total += w
        g = oracle.pointwise_grads(w[np.newaxis, :], [i])[0]
        alpha = sched.alpha_at(t, n_sub)
        w = project_rows((w - alpha * g)[np.newaxis, :], feasible)[0]
    return SgdRunResult(w, total / n_sub, int(n_sub))


@dataclass
class Snapshot:
    """State of all sub-processes after ``cost`` gradient evaluations."""

    cost: int
    last: np.ndarray
    average: np.ndarray


def checkpoint_grid(budget, per_decade=20, start=1):
    """Geometric grid of integer costs in ``[start, budget]``, always ending at ``budget``."""
    budget = int(budget)
    if budget < 1:
        return [0]
    lo = math.log10(max(1, start))
    hi = math.log10(budget)
    m = max(2, int(math.ceil((hi - lo) * per_decade)) + 1)
    pts = np.unique(np.round(np.logspace(lo, hi, m)).astype(np.int64))
    pts = [int(p) for p in pts if 1 <= p <= budget]
    if not pts or pts[-1] != budget:
        pts.append(budget)
    return pts


def run_lockstep(oracle, subsets, w0, sched, feasible=None, budget=None, checkpoints=None,
                 shuffle=False, seed=None):
    """Run one projected-SGD sub-process per subset, all starting from ``w0``.

    Sub-process j walks its own subset in order and starts the next pass
    from its own state when a pass ends (reshuffling its subset first when
    ``shuffle`` is set, from its own RNG stream). Every tick advances each
    sub-process with samples left in the current pass by one step, costing
    one gradient each. A step is taken only while the total stays within
    ``budget`` (default: one pass).

    The reported average of a sub-process is the mean of the iterates that
    entered its steps during the current pass, or the previous pass's
    average at the very start of a pass.

    Returns a list of :class:`Snapshot`: one at cost 0, one at the first
    tick reaching each checkpoint, and one at the final cost.
    """
    feasible = feasible or FeasibleSet.ball(oracle.d)
    sched = as_schedule(sched)
    orders = [np.asarray(s, dtype=np.intp).ravel() for s in subsets]
    k = len(orders)
    if k == 0 or any(o.shape[0] == 0 for o in orders):
        raise ValueError("every subset must be non-empty")
    sizes = np.array([o.shape[0] for o in orders])
    budget = int(sizes.sum()) if budget is None else int(budget)
    grid = sorted({int(c) for c in (checkpoints or []) if 0 < c <= budget})

    w0 = as_param_vec(w0, oracle.d, name="w0")
    if not feasible.contains(w0):
        raise ValueError("w0 is not feasible")
    for o in orders:
        oracle._check_idx(o)
    W = np.tile(w0, (k, 1))
    S = np.zeros_like(W)
    cnt = np.zeros(k, dtype=np.int64)
    A = W.copy()
    t = np.zeros(k, dtype=np.int64)
    rngs = None
    if shuffle:
        rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(k)]
        orders = [rng.permutation(o) for rng, o in zip(rngs, orders)]
    max_size = int(sizes.max())

    def order_table():
        # padded (k, max_size) table so one tick picks its samples with a single gather
        tab = np.zeros((k, max_size), dtype=np.intp)
        for j, o in enumerate(orders):
            tab[j, : o.shape[0]] = o
        return tab

    def averages():
        out = A.copy()
        live = cnt > 0
        out[live] = S[live] / cnt[live, np.newaxis]
        return out

    table = order_table()
    const_alpha = sched.alpha if sched.kind == "constant" else None
    all_rows = np.arange(k)
    min_size = int(sizes.min())
    snaps = [Snapshot(0, W.copy(), averages())]
    cost = 0
    pos = 0
    ci = 0
    while cost < budget:
        if pos == max_size:
            live = cnt > 0
            A[live] = S[live] / cnt[live, np.newaxis]
            S[:] = 0.0
            cnt[:] = 0
            pos = 0
            if shuffle:
                orders = [rng.permutation(o) for rng, o in zip(rngs, orders)]
                table = order_table()
        rows = all_rows if pos < min_size else np.flatnonzero(sizes > pos)
        room = budget - cost
        if rows.shape[0] > room:
            rows = rows[:room]
        m = rows.shape[0]
        if m == k:
            idx = table[:, pos]
            S += W
            cnt += 1
            G = oracle._pointwise(W, idx)
            if const_alpha is not None:
                W = project_rows(W - const_alpha * G, feasible)
            else:
                W = project_rows(W - sched.alphas(t, sizes)[:, np.newaxis] * G, feasible)
            t += 1
        else:
            idx = table[rows, pos]
            Wr = W[rows]
            S[rows] += Wr
            cnt[rows] += 1
            G = oracle._pointwise(Wr, idx)
            alpha = sched.alphas(t[rows], sizes[rows])
            W[rows] = project_rows(Wr - alpha[:, np.newaxis] * G, feasible)
            t[rows] += 1
        oracle.charge(m)
        cost += m
        pos += 1
        if ci < len(grid) and cost >= grid[ci]:
            snaps.append(Snapshot(cost, W.copy(), averages()))
            while ci < len(grid) and cost >= grid[ci]:
                ci += 1
    if snaps[-1].cost != cost:
        snaps.append(Snapshot(cost, W.copy(), averages()))
    return snaps
