"""Full-batch and robust gradient descent baselines, plus plain single-process SGD.

Every batch method computes a direction from per-sample gradients and takes
``w <- proj(w - alpha * direction)``. Costs follow the gradient-evaluation
convention: ``n`` per step, except MoM-by-GD which only differentiates on
the selected block.
"""

from dataclasses import dataclass

import numpy as np

from .merge_rules import geometric_median
from .robust_scalar import catoni_mean_columns
from .sgd_engine import StepSchedule, run_lockstep
from .vecmath import FeasibleSet, as_param_vec, project_rows

BASELINES = ("erm-gd", "sgd", "rgd-mom", "rgd-m", "rgd-lec")


def _blocks(n, k):
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return np.array_split(np.arange(n), k)


def direction_erm(oracle, w):
    """Empirical mean gradient; costs n."""
    return oracle.batch_grads(w).mean(axis=0)


def direction_rgd_mom(oracle, w, k, tol=1e-10):
    """Geometric median of the k block-mean gradients; costs n."""
    blocks = _blocks(oracle.n, k)
    G = oracle.batch_grads(w)
    means = np.vstack([G[b].mean(axis=0) for b in blocks])
    if k == 1:
        return means[0]
    return geometric_median(means, tol=tol)


def direction_rgd_m(oracle, w, delta=0.05):
    """Per-coordinate Catoni estimate with the empirical variance plugged in; costs n."""
    G = oracle.batch_grads(w)
    return catoni_mean_columns(G, delta)


def median_block(block_losses):
    """Position of the median block; the lower middle one when the count is even."""
    order = np.argsort(np.asarray(block_losses), kind="stable")
    return int(order[(len(order) - 1) // 2])


def select_mom_block(oracle, w, k):
    """Indices of the block whose mean loss is the median of the block means (free)."""
    blocks = _blocks(oracle.n, k)
    losses = oracle.losses(w)
    return blocks[median_block([losses[b].mean() for b in blocks])]


def direction_mom_by_gd(oracle, w, k, block=None):
    """Mean gradient over the median-loss block; costs the size of that block."""
    if block is None:
        block = select_mom_block(oracle, w, k)
    return oracle.batch_grads(w, block).mean(axis=0)


@dataclass(frozen=True)
class BaselineConfig:
    """``method`` is one of :data:`BASELINES`; ``k`` is used by rgd-mom and rgd-lec, ``delta`` by rgd-m."""

    method: str = "erm-gd"
    alpha: float = 0.1
    k: int = 10
    delta: float = 0.05
    shuffle: bool = False
    merge_tol: float = 1e-10

    def __post_init__(self):
        if self.method not in BASELINES:
            raise ValueError(f"unknown baseline {self.method!r}; expected one of {BASELINES}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if int(self.k) < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


def run_baseline(cfg, oracle, w0, budget, feasible=None, checkpoints=None, seed=None):
    """Iterate until the next step would exceed ``budget`` gradient evaluations.

    Returns ``[(cost, w), ...]`` with the initial point, the first iterate
    at or past each checkpoint, and the final iterate.
    """
    feasible = feasible or FeasibleSet.ball(oracle.d)
    budget = int(budget)
    if cfg.method == "sgd":
        snaps = run_lockstep(oracle, [np.arange(oracle.n)], w0, StepSchedule.constant(cfg.alpha),
                             feasible, budget, checkpoints, cfg.shuffle, seed)
        return [(s.cost, s.last[0].copy()) for s in snaps]

    w = as_param_vec(w0, oracle.d, name="w0").copy()
    if not feasible.contains(w):
        raise ValueError("w0 is not feasible")
    grid = sorted({int(c) for c in (checkpoints or []) if 0 < c <= budget})
    path = [(0, w.copy())]
    cost = 0
    ci = 0
    if cfg.method in ("rgd-mom", "rgd-lec"):
        _blocks(oracle.n, cfg.k)
    while True:
        block = None
        if cfg.method == "rgd-lec":
            block = select_mom_block(oracle, w, cfg.k)
            step_cost = block.shape[0]
        else:
            step_cost = oracle.n
        if cost + step_cost > budget:
            break
        if cfg.method == "erm-gd":
            g = direction_erm(oracle, w)
        elif cfg.method == "rgd-mom":
            g = direction_rgd_mom(oracle, w, cfg.k, cfg.merge_tol)
        elif cfg.method == "rgd-m":
            g = direction_rgd_m(oracle, w, cfg.delta)
        else:
            g = direction_mom_by_gd(oracle, w, cfg.k, block)
        w = project_rows((w - cfg.alpha * g)[np.newaxis, :], feasible)[0]
        cost += step_cost
        if ci < len(grid) and cost >= grid[ci]:
            path.append((cost, w.copy()))
            while ci < len(grid) and cost >= grid[ci]:
                ci += 1
    if path[-1][0] != cost:
        path.append((cost, w.copy()))
    return path
