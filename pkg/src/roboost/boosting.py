"""Confidence boosting for SGD: divide-and-conquer with a robust merge, or with robust validation.

``dc_sgd`` merges the last iterates of k independent sub-processes.
``rv_sgd_ave`` trains on one half of the data, scores each sub-process's
(averaged) iterate on the other half with a robust mean estimate of its
losses, and keeps the best. ``rv_sgd_cv`` is the cross-validation variant
that trains on all the data and scores candidate j on the samples it did not
see.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .merge_rules import MergeRule, merge
from .robust_scalar import Validator, validate
from .sgd_engine import run_lockstep
from .vecmath import FeasibleSet

REGIMES = ("strong_convex", "general")


def partition_indices(n, k):
    """Contiguous k-way split of ``range(n)``; the first ``n % k`` parts are one longer."""
    n, k = int(n), int(k)
    if n < 1:
        raise ValueError("n must be positive")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return np.array_split(np.arange(n), k)


def k_from_delta(delta, regime="strong_convex"):
    """Number of sub-processes giving confidence 1 - delta.

    ``strong_convex``: ceil(8 log(1/delta)).
    ``general``: ceil(log(2 ceil(log(1/delta)) / delta)), defined for delta <= 1/3.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    L = math.log(1.0 / delta)
    if regime == "strong_convex":
        return max(1, math.ceil(8.0 * L - 1e-12))
    if regime == "general":
        if delta > 1.0 / 3.0:
            raise ValueError(f"the general regime needs delta <= 1/3, got {delta}")
        return math.ceil(math.log(2.0 * math.ceil(L) / delta) - 1e-12)
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


@dataclass(frozen=True)
class BoostConfig:
    k: int = 10
    merge: MergeRule = field(default_factory=MergeRule)
    validator: Validator = field(default_factory=Validator)
    average: bool = True
    cv: bool = False

    def __post_init__(self):
        if int(self.k) < 1:
            raise ValueError("k must be >= 1")


def _feasible(oracle, feasible):
    return feasible if feasible is not None else FeasibleSet.ball(oracle.d)


def dc_sgd_path(oracle, w0, cfg, sched, feasible=None, budget=None, checkpoints=None,
                shuffle=False, seed=None):
    """Merged last iterates at each checkpoint, as a list of ``(cost, w)``.

    Sub-processes keep running from their own state between checkpoints;
    the merged point is only reported.
    """
    parts = partition_indices(oracle.n, cfg.k)
    snaps = run_lockstep(oracle, parts, w0, sched, _feasible(oracle, feasible), budget,
                         checkpoints, shuffle, seed)
    return [(s.cost, merge(cfg.merge, s.last)) for s in snaps]


def dc_sgd(oracle, w0, cfg, sched, feasible=None, budget=None, shuffle=False, seed=None):
    """Divide-and-conquer SGD: run k sub-processes from ``w0`` and merge their last iterates."""
    return dc_sgd_path(oracle, w0, cfg, sched, feasible, budget, None, shuffle, seed)[-1][1]


def select_candidate(candidates, loss_rows, validator):
    """Index of the candidate with the smallest robust risk estimate (first one on ties)."""
    scores = np.array([validate(validator, row) for row in loss_rows])
    return int(np.argmin(scores)), scores


def _candidates(snap, average):
    return snap.average if average else snap.last


def rv_sgd_ave_path(oracle_train, valid, w0, cfg, sched, feasible=None, budget=None,
                    checkpoints=None, shuffle=False, seed=None):
    """Robust-validation selection at each checkpoint, as a list of ``(cost, w)``.

    ``valid`` supplies the held-out losses: anything with a
    ``loss_matrix(W)`` method returning one row of losses per candidate.
    """
    parts = partition_indices(oracle_train.n, cfg.k)
    snaps = run_lockstep(oracle_train, parts, w0, sched, _feasible(oracle_train, feasible),
                         budget, checkpoints, shuffle, seed)
    out = []
    for s in snaps:
        C = _candidates(s, cfg.average)
        if cfg.k == 1:
            out.append((s.cost, C[0].copy()))
            continue
        j, _ = select_candidate(C, valid.loss_matrix(C), cfg.validator)
        out.append((s.cost, C[j].copy()))
    return out


def rv_sgd_ave(oracle_train, valid, w0, cfg, sched, feasible=None, budget=None, shuffle=False,
               seed=None):
    """Train k sub-processes on ``oracle_train`` and return the candidate the validator prefers."""
    return rv_sgd_ave_path(oracle_train, valid, w0, cfg, sched, feasible, budget, None,
                           shuffle, seed)[-1][1]


def rv_sgd_cv_path(oracle, w0, cfg, sched, feasible=None, budget=None, checkpoints=None,
                   shuffle=False, seed=None):
    """Cross-validation variant: candidate j is scored on every sample outside its own subset."""
    if cfg.k < 2:
        raise ValueError("the cross-validation variant needs k >= 2")
    parts = partition_indices(oracle.n, cfg.k)
    held_out = [np.setdiff1d(np.arange(oracle.n), p) for p in parts]
    snaps = run_lockstep(oracle, parts, w0, sched, _feasible(oracle, feasible), budget,
                         checkpoints, shuffle, seed)
    out = []
    for s in snaps:
        C = _candidates(s, cfg.average)
        rows = [oracle.losses(C[j], held_out[j]) for j in range(cfg.k)]
        j, _ = select_candidate(C, rows, cfg.validator)
        out.append((s.cost, C[j].copy()))
    return out


def rv_sgd_cv(oracle, w0, cfg, sched, feasible=None, budget=None, shuffle=False, seed=None):
    return rv_sgd_cv_path(oracle, w0, cfg, sched, feasible, budget, None, shuffle, seed)[-1][1]


def majority_lower_bound(k, p_good):
    """Hoeffding lower bound on P(more than k/2 of k independent candidates are good)."""
    if p_good <= 0.5:
        return 0.0
    return 1.0 - math.exp(-2.0 * k * (p_good - 0.5) ** 2)


def simulate_majority(k, p_good, reps, seed=None):
    """Monte-Carlo estimate of P(more than k/2 good) and its standard error."""
    rng = np.random.default_rng(seed)
    good = rng.binomial(k, p_good, size=reps)
    hits = good > k / 2.0
    p = float(hits.mean())
    return p, math.sqrt(max(p * (1.0 - p), 1e-300) / reps)
