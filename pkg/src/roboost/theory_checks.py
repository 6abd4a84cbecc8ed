"""Executable checks of the deterministic inequalities and statistical guarantees behind the learners.

Deterministic checks (merge requirement, quadratic growth, smoothness)
allow zero failures. Statistical checks (majority concentration, validator
coverage) allow three Monte-Carlo standard errors of slack.
"""

import math
from dataclasses import dataclass

import numpy as np

from .boosting import majority_lower_bound, simulate_majority
from .merge_rules import MergeRule, merge_requirement_ratio
from .robust_scalar import Validator, deviation_bound, validate
from .synthetic import NoiseModel, make_problem

GAMMA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 10))


@dataclass
class PropertyReport:
    """``worst`` is the largest ratio (or smallest margin) seen, in the check's own units."""

    name: str
    instances: int
    failures: int
    worst: float

    @property
    def passed(self):
        return self.failures == 0


def random_cloud(rng, k, d):
    """Candidates with a random-size inlier cluster and scattered, possibly far, outliers."""
    n_in = int(rng.integers(1, k + 1))
    center = rng.normal(0.0, 3.0, size=d)
    spread = 10.0 ** rng.uniform(-3, 1)
    pts = center + spread * rng.normal(size=(k, d))
    n_out = k - n_in
    if n_out:
        scale = 10.0 ** rng.uniform(0, 3)
        pts[n_in:] = center + scale * rng.standard_cauchy(size=(n_out, d))
    if rng.random() < 0.1:
        pts[: max(1, n_in // 2)] = pts[0]
    return pts[rng.permutation(k)]


def random_probe(rng, pts):
    """A probe u: a candidate, a jittered candidate, the cloud mean, or a random far point."""
    k, d = pts.shape
    kind = rng.integers(4)
    if kind == 0:
        return pts[rng.integers(k)].copy()
    if kind == 1:
        return pts[rng.integers(k)] + 0.1 * rng.normal(size=d) * (1.0 + np.abs(pts).max())
    if kind == 2:
        return pts.mean(axis=0)
    return rng.normal(0.0, 10.0 ** rng.uniform(0, 2), size=d)


def _gammas_for(rule):
    if rule.kind == "smball":
        beta = rule.beta or 0.0
        return tuple(g for g in GAMMA_GRID if g >= beta)
    return GAMMA_GRID


def check_merge_bound(rule, n_clouds=1000, k=15, d=5, seed=0, slack=1e-9):
    """Merge requirement ``||merge - u|| <= c_gamma * radius_gamma(u)`` over random clouds and probes.

    The worst value reported is the largest ``||merge - u|| / (c_gamma * radius)``.
    """
    if isinstance(rule, str):
        rule = MergeRule(rule)
    rng = np.random.default_rng(seed)
    gammas = _gammas_for(rule)
    failures = 0
    worst = 0.0
    count = 0
    for _ in range(n_clouds):
        pts = random_cloud(rng, k, d)
        u = random_probe(rng, pts)
        for g in gammas:
            ratio = merge_requirement_ratio(rule, pts, u, g)
            count += 1
            worst = max(worst, ratio)
            failures += ratio > 1.0 + slack
    return PropertyReport(f"merge_bound[{rule.kind}]", count, failures, worst)


def check_quadratic_growth(problem, n_points=1000, seed=0, tol=1e-12):
    """``excess_risk(w) >= (lam / 2) ||w - w*||^2``; worst is the smallest margin."""
    rng = np.random.default_rng(seed)
    lam = 2.0 * float(problem.sigma_diag.min())
    failures = 0
    worst = math.inf
    for i in range(n_points):
        if i == 0:
            w = problem.w_star.copy()
        else:
            w = problem.w_star + rng.normal(0.0, 10.0 ** rng.uniform(-3, 2), size=problem.d)
        diff = w - problem.w_star
        margin = problem.excess_risk(w) - 0.5 * lam * float(diff @ diff)
        worst = min(worst, margin)
        failures += margin < -tol * (1.0 + float(diff @ diff))
    return PropertyReport(f"quadratic_growth[{problem.curvature}]", n_points, failures, worst)


def check_smoothness(problem, n_pairs=1000, seed=0, tol=1e-12):
    """``0 <= f(u) - f(v) - <grad f(v), u - v> <= (beta / 2) ||u - v||^2`` with beta = 2 max Sigma.

    ``f`` is the excess risk. Worst is the smallest relative slack of the two sides.
    """
    rng = np.random.default_rng(seed)
    beta = 2.0 * float(problem.sigma_diag.max())
    failures = 0
    worst = math.inf
    for i in range(n_pairs):
        v = problem.w_star + rng.normal(0.0, 10.0 ** rng.uniform(-2, 2), size=problem.d)
        u = v.copy() if i == 0 else v + rng.normal(0.0, 10.0 ** rng.uniform(-2, 2), size=problem.d)
        gap = problem.excess_risk(u) - problem.excess_risk(v) - float(problem.risk_gradient(v) @ (u - v))
        dist2 = float((u - v) @ (u - v))
        scale = tol * (1.0 + problem.excess_risk(u) + problem.excess_risk(v) + dist2)
        lo_ok = gap >= -scale
        hi_ok = gap <= 0.5 * beta * dist2 + scale
        failures += not (lo_ok and hi_ok)
        if dist2 > 0:
            worst = min(worst, gap / (0.5 * beta * dist2), 1.0 - gap / (0.5 * beta * dist2))
        else:
            worst = min(worst, 0.0) if abs(gap) <= scale else -math.inf
    return PropertyReport(f"smoothness[{problem.curvature}]", n_pairs, failures, worst)


def check_majority_bound(k=20, p_good=0.75, reps=100000, seed=0):
    """Empirical P(majority good) against the Hoeffding bound, with 3 standard errors of slack."""
    p, se = simulate_majority(k, p_good, reps, seed)
    bound = majority_lower_bound(k, p_good)
    margin = p - (bound - 3.0 * se)
    return PropertyReport(f"majority[k={k},p={p_good}]", reps, int(margin < 0), margin)


def coverage_violations(kind, n=500, delta=0.05, reps=2000, noise=None, seed=0):
    """Count how often a validator misses the noise mean by more than its deviation bound.

    Catoni gets the true variance, as its guarantee assumes a known bound.
    """
    noise = noise if noise is not None else NoiseModel("lognormal", 1.75)
    var = noise.variance
    v = Validator(kind, delta, variance=var if kind == "catoni" else None)
    bound = deviation_bound(kind, n, var, delta)
    rng = np.random.default_rng(seed)
    misses = 0
    for _ in range(reps):
        xs = noise.sample(rng, n)
        misses += abs(validate(v, xs)) > bound
    return misses, bound


def check_validator_coverage(kind, n=500, delta=0.05, reps=2000, noise=None, seed=0):
    misses, _ = coverage_violations(kind, n, delta, reps, noise, seed)
    rate = misses / reps
    limit = delta + 3.0 * math.sqrt(delta * (1.0 - delta) / reps)
    return PropertyReport(f"coverage[{kind}]", reps, int(rate > limit), rate)


def run_all(seed=0, quick=False):
    """The full battery used by the ``verify`` command."""
    clouds = 200 if quick else 1000
    pts = 200 if quick else 2000
    reps = 400 if quick else 2000
    ident = make_problem(16, 1, "identity", seed=seed)
    flat = make_problem(16, 1, "halfflat", seed=seed)
    out = [check_merge_bound(MergeRule(kind), clouds, 15, 5, seed + i)
           for i, kind in enumerate(("geomed", "smball", "median"))]
    out += [check_quadratic_growth(ident, pts, seed), check_quadratic_growth(flat, pts, seed),
            check_smoothness(ident, pts, seed), check_smoothness(flat, pts, seed),
            check_majority_bound(20, 0.75, 20000 if quick else 100000, seed)]
    out += [check_validator_coverage(kind, 500, 0.05, reps, seed=seed + 10 + i)
            for i, kind in enumerate(("mom", "catoni", "trunc"))]
    return out
