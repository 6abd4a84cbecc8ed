"""Robust integration of k candidate vectors into one.

All three rules map a cloud ``{u_1, ..., u_k}`` to a point that is close to
any set holding a strict majority of the candidates, with a constant that
depends only on the margin of that majority.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .vecmath import as_param_vec, as_point_matrix

MERGE_KINDS = ("geomed", "smball", "median")

_WEISZFELD_EPS = 1e-12


def geomed_objective(v, points):
    """Sum of Euclidean distances from ``v`` to each candidate."""
    return float(np.sum(np.sqrt(np.sum((points - v) ** 2, axis=1))))


def geometric_median(points, tol=1e-10, max_iter=1000, return_history=False):
    """Minimizer of the summed l2 distance to the candidates (Weiszfeld iteration).

    Starts at the coordinate-wise mean and adds ``1e-12`` to every distance so
    iterates may land on a candidate. After the loop each candidate itself is
    also scored, which recovers the exact answer when the minimizer sits on a
    data point (where Weiszfeld only converges linearly).

    Parameters
    ----------
    points : array-like of shape (k, d)
    tol : float
        Stop once an update moves the iterate by less than ``tol``.
    max_iter : int
    return_history : bool
        If True also return the objective value after every iteration.
    """
    U = as_point_matrix(points)
    y = U.mean(axis=0)
    history = [geomed_objective(y, U)]
    if U.shape[0] > 1:
        for _ in range(int(max_iter)):
            dist = np.sqrt(np.sum((U - y) ** 2, axis=1)) + _WEISZFELD_EPS
            wts = 1.0 / dist
            y_new = wts @ U / wts.sum()
            step = float(np.linalg.norm(y_new - y))
            y = y_new
            history.append(geomed_objective(y, U))
            if step < tol:
                break
        vertex_obj = np.array([geomed_objective(u, U) for u in U])
        j = int(np.argmin(vertex_obj))
        # a margin above rounding keeps ties (e.g. two points) on the Weiszfeld iterate
        if vertex_obj[j] < history[-1] * (1.0 - 1e-12):
            y = U[j].copy()
            history.append(float(vertex_obj[j]))
    if return_history:
        return y, history
    return y


def smallest_ball_threshold(k, beta=None):
    """Number of candidates each ball must hold: ``ceil(k (beta + 1/2))``, bare majority by default."""
    if beta is None:
        return k // 2 + 1
    if not 0.0 < beta < 0.5:
        raise ValueError(f"beta must lie in (0, 1/2), got {beta}")
    return min(k, max(1, math.ceil(k * (beta + 0.5) - 1e-12)))


def smallest_ball(points, beta=None, return_radii=False):
    """Return the candidate whose ball holding ``ceil(k(beta+1/2))`` candidates is smallest.

    The output is always one of the inputs; ties go to the smallest index.
    """
    U = as_point_matrix(points)
    k = U.shape[0]
    m = smallest_ball_threshold(k, beta)
    diff = U[:, np.newaxis, :] - U[np.newaxis, :, :]
    D = np.sqrt(np.sum(diff * diff, axis=2))
    radii = np.sort(D, axis=1)[:, m - 1]
    j = int(np.argmin(radii))
    if return_radii:
        return U[j].copy(), radii
    return U[j].copy()


def coordinate_median(points):
    """Coordinate-wise median (even counts use the midpoint of the middle pair)."""
    U = as_point_matrix(points)
    return np.median(U, axis=0)


def radius_gamma(u, gamma, points):
    """Radius of the smallest ball around ``u`` holding strictly more than ``k(1/2 + gamma)`` candidates."""
    U = as_point_matrix(points)
    k, d = U.shape
    u = as_param_vec(u, d, name="u")
    if not 0.0 <= gamma < 0.5:
        raise ValueError(f"gamma must lie in [0, 1/2), got {gamma}")
    dist = np.sort(np.sqrt(np.sum((U - u) ** 2, axis=1)))
    need = math.floor(k * (0.5 + gamma) + 1e-12) + 1
    if need > k:
        return float(dist[-1])
    return float(dist[need - 1])


def merge_constant(kind, gamma, d):
    """Constant c_gamma with ``||merge - u|| <= c_gamma * radius_gamma(u)`` for every ``u``."""
    if kind == "smball":
        if not 0.0 <= gamma < 0.5:
            raise ValueError(f"gamma must lie in [0, 1/2) for smball, got {gamma}")
        return 3.0
    if not 0.0 < gamma < 0.5:
        raise ValueError(f"gamma must lie in (0, 1/2) for {kind}, got {gamma}")
    c = 1.0 + 1.0 / (2.0 * gamma)
    if kind == "geomed":
        return c
    if kind == "median":
        return math.sqrt(d) * c
    raise ValueError(f"unknown merge kind {kind!r}")


@dataclass(frozen=True)
class MergeRule:
    """A merge strategy plus its tuning knobs.

    ``beta`` is used by ``"smball"`` only (None means bare majority);
    ``tol`` and ``max_iter`` by ``"geomed"`` only.
    """

    kind: str = "geomed"
    beta: Optional[float] = None
    tol: float = 1e-10
    max_iter: int = 1000

    def __post_init__(self):
        if self.kind not in MERGE_KINDS:
            raise ValueError(f"unknown merge kind {self.kind!r}; expected one of {MERGE_KINDS}")
        if self.beta is not None and not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 1/2), got {self.beta}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def __call__(self, points):
        return merge(self, points)


def merge(rule, points):
    if rule.kind == "geomed":
        return geometric_median(points, rule.tol, rule.max_iter)
    if rule.kind == "smball":
        return smallest_ball(points, rule.beta)
    return coordinate_median(points)


def check_merge_requirement(rule, points, u, gamma, slack=1e-9):
    """Whether ``||merge(points) - u|| <= c_gamma * radius_gamma(u)`` holds (up to ``slack``)."""
    ratio = merge_requirement_ratio(rule, points, u, gamma)
    return ratio <= 1.0 + slack


def merge_requirement_ratio(rule, points, u, gamma):
    """``||merge - u|| / (c_gamma * radius_gamma(u))``; 0/0 counts as 0, x/0 as inf."""
    U = as_point_matrix(points)
    c = merge_constant(rule.kind, gamma, U.shape[1])
    lhs = float(np.linalg.norm(merge(rule, U) - np.asarray(u, dtype=np.float64)))
    rhs = c * radius_gamma(u, gamma, U)
    scale = 1.0 + float(np.max(np.abs(U))) + float(np.max(np.abs(u)))
    if lhs <= 1e-12 * scale:
        return 0.0
    if rhs == 0.0:
        return math.inf
    return lhs / rhs
