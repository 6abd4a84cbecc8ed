"""Dense vector helpers: parameter validation, l2-ball projection, order statistics."""

import math
from dataclasses import dataclass

import numpy as np

_BOUNDARY_SLACK = 1.0 + 4.0 * np.finfo(np.float64).eps

def as_param_vec(w, d=None, name="w"):
    """Return ``w`` as a finite 1-d float64 array, checking its length against ``d``."""
    arr = np.asarray(w, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if d is not None and arr.shape[0] != d:
        raise ValueError(f"{name} has dimension {arr.shape[0]}, expected {d}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def as_point_matrix(points, name="points"):
    """Return candidate points as a finite (k, d) float64 array with k >= 1."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty (k, d) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class FeasibleSet:
    """Closed l2 ball ``{w : ||w - center||_2 <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = as_param_vec(self.center, name="center")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be positive and finite, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def ball(cls, d, radius=1e6, center=None):
        """Ball of the given radius around ``center`` (the origin by default)."""
        c = np.zeros(d) if center is None else center
        return cls(center=c, radius=radius)

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def diameter(self):
        return 2.0 * self.radius

    def contains(self, w, rtol=1e-12):
        w = np.asarray(w, dtype=np.float64)
        return bool(np.linalg.norm(w - self.center) <= self.radius * (1.0 + rtol))


def project_rows(W, feasible):
    """Project each row of ``W`` onto ``feasible``; rows already inside are returned untouched."""
    W = np.asarray(W, dtype=np.float64)
    if W.shape[-1] != feasible.dim:
        raise ValueError(f"dimension mismatch: got {W.shape[-1]}, feasible set has {feasible.dim}")
    diff = W - feasible.center
    norms = np.sqrt(np.sum(diff * diff, axis=-1))
    # a rescaled point can sit a rounding unit outside; leaving those alone keeps projection idempotent
    outside = norms > feasible.radius * _BOUNDARY_SLACK
    if not np.any(outside):
        return W
    out = W.copy()
    scale = feasible.radius / norms[outside]
    out[outside] = feasible.center + diff[outside] * scale[:, np.newaxis]
    return out


def project(w, feasible):
    """Euclidean projection of a single point onto the ball."""
    w = as_param_vec(w, feasible.dim)
    return project_rows(w[np.newaxis, :], feasible)[0]


def quantile(xs, q):
    """Lower empirical quantile: the order statistic of rank ``ceil(q * n)`` clamped to ``[1, n]``."""
    xs = np.asarray(xs, dtype=np.float64).ravel()
    n = xs.shape[0]
    if n == 0:
        raise ValueError("quantile of an empty sample")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    rank = min(max(math.ceil(q * n), 1), n)
    return float(np.partition(xs, rank - 1)[rank - 1])


def scalar_median(xs):
    """Median with the midpoint convention for even sample sizes."""
    xs = np.asarray(xs, dtype=np.float64).ravel()
    if xs.shape[0] == 0:
        raise ValueError("median of an empty sample")
    return float(np.median(xs))
