"""scikit-learn style least-squares regressors built on the boosting and baseline routines.

All estimators fit ``y ~ X @ coef_`` (no intercept) from the per-sample
loss ``(<w, x_i> - y_i)^2 / 2`` and expose the gradient cost they spent in
``n_gradients_``.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, validate_data

from .boosting import (BoostConfig, dc_sgd_path, partition_indices, rv_sgd_ave_path,
                       rv_sgd_cv_path)
from .merge_rules import MergeRule
from .rgd_baselines import BaselineConfig, run_baseline
from .robust_scalar import Validator
from .sgd_engine import SquaredLossOracle, as_schedule, checkpoint_grid, run_lockstep
from .vecmath import FeasibleSet, as_param_vec


class _LinearBase(RegressorMixin, BaseEstimator):
    def _setup(self, X, y, coef_init):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        d = X.shape[1]
        w0 = np.zeros(d) if coef_init is None else as_param_vec(coef_init, d, name="coef_init")
        feasible = FeasibleSet.ball(d, self.radius)
        return X, y, w0, feasible

    def _budget(self, n):
        return n if self.budget is None else int(self.budget)

    def _finish(self, path, oracle):
        self.trajectory_ = [(int(c), w) for c, w in path]
        self.coef_ = path[-1][1].copy()
        self.n_gradients_ = int(oracle.cost)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, reset=False, dtype=np.float64)
        return X @ self.coef_


class DCSGDRegressor(_LinearBase):
    """Divide-and-conquer SGD with a robust merge of the k last iterates.

    Parameters
    ----------
    k : int
    merge : {"geomed", "smball", "median"}
    step : float or dict
        Constant step size, or a schedule mapping accepted by ``StepSchedule.from_dict``.
    budget : int or None
        Total gradient evaluations; ``None`` means one pass.
    radius : float
        Radius of the feasible l2 ball around the origin.
    shuffle : bool
        Reshuffle each subset between passes.
    random_state : int or None
    """

    def __init__(self, k=10, merge="geomed", step=0.01, budget=None, radius=1e6, shuffle=False,
                 random_state=None):
        self.k = k
        self.merge = merge
        self.step = step
        self.budget = budget
        self.radius = radius
        self.shuffle = shuffle
        self.random_state = random_state

    def fit(self, X, y, coef_init=None, checkpoints=None):
        X, y, w0, feasible = self._setup(X, y, coef_init)
        oracle = SquaredLossOracle(X, y)
        cfg = BoostConfig(k=self.k, merge=MergeRule(self.merge))
        path = dc_sgd_path(oracle, w0, cfg, as_schedule(self.step), feasible,
                           self._budget(X.shape[0]), checkpoints, self.shuffle, self.random_state)
        return self._finish(path, oracle)


class RVSGDRegressor(_LinearBase):
    """SGD sub-processes selected by a robust estimate of held-out risk.

    With ``cv=False`` the first half of the rows trains and the second half
    validates; with ``cv=True`` every row trains and candidate j is scored
    on the rows outside its own subset.

    Parameters
    ----------
    k : int
    validator : {"catoni", "mom", "trunc", "mean"}
    delta : float
        Confidence level handed to the validator.
    average : bool
        Use averaged iterates (otherwise last iterates).
    cv : bool
    step, budget, radius, shuffle, random_state
        As in :class:`DCSGDRegressor`.
    """

    def __init__(self, k=10, validator="catoni", delta=0.05, average=True, cv=False, step=0.01,
                 budget=None, radius=1e6, shuffle=False, random_state=None):
        self.k = k
        self.validator = validator
        self.delta = delta
        self.average = average
        self.cv = cv
        self.step = step
        self.budget = budget
        self.radius = radius
        self.shuffle = shuffle
        self.random_state = random_state

    def fit(self, X, y, coef_init=None, checkpoints=None):
        X, y, w0, feasible = self._setup(X, y, coef_init)
        cfg = BoostConfig(k=self.k, validator=Validator(self.validator, self.delta),
                          average=self.average, cv=self.cv)
        sched = as_schedule(self.step)
        n = X.shape[0]
        if self.cv:
            oracle = SquaredLossOracle(X, y)
            path = rv_sgd_cv_path(oracle, w0, cfg, sched, feasible, self._budget(n), checkpoints,
                                  self.shuffle, self.random_state)
        else:
            half = n // 2
            if half < 1 or n - half < 1:
                raise ValueError("need at least 2 samples to split into training and validation halves")
            oracle = SquaredLossOracle(X[:half], y[:half])
            valid = SquaredLossOracle(X[half:], y[half:])
            path = rv_sgd_ave_path(oracle, valid, w0, cfg, sched, feasible, self._budget(half),
                                   checkpoints, self.shuffle, self.random_state)
        return self._finish(path, oracle)


class ProjectedSGDRegressor(_LinearBase):
    """Single-process projected SGD returning the last or the averaged iterate."""

    def __init__(self, step=0.01, budget=None, average=False, radius=1e6, shuffle=False,
                 random_state=None):
        self.step = step
        self.budget = budget
        self.average = average
        self.radius = radius
        self.shuffle = shuffle
        self.random_state = random_state

    def fit(self, X, y, coef_init=None, checkpoints=None):
        X, y, w0, feasible = self._setup(X, y, coef_init)
        oracle = SquaredLossOracle(X, y)
        # one sub-process owning every row is plain SGD
        snaps = run_lockstep(oracle, partition_indices(X.shape[0], 1), w0, as_schedule(self.step),
                             feasible, self._budget(X.shape[0]), checkpoints, self.shuffle,
                             self.random_state)
        path = [(s.cost, (s.average if self.average else s.last)[0].copy()) for s in snaps]
        return self._finish(path, oracle)


class RobustGDRegressor(_LinearBase):
    """Full-batch gradient descent with a plain or robust gradient estimate.

    Parameters
    ----------
    method : {"erm-gd", "rgd-mom", "rgd-m", "rgd-lec"}
    step : float
    k : int
        Blocks for rgd-mom and rgd-lec.
    delta : float
        Confidence for rgd-m.
    budget : int or None
        Gradient evaluations; ``None`` means 100 full passes.
    radius : float
    """

    def __init__(self, method="rgd-mom", step=0.1, k=10, delta=0.05, budget=None, radius=1e6):
        self.method = method
        self.step = step
        self.k = k
        self.delta = delta
        self.budget = budget
        self.radius = radius

    def fit(self, X, y, coef_init=None, checkpoints=None):
        X, y, w0, feasible = self._setup(X, y, coef_init)
        oracle = SquaredLossOracle(X, y)
        cfg = BaselineConfig(self.method, float(self.step), self.k, self.delta)
        budget = 100 * X.shape[0] if self.budget is None else int(self.budget)
        path = run_baseline(cfg, oracle, w0, budget, feasible, checkpoints)
        return self._finish(path, oracle)


__all__ = ["DCSGDRegressor", "RVSGDRegressor", "ProjectedSGDRegressor", "RobustGDRegressor",
           "checkpoint_grid"]
