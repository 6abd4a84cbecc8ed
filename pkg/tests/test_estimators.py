import numpy as np
import pytest
from sklearn.base import clone

from roboost import (DCSGDRegressor, ProjectedSGDRegressor, RobustGDRegressor, RVSGDRegressor,
                     make_problem)
from roboost.boosting import BoostConfig, dc_sgd_path
from roboost.merge_rules import MergeRule
from roboost.sgd_engine import StepSchedule
from roboost.synthetic import NoiseModel
from roboost.vecmath import FeasibleSet

ESTIMATORS = [
    DCSGDRegressor(k=4, step=0.05, budget=2000),
    RVSGDRegressor(k=4, step=0.05, budget=1000),
    RVSGDRegressor(k=4, step=0.05, budget=2000, cv=True, validator="mom"),
    ProjectedSGDRegressor(step=0.05, budget=2000, average=True),
    RobustGDRegressor("rgd-mom", step=0.5, k=5, budget=20000),
    RobustGDRegressor("rgd-m", step=0.5, budget=20000),
    RobustGDRegressor("rgd-lec", step=0.5, k=5, budget=4000),
    RobustGDRegressor("erm-gd", step=0.5, budget=20000),
]


def _data(n=400, seed=0):
    p = make_problem(3, n, noise=NoiseModel("normal", 0.1), seed=seed)
    return p, p.X, p.y


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_clone_and_params(est):
    c = clone(est)
    assert c.get_params() == est.get_params()
    c.set_params(budget=123)
    assert c.budget == 123 and est.budget != 123
    assert not hasattr(c, "coef_")


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_fit_predict_recovers_coefficients(est):
    p, X, y = _data()
    m = clone(est).fit(X, y)
    assert m.n_features_in_ == 3
    assert p.excess_risk(m.coef_) < 0.05
    np.testing.assert_allclose(m.predict(X), X @ m.coef_)
    assert 0 < m.n_gradients_ <= m.budget
    assert m.score(X, y) > 0.9
    costs = [c for c, _ in m.trajectory_]
    assert costs == sorted(costs)


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_input_validation(est):
    _, X, y = _data()
    with pytest.raises(ValueError):
        clone(est).fit(X, y[:-1])
    with pytest.raises(ValueError):
        clone(est).fit(np.where(np.arange(X.size).reshape(X.shape) == 5, np.nan, X), y)
    m = clone(est).fit(X, y)
    with pytest.raises(ValueError):
        m.predict(X[:, :2])


def test_predict_before_fit():
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        DCSGDRegressor().predict(np.zeros((2, 3)))


def test_dc_regressor_matches_routine_on_problem_data():
    p, X, y = _data(300, seed=3)
    w0 = np.zeros(3)
    m = DCSGDRegressor(k=3, step=0.05, budget=900, random_state=0).fit(X, y, coef_init=w0)
    path = dc_sgd_path(p.oracle(), w0, BoostConfig(3, MergeRule("geomed")), StepSchedule.constant(0.05),
                       FeasibleSet.ball(3, 1e6), 900, None, False, 0)
    np.testing.assert_allclose(m.coef_, path[-1][1], rtol=1e-9, atol=1e-12)


def test_random_state_reproducible_with_shuffle():
    _, X, y = _data()
    a = DCSGDRegressor(k=4, budget=3000, shuffle=True, random_state=5).fit(X, y).coef_
    b = DCSGDRegressor(k=4, budget=3000, shuffle=True, random_state=5).fit(X, y).coef_
    c = DCSGDRegressor(k=4, budget=3000, shuffle=True, random_state=6).fit(X, y).coef_
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_radius_keeps_coefficients_feasible():
    _, X, y = _data()
    for est in ESTIMATORS:
        m = clone(est).set_params(radius=0.3).fit(X, y)
        assert np.linalg.norm(m.coef_) <= 0.3 * (1 + 1e-12)


def test_schedule_dict_step():
    _, X, y = _data()
    m = ProjectedSGDRegressor(step={"kind": "constant", "alpha": 0.05}, budget=400).fit(X, y)
    n = ProjectedSGDRegressor(step=0.05, budget=400).fit(X, y)
    assert np.array_equal(m.coef_, n.coef_)
