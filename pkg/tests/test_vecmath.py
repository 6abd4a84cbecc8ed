import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from roboost.vecmath import FeasibleSet, as_param_vec, project, project_rows, quantile, scalar_median

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def unit_ball(d=2):
    return FeasibleSet.ball(d, 1.0)


def test_project_interior_point_is_fixed():
    np.testing.assert_array_equal(project([0.0, 0.0], unit_ball()), [0.0, 0.0])


def test_project_radial_scaling():
    np.testing.assert_allclose(project([2.0, 0.0], unit_ball()), [1.0, 0.0])


def test_project_matches_grid_minimizer():
    out = project([3.0, 4.0], unit_ball())
    np.testing.assert_allclose(out, [0.6, 0.8], atol=1e-15)
    # brute force over the boundary circle: the closest ball point to an exterior target lies on it
    th = np.linspace(0, 2 * np.pi, 200001)
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    best = pts[np.argmin(np.sum((pts - [3.0, 4.0]) ** 2, axis=1))]
    np.testing.assert_allclose(out, best, atol=1e-4)


def test_project_dimension_mismatch():
    with pytest.raises(ValueError):
        project([1.0, 2.0, 3.0], unit_ball())
    with pytest.raises(ValueError):
        project_rows(np.zeros((2, 3)), unit_ball())


def test_feasible_set_invariants():
    fs = FeasibleSet.ball(3, 2.5)
    assert fs.diameter == 5.0
    assert fs.dim == 3
    with pytest.raises(ValueError):
        FeasibleSet.ball(3, 0.0)
    with pytest.raises(ValueError):
        FeasibleSet.ball(3, math.inf)


def test_param_vec_rejects_non_finite():
    with pytest.raises(ValueError):
        as_param_vec([1.0, np.nan])
    with pytest.raises(ValueError):
        as_param_vec([1.0, 2.0], d=3)


@pytest.mark.parametrize("xs,q,expected", [([1, 2, 3, 4], 0.5, 2), ([5], 0.0, 5), ([5], 0.73, 5),
                                           ([5], 1.0, 5), ([3, 1, 2], 1.0, 3), ([3, 1, 2], 0.0, 1)])
def test_quantile_examples(xs, q, expected):
    assert quantile(xs, q) == expected


def test_quantile_errors():
    with pytest.raises(ValueError):
        quantile([], 0.5)
    with pytest.raises(ValueError):
        quantile([1.0], 1.5)


@pytest.mark.parametrize("xs,expected", [([3, 1, 2], 2), ([1, 2, 3, 4], 2.5), ([7], 7)])
def test_scalar_median_examples(xs, expected):
    assert scalar_median(xs) == expected


def test_scalar_median_empty():
    with pytest.raises(ValueError):
        scalar_median([])


@given(arrays(np.float64, 3, elements=finite), st.floats(0.1, 100.0))
def test_projection_idempotent(w, radius):
    fs = FeasibleSet.ball(3, radius)
    p = project(w, fs)
    np.testing.assert_array_equal(project(p, fs), p)
    assert np.linalg.norm(p) <= radius * (1 + 1e-15) + 1e-300


@given(arrays(np.float64, 4, elements=finite), arrays(np.float64, 4, elements=finite),
       arrays(np.float64, 4, elements=st.floats(-10, 10)), st.floats(0.1, 100.0))
def test_projection_non_expansive(u, v, c, radius):
    fs = FeasibleSet(c, radius)
    lhs = np.linalg.norm(project(u, fs) - project(v, fs))
    rhs = np.linalg.norm(u - v)
    assert lhs <= rhs * (1 + 1e-9) + 1e-9


@given(st.lists(finite, min_size=1, max_size=30), st.randoms(use_true_random=False))
def test_median_permutation_invariant(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert scalar_median(xs) == scalar_median(ys)


@given(st.lists(finite, min_size=1, max_size=30), st.floats(0, 1), st.floats(0, 1))
def test_quantile_monotone(xs, q1, q2):
    lo, hi = sorted((q1, q2))
    assert quantile(xs, lo) <= quantile(xs, hi)
