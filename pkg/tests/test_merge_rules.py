import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog

from roboost.merge_rules import (MergeRule, check_merge_requirement, coordinate_median,
                                 geometric_median, geomed_objective, merge, merge_constant,
                                 radius_gamma, smallest_ball, smallest_ball_threshold)


def grid_geomed_objective(points, lo=None, hi=None, cells=200, levels=12):
    """Brute-force minimum of the summed distance over a zooming 2-d grid."""
    P = np.asarray(points, dtype=float)
    lo = P.min(axis=0) - 0.5 if lo is None else np.asarray(lo, float)
    hi = P.max(axis=0) + 0.5 if hi is None else np.asarray(hi, float)
    best = None
    for _ in range(levels):
        gx = np.linspace(lo[0], hi[0], cells + 1)
        gy = np.linspace(lo[1], hi[1], cells + 1)
        G = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1).reshape(-1, 2)
        # candidates themselves are always scored, since the minimizer may sit on one
        G = np.vstack([G, P])
        obj = np.sum(np.sqrt(((G[:, None, :] - P[None, :, :]) ** 2).sum(-1)), axis=1)
        i = int(np.argmin(obj))
        if best is None or obj[i] < best[0]:
            best = (float(obj[i]), G[i])
        h = (hi - lo) / cells
        lo, hi = best[1] - 3 * h, best[1] + 3 * h
    return best


def l1_median(points):
    """Minimizer of the summed l1 distance by linear programming."""
    P = np.asarray(points, dtype=float)
    k, d = P.shape
    # variables: v (d), t (k*d) with t >= |v - p|
    c = np.concatenate([np.zeros(d), np.ones(k * d)])
    A, b = [], []
    for i in range(k):
        for j in range(d):
            row = np.zeros(d + k * d)
            row[j], row[d + i * d + j] = 1.0, -1.0
            A.append(row), b.append(P[i, j])
            row = np.zeros(d + k * d)
            row[j], row[d + i * d + j] = -1.0, -1.0
            A.append(row), b.append(-P[i, j])
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(b), bounds=[(None, None)] * (d + k * d))
    return res.x[:d]


cloud = st.integers(1, 9).flatmap(lambda k: arrays(np.float64, (k, 3), elements=st.floats(-100, 100)))


# ---------------------------------------------------------------- geometric median


def test_geomed_single_point():
    np.testing.assert_array_equal(geometric_median([[1.5, -2.0]]), [1.5, -2.0])


def test_geomed_symmetric_cross():
    out = geometric_median([[-1, 0], [1, 0], [0, 1], [0, -1]])
    np.testing.assert_allclose(out, [0, 0], atol=1e-12)


def test_geomed_matches_grid_oracle():
    pts = [[0, 0], [1, 0], [0.2, 0.1]]
    out = geometric_median(pts)
    best_obj, best_pt = grid_geomed_objective(pts, lo=[-0.5, -0.5], hi=[1.5, 1.5])
    assert geomed_objective(out, np.array(pts, float)) == pytest.approx(best_obj, rel=1e-6)
    np.testing.assert_allclose(out, best_pt, atol=1e-3)
    # the obtuse vertex is the exact minimizer here
    np.testing.assert_allclose(out, [0.2, 0.1], atol=1e-9)


def test_geomed_objective_non_increasing(rng):
    for _ in range(50):
        pts = rng.standard_cauchy(size=(int(rng.integers(2, 12)), 4))
        _, hist = geometric_median(pts, return_history=True)
        assert all(b <= a * (1 + 1e-12) for a, b in zip(hist, hist[1:]))


def test_geomed_near_optimal_against_scipy(rng):
    from scipy.optimize import minimize
    for _ in range(20):
        pts = rng.normal(size=(7, 3)) * rng.uniform(0.1, 10)
        out = geometric_median(pts)
        ref = minimize(lambda v: geomed_objective(v, pts), pts.mean(0), method="Nelder-Mead",
                       options=dict(xatol=1e-12, fatol=1e-14, maxiter=20000))
        assert geomed_objective(out, pts) <= (1 + 1e-8) * ref.fun


# ---------------------------------------------------------------- smallest ball


def test_smallest_ball_single():
    np.testing.assert_array_equal(smallest_ball([[3.0, 1.0]]), [3.0, 1.0])


@pytest.mark.parametrize("beta,threshold", [(0.17, 3), (0.1, 2), (None, 2)])
def test_smallest_ball_outlier_example(beta, threshold):
    pts = np.array([[0, 0], [0.1, 0], [100, 0]], float)
    assert smallest_ball_threshold(3, beta) == threshold
    out, radii = smallest_ball(pts, beta, return_radii=True)
    assert not np.array_equal(out, pts[2])
    if threshold == 2:
        np.testing.assert_allclose(radii, [0.1, 0.1, 99.9])
        np.testing.assert_array_equal(out, pts[0])


def test_smallest_ball_identical_points():
    pts = np.tile([2.0, -1.0], (5, 1))
    np.testing.assert_array_equal(smallest_ball(pts), [2.0, -1.0])


def test_smallest_ball_threshold_default_is_bare_majority():
    for k in range(1, 20):
        assert smallest_ball_threshold(k) == k // 2 + 1
    with pytest.raises(ValueError):
        smallest_ball_threshold(5, 0.5)


@given(cloud, st.randoms(use_true_random=False))
def test_smallest_ball_returns_input_and_is_permutation_covariant(pts, rnd):
    out, radii = smallest_ball(pts, return_radii=True)
    assert any(np.array_equal(out, p) for p in pts)
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    out2, radii2 = smallest_ball(pts[perm], return_radii=True)
    assert radii2.min() == radii.min()


# ---------------------------------------------------------------- coordinate median


@pytest.mark.parametrize("pts,expected", [([[1, 5], [2, 4], [3, 3]], [2, 4]), ([[7, 8]], [7, 8]),
                                          ([[0, 0], [0, 10], [10, 0], [10, 10]], [5, 5])])
def test_coordinate_median_examples(pts, expected):
    np.testing.assert_array_equal(coordinate_median(pts), expected)


def test_coordinate_median_is_l1_geometric_median(rng):
    for _ in range(20):
        k = int(rng.choice([1, 3, 5, 7]))
        pts = rng.normal(size=(k, 3))
        np.testing.assert_allclose(coordinate_median(pts), l1_median(pts), atol=1e-8)


# ---------------------------------------------------------------- radius and requirement


def test_radius_gamma_examples():
    pts = np.array([[1, 0], [2, 0], [3, 0]], float)
    assert radius_gamma([0, 0], 0.0, pts) == 2.0
    assert radius_gamma([1, 1], 0.2, np.ones((4, 2))) == 0.0
    assert radius_gamma([0, 0], 0.49, pts) == 3.0
    with pytest.raises(ValueError):
        radius_gamma([0, 0], 0.5, pts)


def test_radius_gamma_count_is_strict():
    # k=4, gamma=0 needs more than 2 points
    pts = np.array([[1, 0], [2, 0], [3, 0], [4, 0]], float)
    assert radius_gamma([0, 0], 0.0, pts) == 3.0
    # k=10, gamma=0.3 needs more than 8 points even though 10 * 0.8 rounds below 8
    pts = np.arange(1, 11, dtype=float)[:, None]
    assert radius_gamma([0.0], 0.3, pts) == 9.0


def test_merge_constants():
    assert merge_constant("smball", 0.0, 5) == 3.0
    assert merge_constant("geomed", 0.25, 5) == 3.0
    assert merge_constant("median", 0.25, 4) == 6.0
    with pytest.raises(ValueError):
        merge_constant("geomed", 0.0, 2)


@pytest.mark.parametrize("kind", ["geomed", "smball", "median"])
def test_requirement_holds_when_all_equal_u(kind):
    pts = np.tile([1.0, 2.0], (6, 1))
    assert check_merge_requirement(MergeRule(kind), pts, [1.0, 2.0], 0.25)


def test_requirement_geomed_centroid_probes(rng):
    for _ in range(1000):
        pts = rng.normal(size=(20, 3)) * rng.uniform(0.1, 5)
        assert check_merge_requirement(MergeRule("geomed"), pts, pts.mean(axis=0), 0.25)


def test_requirement_smball_outlier_example():
    pts = np.array([[0, 0], [0.1, 0], [100, 0]], float)
    assert check_merge_requirement(MergeRule("smball"), pts, [0.05, 0], 0.0)


def test_requirement_invalid_gamma():
    with pytest.raises(ValueError):
        check_merge_requirement(MergeRule("geomed"), np.zeros((3, 2)), [0, 0], 0.0)


def test_merge_rule_validation():
    with pytest.raises(ValueError):
        MergeRule("mean")
    with pytest.raises(ValueError):
        MergeRule("smball", beta=0.7)


@pytest.mark.parametrize("kind", ["geomed", "smball", "median"])
@given(pts=cloud, v=arrays(np.float64, 3, elements=st.floats(-100, 100)))
def test_merge_translation_equivariant(kind, pts, v):
    rule = MergeRule(kind)
    np.testing.assert_allclose(merge(rule, pts + v), merge(rule, pts) + v, atol=1e-6, rtol=1e-9)
