import math

import numpy as np
import pytest

from roboost.merge_rules import MergeRule
from roboost.synthetic import make_problem
from roboost.theory_checks import (check_merge_bound, check_majority_bound, check_quadratic_growth, check_smoothness,
                                   check_validator_coverage, random_cloud, run_all)


@pytest.mark.parametrize("kind", ["geomed", "smball", "median"])
def test_merge_requirement_every_rule(kind):
    rep = check_merge_bound(MergeRule(kind), n_clouds=300, seed=1)
    assert rep.passed and rep.instances >= 300
    assert 0 < rep.worst <= 1


def test_merge_requirement_check_is_not_vacuous():
    # demanding the merge be 100x closer than the constant allows must fail somewhere
    rep = check_merge_bound(MergeRule("geomed"), n_clouds=200, seed=2, slack=-0.99)
    assert rep.failures > 0


def test_random_cloud_shapes():
    rng = np.random.default_rng(0)
    for _ in range(50):
        pts = random_cloud(rng, 15, 5)
        assert pts.shape == (15, 5) and np.all(np.isfinite(pts))


@pytest.mark.parametrize("curv", ["identity", "halfflat"])
def test_growth_and_smoothness(curv):
    p = make_problem(8, 1, curv, seed=3)
    assert check_quadratic_growth(p, 500, seed=4).passed
    sm = check_smoothness(p, 500, seed=5)
    # identity curvature makes the upper bound an equality, so the slack is rounding-level
    assert sm.passed and sm.worst >= -1e-6


def test_majority_bound():
    rep = check_majority_bound(20, 0.75, 50000, seed=6)
    assert rep.passed and rep.worst > 0


@pytest.mark.parametrize("kind", ["mom", "catoni", "trunc"])
def test_validator_coverage(kind):
    rep = check_validator_coverage(kind, 500, 0.05, 500, seed=7)
    assert rep.passed and rep.worst <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / 500)


def test_run_all_quick():
    reps = run_all(seed=0, quick=True)
    assert len(reps) == 11
    assert all(r.passed for r in reps), [r for r in reps if not r.passed]
