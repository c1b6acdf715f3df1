import numpy as np
import numpy.testing as npt
import pytest

from conftest import make_design
from shiftshare_ri import (
    ConfigError,
    IIDNormal,
    KnownDistribution,
    SignChange,
    Statistic,
    TestSpec,
    confidence_interval,
    ri_test,
    shift_share_estimate,
)
from dataclasses import replace


def spec_ci(**kw):
    base = dict(b=0.0, statistic=Statistic.T1, scheme=SignChange(), L=99, alpha=0.1, seed=5)
    base.update(kw)
    return TestSpec(**base)


def test_grid_points_match_standalone_tests():
    # shared draws across the grid must reproduce each standalone test
    # exactly: the draws never depend on the null value for built-ins
    d = make_design(seed=1, N=16, J=6)
    spec = spec_ci()
    grid = np.linspace(-1.0, 2.0, 13)
    res = confidence_interval(d, spec, grid)
    for i, b in enumerate(grid):
        solo = ri_test(d, replace(spec, b=float(b)))
        assert res.p_values[i] == solo.p_value
        assert res.retained[i] == (not solo.reject)


def test_known_distribution_grid_matches_standalone():
    sampler = lambda rng, S, e_b, g: rng.standard_normal(g.shape[0])
    d = make_design(seed=2, N=14, J=5)
    spec = spec_ci(scheme=KnownDistribution(sampler), L=49)
    grid = np.linspace(-0.5, 1.5, 7)
    res = confidence_interval(d, spec, grid)
    for i, b in enumerate(grid):
        solo = ri_test(d, replace(spec, b=float(b)))
        assert res.p_values[i] == solo.p_value


def test_interval_covers_point_estimate_in_strong_design():
    d = make_design(seed=3, N=60, J=12, beta=1.0)
    beta_hat = shift_share_estimate(d).beta_hat
    grid = np.linspace(beta_hat - 3.0, beta_hat + 3.0, 61)
    res = confidence_interval(d, spec_ci(scheme=IIDNormal(), L=199), grid)
    assert res.hull is not None
    lo, hi = res.hull
    assert lo <= beta_hat <= hi
    npt.assert_array_equal(res.retained_values, grid[res.retained])


def test_confidence_sets_nest_across_levels():
    d = make_design(seed=4, N=20, J=8)
    grid = np.linspace(-2.0, 3.0, 41)
    wide = confidence_interval(d, spec_ci(alpha=0.01), grid)
    narrow = confidence_interval(d, spec_ci(alpha=0.5), grid)
    # rejecting is monotone in alpha, so the 99% set contains the 50% set
    assert np.all(wide.retained[narrow.retained])


def test_empty_confidence_set_reported():
    d = make_design(seed=5, N=40, J=10, beta=0.0)
    grid = np.linspace(40.0, 50.0, 5)  # far from any plausible value
    res = confidence_interval(d, spec_ci(L=199), grid)
    assert res.hull is None
    assert not res.retained.any()
    assert not res.disconnected
    assert res.retained_values.size == 0


def test_disconnected_retained_set_flagged():
    # frozen case found by search: coarse grid, small L, loose level
    d = make_design(seed=2, N=10, J=5)
    spec = TestSpec(b=0.0, statistic=Statistic.T1, scheme=SignChange(), L=19, alpha=0.3, seed=2)
    res = confidence_interval(d, spec, np.linspace(-3, 4, 29))
    assert res.retained.any()
    assert res.disconnected
    idx = np.flatnonzero(res.retained)
    assert idx[-1] - idx[0] + 1 > idx.size


def test_grid_validation():
    d = make_design(seed=6)
    with pytest.raises(ConfigError):
        confidence_interval(d, spec_ci(), np.array([]))
    with pytest.raises(ConfigError):
        confidence_interval(d, spec_ci(), np.array([1.0, 0.5]))
    with pytest.raises(ConfigError):
        confidence_interval(d, spec_ci(), np.array([0.0, np.nan]))
    with pytest.raises(ConfigError):
        confidence_interval(d, spec_ci(), np.zeros((2, 2)))


def test_outputs_read_only():
    d = make_design(seed=7)
    res = confidence_interval(d, spec_ci(L=29), np.linspace(-1, 1, 5))
    for arr in (res.b_grid, res.p_values, res.retained):
        assert not arr.flags.writeable


def test_redraws_accumulate_across_grid():
    def sampler(rng, S, e_b, g):
        if rng.uniform() < 0.4:
            return np.zeros(g.shape[0])
        return rng.standard_normal(g.shape[0])

    d = make_design(seed=8, N=12, J=5)
    spec = spec_ci(scheme=KnownDistribution(sampler), L=60)
    res = confidence_interval(d, spec, np.linspace(-0.5, 0.5, 4))
    assert res.n_degenerate_redraws > 0


def test_threads_do_not_change_confidence_set():
    d = make_design(seed=9, N=18, J=7)
    grid = np.linspace(-1.5, 2.5, 21)
    a = confidence_interval(d, spec_ci(L=256), grid, threads=1)
    b = confidence_interval(d, spec_ci(L=256), grid, threads=8)
    npt.assert_array_equal(a.p_values, b.p_values)
    npt.assert_array_equal(a.retained, b.retained)
