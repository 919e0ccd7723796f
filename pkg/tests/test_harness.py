import math
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rdsim import tolerances as tol
from rdsim.harness import (NoiseDistribution, OutcomeCounts, RngStream, chi_square_gof,
                           run_chunked, sample, sample_per_trial, wilson_interval)


def test_rng_reproducible_and_independent():
    a = RngStream(42, 0).uniform(5)
    b = RngStream(42, 0).uniform(5)
    c = RngStream(42, 1).uniform(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rng_position_advances():
    r = RngStream(5, 3)
    first = r.raw(3)
    rest = r.raw(2)
    assert np.array_equal(np.concatenate([first, rest]), RngStream(5, 3).raw(5))


def test_rng_integers_range():
    x = RngStream(1).integers(7, 5000)
    assert x.min() == 0 and x.max() == 6


def test_normal_moments():
    z = RngStream(11).normal(50000)
    assert abs(z.mean()) < 0.03 and abs(z.std() - 1) < 0.02
    assert stats.kstest(z, "norm").pvalue > 1e-4


@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 10 ** 6), st.integers(1, 40))
def test_sample_per_trial_matches_streams(seed, start, count):
    g = NoiseDistribution.gaussian(0.3, 2.0)
    vec = sample_per_trial(g, seed, start, start + count)
    ref = [sample(g, RngStream(seed, i)) for i in range(start, start + count)]
    assert np.allclose(vec, ref, rtol=0, atol=1e-13)


def test_sample_per_trial_uniform_tabulated():
    u = NoiseDistribution.uniform(-1, 3)
    t = NoiseDistribution.tabulated([0, 1, 2], [0, 1, 0])
    for dist in (u, t):
        vec = sample_per_trial(dist, 9, 0, 20)
        ref = [sample(dist, RngStream(9, i)) for i in range(20)]
        assert np.allclose(vec, ref, atol=1e-14)


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseDistribution.gaussian(0, -1)
    with pytest.raises(ValueError):
        NoiseDistribution.uniform(1, 1)
    with pytest.raises(ValueError):
        NoiseDistribution.tabulated([0, 1], [1, 3])   # mass 2
    with pytest.raises(ValueError):
        NoiseDistribution.tabulated([0, 0, 1], [1, 1, 1])
    with pytest.raises(ValueError):
        NoiseDistribution("cauchy")


def test_noise_from_dict_round_trip():
    for d in ({"kind": "gaussian", "mu": 1.0, "sigma": 0.5},
              {"kind": "uniform", "a": -2.0, "b": 1.0},
              {"kind": "tabulated", "x": [0.0, 1.0], "density": [1.0, 1.0]}):
        assert NoiseDistribution.from_dict(d).to_dict() == d
    with pytest.raises(ValueError):
        NoiseDistribution.from_dict({"kind": "gaussian", "scale": 1})


def test_tabulated_inverse_cdf_vs_scipy():
    # triangular density on [0, 2] peaked at 1
    t = NoiseDistribution.tabulated([0, 1, 2], [0, 1, 0])
    u = np.linspace(0, 1, 101)
    assert np.allclose(t.inverse_cdf(u), stats.triang(0.5, 0, 2).ppf(u), atol=1e-12)


def test_tabulated_samples_ks():
    t = NoiseDistribution.tabulated([0, 1, 2], [0, 1, 0])
    x = sample_per_trial(t, 3, 0, 20000)
    assert stats.kstest(x, stats.triang(0.5, 0, 2).cdf).pvalue > 1e-4


def test_symmetry_flags():
    assert NoiseDistribution.gaussian(0, 2).is_symmetric()
    assert not NoiseDistribution.uniform(0, 1).is_symmetric()
    assert NoiseDistribution.tabulated([-1, 0, 1], [0, 1, 0]).is_symmetric()


def test_run_chunked_worker_independent():
    fn = lambda a, b: sample_per_trial(NoiseDistribution.gaussian(), 7, a, b)
    one = run_chunked(fn, 20000, 1, chunk=1000)
    four = run_chunked(fn, 20000, 4, chunk=1000)
    assert np.array_equal(one, four)
    assert run_chunked(fn, 0).size == 0


def test_outcome_counts_validation():
    with pytest.raises(ValueError):
        OutcomeCounts(("L", "R"), (3, 4), 8)
    c = OutcomeCounts(("L", "R"), (3, 4), 8, unresolved=1)
    assert c["R"] == 4 and c.resolved == 7
    assert c.fractions()["L"].denominator == 8
    assert c.to_dict()["unresolved"] == 1


def test_wilson_example():
    lo, hi = wilson_interval(100, 100, 0.95)
    assert lo == pytest.approx(0.9630, abs=1e-3) and hi == 1.0
    assert wilson_interval(0, 10)[0] == 0.0


def test_wilson_formula_oracle():
    # direct evaluation with the textbook formula
    k, n = 37, 120
    z = NormalDist().inv_cdf(0.975)
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    assert wilson_interval(k, n) == pytest.approx((centre - half, centre + half), abs=1e-14)


@given(st.integers(1, 10 ** 6), st.data())
def test_wilson_contains_estimate(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n)
    assert 0 <= lo <= k / n <= hi <= 1


def test_wilson_rejects_bad_input():
    with pytest.raises(ValueError):
        wilson_interval(5, 3)
    with pytest.raises(ValueError):
        wilson_interval(1, 3, 1.0)


def test_chi_square_exact_counts():
    stat, ok = chi_square_gof(OutcomeCounts(("a", "b", "c"), (20, 30, 50), 100), [0.2, 0.3, 0.5])
    assert stat == 0 and ok


def test_chi_square_vs_scipy():
    c = OutcomeCounts(("a", "b"), (480, 520), 1000)
    stat, _ = chi_square_gof(c, [0.5, 0.5])
    assert stat == pytest.approx(stats.chisquare([480, 520]).statistic)


def test_chi_square_detects_bias():
    _, ok = chi_square_gof(OutcomeCounts(("a", "b"), (600, 400), 1000), [0.5, 0.5],
                           tol.FIVE_SIGMA_ALPHA)
    assert not ok


def test_chi_square_undersampled():
    with pytest.raises(ValueError, match="under-sampled"):
        chi_square_gof(OutcomeCounts(("a", "b"), (9, 1), 10), [0.9, 0.1])


def test_five_sigma_alpha():
    assert tol.FIVE_SIGMA_ALPHA == pytest.approx(2 * stats.norm.sf(5), rel=1e-12)
