import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxlab.curves import circle_curve, make_polyline, map_curve, nested_circles_curve, nested_radii, reverse_curve
from fluxlab.errors import ValidationError
from fluxlab.monte_carlo import (
    SamplerSpec,
    action_along,
    batch_means_stderr,
    count_in_region,
    estimate_statistic,
    shoelace_area,
    winding_numbers,
)
from fluxlab.sampler import PointConfig, sample_ginibre, sample_poisson

UNIT = circle_curve(0j, 1.0, 64)


def config(points, R=5.0, c=1.0):
    return PointConfig(np.asarray(points, dtype=complex), R, "test", 0, c)


def test_count_examples():
    assert count_in_region(config([]), UNIT) == 0
    assert count_in_region(config([0j]), UNIT) == 1
    assert count_in_region(config([0j]), reverse_curve(UNIT)) == -1
    assert count_in_region(config([3 + 0j]), UNIT) == 0


def test_nested_circles_multiplicity():
    eps, k = 0.5, 6
    curve = nested_circles_curve(eps, k, segments=256)
    ell = nested_radii(eps, k)[:-1]
    z = 0.9 * ell[0] * np.exp(0.3j)
    expected = int(np.sum(ell > 0.9 * ell[0]))
    assert count_in_region(config([z]), curve) == expected
    z2 = 0.9 * ell[3] * np.exp(-1.1j)
    assert count_in_region(config([z2]), curve) == int(np.sum(ell > 0.9 * ell[3]))


def test_count_window_violation():
    with pytest.raises(ValidationError, match="beyond"):
        count_in_region(config([], R=0.5), UNIT)


def test_shoelace_area():
    sq = make_polyline([0, 2, 2 + 2j, 2j], closed=True)
    assert shoelace_area(sq) == 4.0
    assert shoelace_area(reverse_curve(sq)) == -4.0


def test_residue():
    val = action_along(config([0j], c=0.0), UNIT, 0.0, 5.0)
    assert val == pytest.approx(2j * math.pi, abs=1e-14)


def test_action_preconditions():
    cfg = config([0j], R=2.0)
    with pytest.raises(ValidationError, match="exceeds the window"):
        action_along(cfg, UNIT, 1.0, 3.0)
    with pytest.raises(ValidationError, match="half truncation"):
        action_along(cfg, UNIT, 1.0, 1.5)


def test_point_on_curve_is_nudged():
    seg = make_polyline([0, 1])
    val = action_along(config([0.5 + 0j]), seg, 0.0, 4.0)
    assert np.isfinite(val)
    assert abs(val.imag) == pytest.approx(math.pi, abs=1e-6)


@given(st.integers(0, 2**32), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.3, 3.0))
def test_argument_principle_per_sample(seed, x, y, r):
    cfg = sample_ginibre(12.0, seed)
    c = circle_curve(complex(x, y), r, 48)
    act = action_along(cfg, c, 1.0, 12.0)
    n, area = count_in_region(cfg, c), shoelace_area(c)
    scale = 2 * math.pi * (abs(n) + area)
    assert abs(act - 2j * math.pi * (n - area)) <= 1e-10 * scale
    assert abs(act.real) <= 1e-10 * scale


def test_flux_and_work_are_parts_of_action():
    seg = make_polyline([1, 2])
    a = estimate_statistic(SamplerSpec(), "action", seg, 2.0, 20, 5)
    w = estimate_statistic(SamplerSpec(), "work", seg, 2.0, 20, 5)
    f = estimate_statistic(SamplerSpec(), "flux", seg, 2.0, 20, 5)
    assert np.array_equal(a.samples.real, w.samples)
    assert np.array_equal(a.samples.imag, f.samples)
    assert a.variance == pytest.approx(w.variance + f.variance, rel=1e-12)


def test_truncation_doubling_within_tail_bound():
    seg = make_polyline([2, 4 + 1j])
    T = 16.0
    hits = 0
    for seed in range(100):
        cfg = sample_ginibre(2 * T, seed)
        d = abs(action_along(cfg, seg, 1.0, 2 * T) - action_along(cfg, seg, 1.0, T))
        bound = 3.0 * seg.length / T * math.sqrt(math.pi * (2 * T) ** 2)
        hits += d <= bound
    assert hits >= 95


def test_thread_invariance():
    a = estimate_statistic(SamplerSpec(), "count", UNIT, 3.0, 60, 11, threads=1)
    b = estimate_statistic(SamplerSpec(), "count", UNIT, 3.0, 60, 11, threads=3)
    assert np.array_equal(a.samples, b.samples)
    assert a == b


def test_multi_count_radii_match_curves():
    radii = [1.0, 0.5, 0.25]
    curves = [circle_curve(0j, r, 512) for r in radii]
    by_radius = estimate_statistic(SamplerSpec(), "multi_count", radii, 4.0, 30, 3)
    by_curve = estimate_statistic(SamplerSpec(), "multi_count", curves, 4.0, 30, 3)
    # the inscribed polygons miss a sliver of each disk, so allow rare differences
    assert np.mean(by_radius.samples == by_curve.samples) > 0.8
    assert by_radius.mean == pytest.approx(by_curve.mean, rel=0.05)


def test_poisson_count_mean():
    est = estimate_statistic(SamplerSpec("poisson", 2.0), "count", UNIT, 3.0, 400, 1)
    area = shoelace_area(UNIT) * 9
    assert est.mean == pytest.approx(2.0 * area, rel=0.05)


def test_estimate_validation():
    with pytest.raises(ValidationError):
        estimate_statistic(SamplerSpec(), "count", UNIT, 1.0, 1, 0)
    with pytest.raises(ValidationError, match="unknown statistic"):
        estimate_statistic(SamplerSpec(), "energy", UNIT, 1.0, 10, 0)
    with pytest.raises(ValidationError):
        SamplerSpec("gef")
    with pytest.raises(ValidationError):
        SamplerSpec("ginibre", 2.0)


def test_batch_means():
    rng = np.random.default_rng(0)
    x = rng.normal(size=10000)
    se = batch_means_stderr(x)
    # the variance of a normal sample variance is 2 sigma^4 / n
    assert se == pytest.approx(math.sqrt(2 / 10000), rel=0.3)


def test_winding_numbers_vectorized():
    sq = make_polyline([-1 - 1j, 1 - 1j, 1 + 1j, -1 + 1j], closed=True)
    w = winding_numbers([0, 2, 0.5j, -3j], sq)
    assert list(w) == [1, 0, 1, 0]
