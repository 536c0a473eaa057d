import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxlab.errors import ValidationError
from fluxlab.sampler import (
    PointConfig,
    derive_seed,
    ginibre_disk_moments_exact,
    ginibre_index_cap,
    sample_ginibre,
    sample_poisson,
    splitmix64,
)


def test_splitmix64_reference_value():
    # first output of the reference generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert derive_seed(0, 0) == 0xE220A8397B1DCDAF


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_derive_seed_is_involution_in_base(base, i):
    s = derive_seed(base, i)
    assert 0 <= s < 2**64
    assert derive_seed(s, i) == base


def test_same_seed_same_points():
    a = sample_ginibre(5.0, 42)
    b = sample_ginibre(5.0, 42)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, sample_ginibre(5.0, 43).points)


def test_points_inside_window_and_header():
    cfg = sample_ginibre(3.0, 7)
    assert np.all(np.abs(cfg.points) <= 3.0)
    assert cfg.header == {"model": "ginibre", "R": 3.0, "seed": 7, "intensity": 1.0, "count": len(cfg)}
    p = sample_poisson(2.0, 3.0, 7)
    assert np.all(np.abs(p.points) <= 3.0)
    assert p.physical_intensity == 2.0


def test_validation():
    with pytest.raises(ValidationError):
        sample_ginibre(0.0, 1)
    with pytest.raises(ValidationError):
        sample_ginibre(1.0, -1)
    with pytest.raises(ValidationError):
        sample_poisson(0.0, 1.0, 1)
    with pytest.raises(ValidationError):
        PointConfig(np.array([5 + 0j]), 1.0, "x", 0, 1.0)


def test_index_cap():
    assert ginibre_index_cap(1.0) == math.ceil(4 * math.pi) + 64


def _mp_disk_variance(R):
    x = mp.pi * R * R
    total = mp.mpf(0)
    for j in range(1, 400):
        p = mp.gammainc(j, 0, x, regularized=True)
        total += p * (1 - p)
    return float(total)


def test_kostlan_oracle_values():
    mean, var = ginibre_disk_moments_exact(1.0)
    assert mean == pytest.approx(math.pi, rel=1e-12)
    assert var == pytest.approx(0.9794384169606605, rel=1e-12)
    assert var == pytest.approx(_mp_disk_variance(1.0), rel=1e-12)
    assert ginibre_disk_moments_exact(5.0)[1] == pytest.approx(_mp_disk_variance(5.0), rel=1e-11)


@pytest.mark.parametrize("R", [1, 5, 20])
def test_kostlan_mean_identity(R):
    mean, _ = ginibre_disk_moments_exact(R)
    assert abs(mean / (math.pi * R * R) - 1) < 1e-8


def test_perimeter_law_oracle():
    assert ginibre_disk_moments_exact(100)[1] / 100 == pytest.approx(0.999998, abs=1e-5)
    assert ginibre_disk_moments_exact(400)[1] / 400 == pytest.approx(1.0, abs=1e-5)


def test_sampled_count_mean():
    counts = [len(sample_ginibre(4.0, s)) for s in range(400)]
    # variance of the count is about 4, so the mean of 400 has stderr 0.1
    assert np.mean(counts) == pytest.approx(16 * math.pi, abs=0.5)


@given(st.floats(0.1, 30))
def test_disk_variance_positive_below_mean(R):
    mean, var = ginibre_disk_moments_exact(R)
    assert 0 < var < mean
