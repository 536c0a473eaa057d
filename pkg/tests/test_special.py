import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxlab.special import (
    EULER_GAMMA,
    dilog_exp,
    ein,
    expint_e1,
    gammainc_lower,
    gammainc_reference,
    gammainc_upper,
    j0_minus_one,
)


@pytest.mark.parametrize("a,x", [(1, 0.5), (5, 3.0), (50, 60.0), (1000, 990.0), (1e5, 1e5 + 300), (3.5, 0.01)])
def test_gammainc_matches_mpmath(a, x):
    ref = float(mp.gammainc(a, 0, x, regularized=True))
    assert gammainc_lower(a, x) == pytest.approx(ref, rel=1e-12, abs=1e-300)
    assert gammainc_reference(a, x) == pytest.approx(ref, rel=1e-10, abs=1e-14)
    assert gammainc_upper(a, x) == pytest.approx(1 - ref, rel=1e-10, abs=1e-14)


@given(st.floats(0.5, 2000), st.floats(0.01, 3000))
def test_reference_agrees_with_scipy(a, x):
    assert gammainc_reference(a, x) == pytest.approx(gammainc_lower(a, x), abs=1e-11)


def test_reference_edge_cases():
    assert gammainc_reference(3.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        gammainc_reference(0.0, 1.0)


@pytest.mark.parametrize("x", [1e-8, 1e-3, 0.2, 0.49, 0.5, 1.0, 7.0, 40.0])
def test_ein_and_e1(x):
    e1 = float(mp.e1(x))
    assert expint_e1(x) == pytest.approx(e1, rel=1e-13)
    ein_ref = float(mp.e1(x) + mp.log(x) + mp.euler)
    assert ein(x) == pytest.approx(ein_ref, rel=1e-12)


def test_euler_gamma():
    assert EULER_GAMMA == pytest.approx(float(mp.euler), rel=1e-16)


@pytest.mark.parametrize("x", [1e-6, 0.1, 0.49, 0.5, 3.0, 30.0])
def test_j0_minus_one(x):
    assert j0_minus_one(x) == pytest.approx(float(mp.besselj(0, x) - 1), rel=1e-12)


@pytest.mark.parametrize("t", [1e-4, 0.3, 2.0, 10.0])
def test_dilog(t):
    assert dilog_exp(t) == pytest.approx(float(mp.polylog(2, mp.exp(-2 * t))), rel=1e-12)
    assert dilog_exp(0.0) == pytest.approx(math.pi**2 / 6)


def test_vectorized_shapes():
    x = np.array([0.1, 1.0, 5.0])
    assert ein(x).shape == (3,)
    assert isinstance(ein(0.3), float)
