import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fluxlab.curves import circle_curve, circle_segments, make_polyline, reverse_curve
from fluxlab.errors import NumericalError, ValidationError
from fluxlab.models import d_lambda, kernel_K, make_model
from fluxlab.variance_predict import (
    QuadratureSpec,
    SignAnomalyWarning,
    predict_action_cov,
    predict_count_variance,
    predict_work_variance,
    pv_action_cov_quadrature,
    work_variance_2d,
    work_variance_radial,
)

PI = math.pi
GINIBRE = make_model("ginibre")
GEF = make_model("gef")


def circle_oracle(R):
    """Double integral over the round circle of radius R reduced to one angle."""
    psi_c = 2 * math.asin(min(1.0, 3.5 / (2 * R)))

    def f(psi):
        return kernel_K(GINIBRE, 2 * R * math.sin(psi / 2)) * math.cos(psi)

    val, _ = integrate.quad(f, 0, psi_c, limit=400, epsabs=1e-13, epsrel=1e-12)
    return 2 * PI * R * R * 2 * val


def unit_circle(R):
    return circle_curve(0j, 1.0, circle_segments(1.0, R))


def test_predict_count_variance_perimeter_law():
    assert predict_count_variance(GINIBRE, unit_circle(100), 100) == pytest.approx(100, rel=1e-4)
    assert predict_count_variance(make_model("poisson"), unit_circle(10), 10) == 0.0
    with pytest.raises(ValidationError):
        predict_count_variance(GINIBRE, make_polyline([0, 1]), 10)


def test_predict_action_cov_uses_signed_length():
    c = unit_circle(10)
    v = predict_action_cov(GINIBRE, c, c, 10)
    assert v == pytest.approx(10 * (2 / PI) * c.length, rel=1e-10)
    assert predict_action_cov(GINIBRE, c, reverse_curve(c), 10) == pytest.approx(-v, rel=1e-10)


def test_predict_work_variance():
    with pytest.warns(SignAnomalyWarning):
        assert predict_work_variance(GINIBRE, 1.0) == 0.0
    with pytest.warns(SignAnomalyWarning):
        v = predict_work_variance(GINIBRE, math.e**2)
    assert v == pytest.approx(-2 / PI**2, rel=1e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert predict_work_variance(GEF, math.e) == pytest.approx(PI**6 / 20, rel=1e-8)
    with pytest.raises(ValidationError):
        predict_work_variance(GINIBRE, 0.5)


def test_quadrature_spec_validation():
    with pytest.raises(ValidationError):
        QuadratureSpec(epsilon_schedule=[0.1, 0.2, 0.05, 0.01])
    with pytest.raises(ValidationError):
        QuadratureSpec(epsilon_schedule=[0.1, 0.05])
    with pytest.raises(ValidationError):
        QuadratureSpec(abs_tol=0)
    spec = QuadratureSpec()
    assert spec.epsilons(2.0)[0] == pytest.approx(2.0 / 64)


def test_pv_poisson_is_zero():
    c = unit_circle(5)
    assert pv_action_cov_quadrature(make_model("poisson"), c, c, 5).value == 0.0


def test_pv_circle_matches_one_dimensional_oracle():
    R = 25
    c = unit_circle(R)
    res = pv_action_cov_quadrature(GINIBRE, c, c, R)
    assert res.value == pytest.approx(circle_oracle(R), abs=0.05)
    assert res.value / R == pytest.approx(4.0, rel=0.05)
    assert abs(res.complex_value.imag) < 1e-6 * res.value
    assert float(res) == res.value


def test_pv_disjoint_far_curves_vanish():
    a = circle_curve(0j, 1.0, 64)
    b = circle_curve(10 + 0j, 1.0, 64)
    assert pv_action_cov_quadrature(GINIBRE, a, b, 1.0).value == 0.0


def test_pv_raises_when_tolerance_unreachable():
    c = unit_circle(5)
    spec = QuadratureSpec(epsilon_schedule=[0.2, 0.15, 0.1, 0.08], abs_tol=1e-12)
    with pytest.raises(NumericalError):
        pv_action_cov_quadrature(GINIBRE, c, c, 5, spec)


@pytest.mark.parametrize("model", [GINIBRE, GEF], ids=["ginibre", "gef"])
@pytest.mark.parametrize("a", [2, 5, 20, 100])
def test_work_variance_routes_agree(model, a):
    r = work_variance_radial(model, a)
    assert work_variance_2d(model, a) == pytest.approx(r, rel=1e-8)
    assert work_variance_2d(model, a, angular="numeric") == pytest.approx(r, rel=1e-2)


def test_ginibre_work_variance_affine_in_log_a():
    vals = [work_variance_radial(GINIBRE, a) for a in (10, 100, 1000)]
    assert vals[0] == pytest.approx(-0.3712, abs=1e-4)
    slope1 = (vals[1] - vals[0]) / math.log(10)
    slope2 = (vals[2] - vals[1]) / math.log(10)
    assert slope1 == pytest.approx(slope2, rel=1e-10)
    assert slope1 == pytest.approx(d_lambda(GINIBRE), rel=1e-8)


def test_gef_work_variance_log_asymptotics():
    ratios = [work_variance_radial(GEF, a) / (d_lambda(GEF) * math.log(a)) for a in (1e3, 1e6)]
    assert 0.9 < ratios[0] < ratios[1] < 1.0


@given(st.floats(0.5, 40), st.floats(0, 2 * PI))
def test_numeric_mode_symmetric(r, theta):
    a = r * complex(math.cos(theta), math.sin(theta))
    plus = work_variance_2d(GINIBRE, a, angular="numeric")
    assert plus == pytest.approx(work_variance_2d(GINIBRE, -a, angular="numeric"), rel=1e-13)


def test_work_variance_validation():
    with pytest.raises(ValidationError):
        work_variance_radial(GINIBRE, 0)
    with pytest.raises(ValidationError):
        work_variance_2d(GINIBRE, 1, angular="bogus")
