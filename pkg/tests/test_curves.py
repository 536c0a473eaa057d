import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxlab.curves import (
    circle_curve,
    circle_segments,
    make_polyline,
    map_curve,
    nested_circles_curve,
    nested_radii,
    reverse_curve,
    spiral_curve,
)
from fluxlab.errors import ValidationError

coords = st.floats(-10, 10, allow_nan=False)
points = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=2, max_size=12)


def test_segment_length():
    c = make_polyline([(0, 0), (1, 0)], closed=False)
    assert c.length == 1.0
    assert c.start == 0 and c.end == 1


def test_unit_square_length():
    c = make_polyline([(0, 0), (1, 0), (1, 1), (0, 1)], closed=True)
    assert c.length == 4.0
    assert c.n_edges == 4
    assert c.start == c.end


def test_degenerate_names_index():
    with pytest.raises(ValidationError, match="vertex 1"):
        make_polyline([(0, 0), (0, 0)])
    with pytest.raises(ValidationError, match="at least 2"):
        make_polyline([0j])
    with pytest.raises(ValidationError, match="vertex 3"):
        make_polyline([0, 1, 2, 2, 3])


def test_closed_curve_rejects_repeated_start():
    with pytest.raises(ValidationError, match="repeats vertex 0"):
        make_polyline([0, 1, 1j, 0], closed=True)


def test_vertices_are_read_only():
    c = make_polyline([0, 1, 1j])
    with pytest.raises(ValueError):
        c.vertices[0] = 5


def test_circle_perimeter_close_to_two_pi():
    # relative perimeter defect of an n-gon is about (pi/n)^2/6
    for R in (10, 25, 50, 100, 400):
        c = circle_curve(0j, 1.0, circle_segments(1.0, R))
        assert abs(c.length / (2 * math.pi) - 1) < 1e-4
    assert circle_segments(1.0, 1.0) == 64
    assert circle_segments(1.0, 25.0) == 1600


def test_map_curve_scales_and_reverses():
    c = make_polyline([0, 1, 1 + 1j])
    m = map_curve(c, scale=3.0, rotation=math.pi / 2, translation=1j)
    assert np.allclose(m.vertices, 3j * c.vertices + 1j)
    assert reverse_curve(c).start == c.end
    with pytest.raises(ValidationError):
        map_curve(c, scale=0)


def test_nested_radii():
    r = nested_radii(0.5, 3)
    assert np.allclose(r, [1, 2**-1.5, 3**-1.5, 4**-1.5])
    with pytest.raises(ValidationError):
        nested_radii(1.5, 3)


def test_spiral_endpoints_and_monotone_radius():
    s = spiral_curve(0.1, 10)
    ell = nested_radii(0.1, 10)
    assert s.start == pytest.approx(1j * ell[0])
    assert s.end == pytest.approx(1j * ell[-1])
    assert not s.closed
    assert np.all(np.diff(np.abs(s.vertices)) <= 1e-15)


def test_nested_circles_structure():
    c = nested_circles_curve(0.5, 3, segments=16)
    ell = nested_radii(0.5, 3)
    assert c.start == 0
    assert c.end == pytest.approx(1j * ell[-1])
    loops = 2 * math.pi * np.sum(ell[:-1] * 16 * math.sin(math.pi / 16) / math.pi)
    assert c.length == pytest.approx(loops + ell[0] + np.sum(ell[:-2] - ell[1:-1]) + ell[-2] - ell[-1])


@given(points)
def test_length_is_sum_of_edges(pts):
    if any(a == b for a, b in zip(pts, pts[1:])):
        return
    c = make_polyline(pts)
    assert c.length == pytest.approx(sum(abs(b - a) for a, b in zip(pts, pts[1:])))
    assert c.length > 0


@given(points, st.floats(0.1, 10))
def test_dilation_scales_length_and_diameter(pts, s):
    if any(a == b for a, b in zip(pts, pts[1:])):
        return
    c = make_polyline(pts)
    m = map_curve(c, scale=s)
    assert m.length == pytest.approx(s * c.length, rel=1e-12)
    assert m.diameter == pytest.approx(s * c.diameter, rel=1e-12, abs=1e-12)
