import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catk.errors import DegenerateTriangleError, InvalidGluingError, InvalidSidesError
from catk.model import (
    ModelPoint,
    chart_angle,
    chart_dist,
    chart_lerp,
    check_kappa,
    comparison_angle,
    dist,
    geodesic_point,
    gluing_isometry,
    place_third,
    point_at_angle,
    vertex_angle,
)

coord = st.floats(-0.6, 0.6, allow_nan=False)
kappas = st.sampled_from([0.0, -1.0, -0.25, -4.0])


def test_kappa_must_be_nonpositive():
    assert check_kappa(0) == 0.0
    with pytest.raises(ValueError):
        check_kappa(1.0)
    with pytest.raises(ValueError):
        check_kappa(float("nan"))


def test_euclidean_distance():
    assert chart_dist(0.0, (0, 0), (3, 4)) == 5.0


def test_hyperbolic_distance_from_origin():
    # Klein radius r corresponds to hyperbolic distance atanh(r) for kappa = -1
    r = 0.5
    assert chart_dist(-1.0, (0.0, 0.0), (r, 0.0)) == pytest.approx(math.atanh(r), abs=1e-12)
    # curvature -4 halves distances
    assert chart_dist(-4.0, (0.0, 0.0), (r, 0.0)) == pytest.approx(0.5 * math.atanh(r), abs=1e-12)


def test_comparison_angle_right_triangle():
    assert comparison_angle(0.0, 3.0, 4.0, 5.0) == pytest.approx(math.pi / 2, abs=1e-14)


def test_comparison_angle_hyperbolic_is_smaller():
    assert comparison_angle(-1.0, 1.0, 1.0, 1.0) < math.pi / 3


def test_comparison_angle_errors():
    with pytest.raises(DegenerateTriangleError):
        comparison_angle(0.0, 0.0, 1.0, 1.0)
    with pytest.raises(InvalidSidesError):
        comparison_angle(0.0, 1.0, 1.0, 3.0)


def test_degenerate_angles():
    assert comparison_angle(0.0, 1.0, 2.0, 3.0) == pytest.approx(math.pi, abs=1e-7)
    assert comparison_angle(0.0, 1.0, 2.0, 1.0) == pytest.approx(0.0, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(kappas, coord, coord, coord, coord, coord, coord)
def test_triangle_inequality(k, ax, ay, bx, by, cx, cy):
    a, b, c = (ax, ay), (bx, by), (cx, cy)
    assert chart_dist(k, a, c) <= chart_dist(k, a, b) + chart_dist(k, b, c) + 1e-12


@settings(max_examples=60, deadline=None)
@given(kappas, coord, coord, coord, coord, st.floats(0.0, 1.0))
def test_lerp_splits_distance(k, ax, ay, bx, by, t):
    a, b = (ax, ay), (bx, by)
    m = chart_lerp(k, a, b, t)
    d = chart_dist(k, a, b)
    assert chart_dist(k, a, m) == pytest.approx(t * d, abs=1e-9)
    assert chart_dist(k, m, b) == pytest.approx((1 - t) * d, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(kappas, st.floats(0.1, 2.5), st.floats(0.05, 0.5), st.sampled_from([1, -1]))
def test_point_at_angle_roundtrip(k, theta, d, side):
    a, b = (0.1, -0.05), (0.4, 0.2)
    c = point_at_angle(k, a, b, theta, d, side)
    assert chart_dist(k, a, c) == pytest.approx(d, abs=1e-9)
    assert chart_angle(k, a, b, c) == pytest.approx(theta, abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(kappas, st.floats(0.2, 1.0), st.floats(0.2, 1.0), st.floats(0.05, 0.95))
def test_place_third_realises_sides(k, dac, dbc, frac):
    a, b = (-0.2, 0.0), (0.2, 0.1)
    dab = chart_dist(k, a, b)
    lo, hi = abs(dac - dab), dac + dab
    dbc = lo + frac * (hi - lo)
    c = place_third(k, a, b, dac, dbc, 1)
    assert chart_dist(k, a, c) == pytest.approx(dac, abs=1e-8)
    assert chart_dist(k, b, c) == pytest.approx(dbc, abs=1e-7)


def test_model_points_and_vertex_angle():
    p = ModelPoint.from_chart(-1.0, (0.0, 0.0))
    q = ModelPoint.from_chart(-1.0, (0.5, 0.0))
    r = ModelPoint.from_chart(-1.0, (0.0, 0.5))
    assert vertex_angle(p, q, r) == pytest.approx(math.pi / 2, abs=1e-12)
    m = geodesic_point(p, q, 0.5)
    assert dist(p, m) == pytest.approx(0.5 * dist(p, q), abs=1e-12)


@pytest.mark.parametrize("k", [0.0, -1.0])
@pytest.mark.parametrize("orient", [True, False])
def test_gluing_isometry_maps_endpoints(k, orient):
    sa, sb = ModelPoint.from_chart(k, (0.0, 0.0)), ModelPoint.from_chart(k, (0.3, 0.0))
    # a segment of the same length leaving the origin vertically
    da, db = ModelPoint.from_chart(k, (0.0, 0.0)), ModelPoint.from_chart(k, (0.0, 0.3))
    g = gluing_isometry(sa, sb, da, db, preserve_orientation=orient)
    assert dist(g(sa), da) < 1e-9
    assert dist(g(sb), db) < 1e-9
    assert g.preserves_orientation == orient


def test_gluing_isometry_length_mismatch():
    with pytest.raises(InvalidGluingError):
        gluing_isometry(ModelPoint.from_chart(0.0, (0, 0)), ModelPoint.from_chart(0.0, (1, 0)),
                        ModelPoint.from_chart(0.0, (0, 0)), ModelPoint.from_chart(0.0, (2, 0)))
