import math

import pytest

from catk.complex import build_complex, polygon_document
from catk.errors import InvalidTriangleError
from catk.model import comparison_angle
from catk.region import Region
from catk.scenario import _build_region, _seams, notch_scenario, validate_document
from catk.subdivide import subdivide
from catk.verify import (
    Tolerances,
    alexandrov_angle_Y,
    cat_sweep,
    cat_triangle_test,
    convexity_check,
    limit_segments,
    triangle_sample,
)


def test_default_tolerances(square):
    S, _, tol = square
    assert tol.target_gap == pytest.approx(1e-4 * 3 * math.sqrt(2))
    assert tol.tol_geo == pytest.approx(10 * tol.target_gap)
    assert tol.tol_cat == pytest.approx(5 * tol.target_gap)
    assert tol.tol_angle(S.h, 1e6) == 0.02
    assert tol.tol_angle(0.25, 0.01) == pytest.approx(0.25)


def _pts(S, *xys):
    return [S.locate_in_parent_face(0, xy) for xy in xys]


def test_flat_triangle_margins_vanish(square):
    S, E, tol = square
    T = triangle_sample(S, E, *_pts(S, (0.5, 0.4), (2.6, 0.9), (1.1, 2.7)), tol)
    rep = cat_triangle_test(S, E, T, tol)
    assert not rep.violations
    for c in rep.checks:
        if c["kind"] == "distance":
            assert abs(c["margin"]) < 1e-9
        else:
            assert abs(c["margin"]) < tol.tol_angle(S.h, 1.0)


def test_angle_ladder_is_stable_in_the_plane(square):
    S, E, tol = square
    T = triangle_sample(S, E, *_pts(S, (0.5, 0.4), (2.6, 0.9), (1.1, 2.7)), tol)
    est = alexandrov_angle_Y(S, E, T.pq.path, T.pr.path, tol)
    assert est.estimate == pytest.approx(comparison_angle(0.0, T.a, T.b, T.c), abs=1e-9)
    assert est.residual < 1e-9
    assert all(b <= a + 2 * 0.02 for a, b in zip(est.angles[:-1], est.angles[1:]))


def test_square_sweep_has_no_violations(square):
    S, E, tol = square
    rep = cat_sweep(S, E, 8, 5, tol)
    assert not rep.violations
    assert rep.min_margin >= -tol.tol_cat


def test_sweep_is_deterministic(square):
    S, E, tol = square
    a = cat_sweep(S, E, 3, 9, tol).to_json()
    b = cat_sweep(S, E, 3, 9, tol).to_json()
    assert a == b


def test_budget_marks_incomplete(square):
    S, E, tol = square
    rep = cat_sweep(S, E, 50, 1, tol, budget=0.0)
    assert rep.incomplete
    assert len(rep.triangles) < 50


def test_hyperbolic_face_passes():
    X = build_complex(polygon_document(-1.0, [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]))
    S = subdivide(X, 0.2)
    E = Region.all(S)
    tol = Tolerances.defaults(S)
    rep = cat_sweep(S, E, 4, 2, tol)
    assert not rep.violations
    # comparison in the model plane of the same curvature is exact up to meshing
    assert min(c["margin"] for c in rep.checks if c["kind"] == "distance") > -1e-9


def test_annulus_negative_control(annulus):
    S, E, tol = annulus
    assert cat_sweep(S, E, 20, 3, tol).violations
    assert convexity_check(S, E, 20, 3, tol).violations


def test_square_convexity(square):
    S, E, tol = square
    rep = convexity_check(S, E, 6, 2, tol)
    assert not rep.violations


def test_tripod_convexity(tripod):
    rep = convexity_check(tripod.S, tripod.full, 4, 1, tripod.tol)
    assert not rep.violations


def test_limit_segments_square(square):
    S, E, tol = square
    rep = limit_segments(S, E, *_pts(S, (0.7, 0.8), (2.4, 1.1), (1.2, 2.5)), tol)
    assert rep.passed
    assert abs(rep.angle_x - rep.angle_y.estimate) < 1e-6


def test_limit_segments_notch():
    sc = validate_document(notch_scenario())
    seams, _ = _seams(sc)
    S = subdivide(sc.complex, sc.h, seams)
    E = _build_region(sc, S, None)
    tol = Tolerances.defaults(S)
    raw = sc.plan["limit_triangles"][0]["points"]
    p, q, r = (S.from_parent(sc.complex.locate(("face", 0, d["xy"]))) for d in raw)
    rep = limit_segments(S, E, p, q, r, tol)
    assert rep.passed
    assert abs(rep.angle_x - rep.angle_y.estimate) <= rep.tol_angle


def test_limit_segments_tripod(tripod):
    p, q, r = tripod.point(0, 1.0, 0.5), tripod.point(1, 1.5, 1.0), tripod.point(1, 0.5, -1.2)
    rep = limit_segments(tripod.S, tripod.full, p, q, r, tripod.tol)
    assert rep.passed
    assert all(c["cauchy"] for c in rep.cauchy.values())


def test_degenerate_triangle_rejected(square):
    S, E, tol = square
    p = _pts(S, (1.0, 1.0))[0]
    with pytest.raises(InvalidTriangleError):
        limit_segments(S, E, p, p, _pts(S, (2.0, 2.0))[0], tol)
