import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catk.complex import build_complex, polygon_document
from catk.errors import InvalidSeedError, NotRectifiablyConnectedError, OutsideRegionError
from catk.geodesic import extend_geodesic, geodesic_X, geodesic_Y, shortest_path, straighten
from catk.homology import CycleCurve, curve_interior
from catk.model import chart_dist
from catk.path import PiecewisePath
from catk.region import Region, carve
from catk.steiner import steiner_graph
from catk.subdivide import subdivide
from conftest import square_complex

flat = st.floats(0.05, 2.95)


@settings(max_examples=12, deadline=None)
@given(flat, flat, flat, flat)
def test_single_face_euclidean(square, x0, y0, x1, y1):
    S, E, tol = square
    p, q = S.locate_in_parent_face(0, (x0, y0)), S.locate_in_parent_face(0, (x1, y1))
    r = geodesic_Y(S, E, p, q)
    assert r.length == pytest.approx(math.hypot(x1 - x0, y1 - y0), abs=1e-6)
    assert r.path.is_valid()


@pytest.fixture(scope="module")
def hyperbolic():
    X = build_complex(polygon_document(-1.0, [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]))
    return X, subdivide(X, 0.2)


@pytest.mark.parametrize("p,q", [((-0.3, -0.2), (0.35, 0.3)), ((0.4, -0.4), (-0.4, 0.4)),
                                 ((0.0, 0.0), (0.45, 0.1))])
def test_single_face_hyperbolic(hyperbolic, p, q):
    X, S = hyperbolic
    a, b = S.locate_in_parent_face(0, p), S.locate_in_parent_face(0, q)
    r = geodesic_X(S, a, b)
    assert r.length == pytest.approx(chart_dist(-1.0, p, q), abs=1e-6)


def test_history_is_monotone_and_graph_is_upper_bound(square):
    S, E, _ = square
    p, q = S.locate_in_parent_face(0, (0.1, 0.2)), S.locate_in_parent_face(0, (2.9, 1.3))
    r = geodesic_Y(S, E, p, q, min_rounds=4, max_rounds=4)
    assert all(b <= a for a, b in zip(r.history[:-1], r.history[1:]))
    raw = shortest_path(steiner_graph(S, E), p, q)
    assert raw.length >= r.length - 1e-12


def test_straighten_never_lengthens(square):
    S, E, _ = square
    p, q = S.locate_in_parent_face(0, (0.4, 0.4)), S.locate_in_parent_face(0, (2.6, 2.2))
    raw = shortest_path(steiner_graph(S, E), p, q)
    out = straighten(S, raw, E)
    assert out.length <= raw.length + 1e-12
    assert out.length == pytest.approx(math.hypot(2.2, 1.8), abs=1e-9)


def test_tripod_cross_spine_distance(tripod):
    r = geodesic_X(tripod.S, tripod.point(0, 1.0, 0.0), tripod.point(1, 1.0, 0.0), min_rounds=4,
                   max_rounds=4)
    assert r.length == pytest.approx(2.0, abs=1e-3)
    assert all(b <= a + 1e-15 for a, b in zip(r.history[:-1], r.history[1:]))


def test_tripod_unfolded_two_segment_length(tripod):
    # (1, 0) in one half-plane to (2, 3) in another: straight line in the unfolded plane
    r = geodesic_X(tripod.S, tripod.point(0, 1.0, 0.0), tripod.point(2, 2.0, 3.0))
    assert r.length == pytest.approx(math.hypot(3.0, 3.0), abs=1e-6)


def test_annulus_detour():
    X = square_complex()
    hole = [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]
    S = subdivide(X, 0.25, [[X.locate(("face", 0, p)) for p in hole + [hole[0]]]])
    E = carve(S, [(0, hole)])
    p, q = S.locate_in_parent_face(0, (0.5, 1.5)), S.locate_in_parent_face(0, (2.5, 1.5))
    r = geodesic_Y(S, E, p, q)
    assert r.length == pytest.approx(2 * math.hypot(0.5, 0.5) + 1.0, abs=1e-6)
    assert geodesic_X(S, p, q).length == pytest.approx(2.0, abs=1e-9)


def test_region_errors(square):
    S, _, _ = square
    E = Region.closure(S, [0])
    far = S.locate_in_parent_face(0, (2.9, 2.9))
    with pytest.raises(OutsideRegionError):
        geodesic_Y(S, E, far, far)
    a, b = sorted(S.faces)[0], None
    for t in sorted(S.faces):
        if not set(S.faces[t].corners) & set(S.faces[a].corners):
            b = t
            break
    E2 = Region.closure(S, [a, b])
    p = S.locate_in_parent_face(0, tuple(np.mean(S.faces[a].chart, axis=0)))
    q = S.locate_in_parent_face(0, tuple(np.mean(S.faces[b].chart, axis=0)))
    with pytest.raises(NotRectifiablyConnectedError):
        geodesic_Y(S, E2, p, q)


def _seed(S, cls, rng):
    faces = sorted(cls.faces_in)
    f = faces[int(rng.integers(len(faces)))]
    ch = S.faces[f].chart
    c = tuple(sum(x[i] for x in ch) / 3 for i in range(2))
    ang = rng.uniform(0, 2 * math.pi)
    d = 0.1 * min(S.edges[e].length for e in S.faces[f].sides)
    P = S.canonical_face_point(f, c, tol=1e-12)
    Q = S.canonical_face_point(f, (c[0] + d * math.cos(ang), c[1] + d * math.sin(ang)), tol=1e-12)
    return PiecewisePath.build(S, [P, Q], [("face", f)])


def test_extension_reaches_curve(tripod):
    rng = np.random.default_rng(4)
    for _ in range(10):
        r = extend_geodesic(tripod.S, tripod.gamma, _seed(tripod.S, tripod.cls, rng),
                            classification=tripod.cls)
        assert r.reached
        assert tripod.gamma.contains_point(r.terminal)
        for P in r.path.points[:-1]:
            assert tripod.cls.in_or_on(P)


def test_extension_flat_square_exit_point():
    X = square_complex()
    seam = [X.locate(("vertex", i)) for i in (0, 1, 2, 3, 0)]
    S = subdivide(X, 0.5, [seam])
    g = CycleCurve.from_vertices(S, S.seams[0])
    cls = curve_interior(S, g)
    P, Q = S.locate_in_parent_face(0, (1.0, 1.0)), S.locate_in_parent_face(0, (1.1, 1.05))
    r = extend_geodesic(S, g, geodesic_X(S, P, Q).path, classification=cls)
    assert r.reached
    end = S.to_parent(r.terminal)
    xy = X.point_chart(end, 0)
    # the ray (1,1) + s(2,1) meets x = 3 at y = 2
    assert xy[0] == pytest.approx(3.0, abs=1e-9) and xy[1] == pytest.approx(2.0, abs=1e-9)


def test_extension_rejects_outside_seed(tripod):
    S, cls = tripod.S, tripod.cls
    out = sorted(set(S.faces) - set(cls.faces_in))[0]
    ch = S.faces[out].chart
    c = tuple(sum(x[i] for x in ch) / 3 for i in range(2))
    P = S.canonical_face_point(out, c, tol=1e-12)
    Q = S.canonical_face_point(out, (c[0] + 1e-3, c[1]), tol=1e-12)
    with pytest.raises(InvalidSeedError):
        extend_geodesic(S, tripod.gamma, PiecewisePath.build(S, [P, Q], [("face", out)]),
                        classification=cls)
