import copy
import math

import pytest

from catk.complex import (
    ComplexPoint,
    build_complex,
    check_link_condition,
    complex_document,
    link_girth,
    link_graph,
    polygon_document,
)
from catk.errors import InvalidComplexError, InvalidFaceError, InvalidGluingError, LocationError
from catk.scenario import cone_complex, tripod_complex
from catk.subdivide import subdivide
from conftest import square_complex


def test_square_builds_and_roundtrips():
    X = square_complex()
    assert len(X.faces) == 1 and len(X.edges) == 4
    Y = build_complex(complex_document(X))
    assert complex_document(Y) == complex_document(X)


def test_side_length_mismatch_is_rejected():
    doc = polygon_document(0.0, [(0, 0), (1, 0), (1, 1), (0, 1)])
    doc["edges"][0]["length"] = 1.5
    with pytest.raises(InvalidGluingError):
        build_complex(doc)


def test_nonconvex_face_is_rejected():
    doc = polygon_document(0.0, [(0, 0), (2, 0), (1, 0.2), (2, 2), (0, 2)])
    with pytest.raises(InvalidFaceError):
        build_complex(doc)


def test_positive_curvature_is_rejected():
    doc = polygon_document(0.0, [(0, 0), (1, 0), (0, 1)])
    doc["kappa"] = 1.0
    with pytest.raises(InvalidComplexError):
        build_complex(doc)


def test_disconnected_complex_is_rejected():
    a = polygon_document(0.0, [(0, 0), (1, 0), (0, 1)])
    b = copy.deepcopy(a)
    for e in b["edges"]:
        e["id"] += 10
        e["endpoints"] = [v + 10 for v in e["endpoints"]]
    b["faces"][0]["id"] = 1
    for s in b["faces"][0]["sides"]:
        s["edge"] += 10
    doc = {"kappa": 0.0, "vertices": a["vertices"] + [v + 10 for v in b["vertices"]],
           "edges": a["edges"] + b["edges"], "faces": a["faces"] + b["faces"]}
    with pytest.raises(InvalidComplexError):
        build_complex(doc)


def test_locate_errors():
    X = square_complex()
    with pytest.raises(LocationError):
        X.locate(("edge", 0, 10.0))
    with pytest.raises(LocationError):
        X.locate(("face", 7, [0.5, 0.5]))
    assert X.locate(("edge", 0, 0.0)) == ComplexPoint.vertex(0)


def test_tripod_spine_link_is_theta_graph():
    X = build_complex(tripod_complex())
    L = link_graph(X, ComplexPoint.on_edge(0, 5.0))
    assert len(L.nodes) == 2
    assert sorted(a[2] for a in L.arcs) == [math.pi] * 3
    assert link_girth(L) == 2 * math.pi


def test_tripod_corner_links_are_trees():
    X = build_complex(tripod_complex())
    rep = check_link_condition(X)
    assert rep.passed
    assert math.isinf(rep.girth[0]) and math.isinf(rep.girth[1])


def test_cone_fails_link_condition():
    X = build_complex(cone_complex())
    rep = check_link_condition(X)
    assert not rep.passed
    assert rep.girth[0] == pytest.approx(math.pi, abs=1e-12)


def test_interior_point_link_is_circle():
    X = square_complex()
    assert link_girth(link_graph(X, ComplexPoint.in_face(0, (1.0, 1.0)))) == 2 * math.pi


@pytest.mark.parametrize("kappa", [0.0, -1.0])
def test_subdivision_respects_mesh_size(kappa):
    r = 0.4 if kappa else 1.5
    X = build_complex(polygon_document(kappa, [(-r, -r), (r, -r), (r, r), (-r, r)]))
    S = subdivide(X, 0.2)
    assert S.max_diameter() <= 0.2 + 1e-9
    area = sum(S.face_area(f) for f in S.faces)
    assert area == pytest.approx(X.total_area(), rel=1e-9)


def test_subdivision_parent_maps():
    X = square_complex()
    S = subdivide(X, 0.5)
    P = X.locate(("face", 0, [1.2, 0.7]))
    Q = S.from_parent(P)
    back = S.to_parent(Q)
    assert back.kind == "face"
    assert back.xy == pytest.approx((1.2, 0.7), abs=1e-12)
    E = S.from_parent(ComplexPoint.on_edge(0, 1.3))
    assert S.to_parent(E).t == pytest.approx(1.3, abs=1e-12)


def test_seam_becomes_edge_chain():
    X = square_complex()
    seam = [X.locate(("face", 0, p)) for p in ([0.5, 0.5], [2.5, 0.7], [1.5, 2.5], [0.5, 0.5])]
    S = subdivide(X, 0.3, [seam])
    chain = S.seams[0]
    assert chain[0] == chain[-1]
    for a, b in zip(chain[:-1], chain[1:]):
        assert S.edge_between(a, b) is not None


def test_tripod_subdivision_links_on_spine():
    X = build_complex(tripod_complex())
    S = subdivide(X, 0.5)
    # interior spine vertices; the spine's end corners have tree links
    for _, v in S.edge_points[0][1:-1]:
        g = link_girth(link_graph(S, ComplexPoint.vertex(v)))
        assert abs(g - 2 * math.pi) <= 1e-12
