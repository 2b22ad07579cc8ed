import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catk.complex import ComplexPoint
from catk.errors import InvalidCurveError
from catk.homology import (
    CycleCurve,
    IntegerChainComplex,
    accumulation_check,
    apply_d2,
    bounding_chain,
    chain_complex,
    cross_validate,
    curve_interior,
    edge_deletion_in,
    homology_H1,
    smith_diagonal,
    vertex_deletion_in,
)
from catk.region import Region, carve
from catk.subdivide import subdivide
from conftest import square_complex


def _det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    return sum((-1) ** j * M[0][j] * _det([row[:j] + row[j + 1:] for row in M[1:]]) for j in range(n))


def _minor_gcds(M):
    """d_k = gcd of all k x k minors; the Smith diagonal is d_k / d_{k-1}."""
    m, n = len(M), len(M[0])
    out = []
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, _det([[M[r][c] for c in cols] for r in rows]))
        if g == 0:
            break
        out.append(g)
    return out


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_smith_diagonal_matches_minor_oracle(m, n, data):
    M = [[data.draw(st.integers(-4, 4)) for _ in range(n)] for _ in range(m)]
    diag = smith_diagonal(M)
    d = _minor_gcds(M)
    expect = [d[0]] + [d[i] // d[i - 1] for i in range(1, len(d))] if d else []
    assert [abs(x) for x in diag] == expect
    for a, b in zip(diag[:-1], diag[1:]):
        assert b % a == 0


def test_disk_has_trivial_h1():
    S = subdivide(square_complex(), 0.5)
    C = chain_complex(S)
    assert C.boundary_of_boundary_is_zero()
    r = homology_H1(C)
    assert (r.betti1, r.torsion, r.betti2) == (0, [], 0)


def test_annulus_has_betti_one():
    X = square_complex()
    hole = [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]
    seam = [X.locate(("face", 0, p)) for p in hole + [hole[0]]]
    S = subdivide(X, 0.5, [seam])
    E = carve(S, [(0, hole)])
    r = homology_H1(chain_complex(S, E))
    assert (r.betti1, r.torsion) == (1, [])


def _projective_plane():
    """Minimal 6-vertex triangulation of the real projective plane."""
    tris = [(1, 2, 4), (2, 3, 4), (3, 1, 5), (3, 4, 5), (1, 4, 6), (4, 5, 6),
            (2, 5, 6), (1, 5, 2), (2, 6, 3), (1, 3, 6)]
    edges = sorted({tuple(sorted(p)) for t in tris for p in itertools.combinations(t, 2)})
    eid = {e: i for i, e in enumerate(edges)}
    d1 = {i: {e[1]: 1, e[0]: -1} for i, e in enumerate(edges)}
    d2 = {}
    for f, (a, b, c) in enumerate(tris):
        col = {}
        for x, y in ((a, b), (b, c), (c, a)):
            col[eid[tuple(sorted((x, y)))]] = 1 if x < y else -1
        d2[f] = col
    return IntegerChainComplex(list(range(1, 7)), list(range(len(edges))), list(range(len(tris))), d1, d2)


def test_projective_plane_has_two_torsion():
    C = _projective_plane()
    assert C.boundary_of_boundary_is_zero()
    r = homology_H1(C)
    assert (r.betti1, r.torsion, r.betti2) == (0, [2], 0)


def test_square_curve_bounds_interior():
    X = square_complex()
    seam = [X.locate(("face", 0, p)) for p in ([0.5, 0.5], [2.5, 0.5], [2.5, 2.5], [0.5, 2.5], [0.5, 0.5])]
    S = subdivide(X, 0.5, [seam])
    g = CycleCurve.from_vertices(S, S.seams[0])
    C = chain_complex(S)
    cls = curve_interior(S, g, C)
    assert apply_d2(C, cls.chain) == g.chain()
    assert cls.point_in(S.from_parent(X.locate(("face", 0, [1.5, 1.5]))))
    assert not cls.point_in(S.from_parent(X.locate(("face", 0, [0.2, 1.5]))))
    inside = sorted(v for v, x in cls.vertex_in.items() if x)
    outside = sorted(v for v, x in cls.vertex_in.items() if not x)
    verts = inside[:5] + outside[:5]
    cv = cross_validate(cls, verts, [])
    assert cv["tested"] == cv["agree"] == 10


def test_non_simple_curve_is_rejected():
    S = subdivide(square_complex(), 1.0)
    vs = [0, 1, 2, 1, 0]
    with pytest.raises(InvalidCurveError):
        CycleCurve.from_vertices(S, vs)


# -- the worked three half-plane example ------------------------------------


def test_tripod_curve_chain_identities(tripod):
    C, cls, g = tripod.C, tripod.cls, tripod.gamma
    assert C.boundary_of_boundary_is_zero()
    assert apply_d2(C, cls.chain) == g.chain()
    # H2 = 0, so the bounding chain is unique
    assert homology_H1(C).betti2 == 0
    assert bounding_chain(tripod.S, g, order=-1, C=C) == cls.chain


def test_tripod_interior_closure_homology(tripod):
    r = homology_H1(chain_complex(tripod.S, tripod.cls.region()))
    assert (r.betti1, r.torsion) == (2, [])


def test_tripod_origin_is_out(tripod):
    P = tripod.spine(5.0)
    assert P.kind == "vertex"
    assert not tripod.cls.point_in(P)
    assert not vertex_deletion_in(tripod.S, tripod.gamma, P.cell)


def test_tripod_non_openness_witness(tripod):
    S, cls = tripod.S, tripod.cls
    found = []
    for v in tripod.spine_vertices():
        if cls.vertex_in.get(v) and any(f not in cls.faces_in for f in S.vertex_faces[v]):
            found.append(v)
    assert found
    assert vertex_deletion_in(S, tripod.gamma, found[0])


def test_tripod_edge_deletion_matches(tripod):
    S, cls = tripod.S, tripod.cls
    P = S.from_parent(ComplexPoint.on_edge(0, 2.6))
    e = P.cell if P.kind == "edge" else S.vertex_edges[P.cell][0]
    assert edge_deletion_in(S, tripod.gamma, e) == cls.point_in(ComplexPoint.on_edge(e, 0.5 * S.edges[e].length))


def test_tripod_accumulation(tripod):
    acc = accumulation_check(tripod.cls, 3 * tripod.S.h)
    assert acc["pass"] and not acc["failures"]


def test_region_closure_is_closed(tripod):
    R = tripod.cls.region()
    assert isinstance(R, Region) and R.is_closed()
