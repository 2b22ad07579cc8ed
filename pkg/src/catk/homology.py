"""Exact integer simplicial homology, bounding chains and curve interiors.

Everything here is integer arithmetic on Python ints (arbitrary precision).
Large complexes are first reduced by elementary collapses (an edge with a
single face is removed together with that face), which preserves the
homotopy type; what remains goes through sparse unit-pivot elimination and a
dense Smith normal form.
"""

from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass, field

from .complex import ComplexPoint
from .errors import InvalidCurveError, InvalidScenarioError

# ---------------------------------------------------------------------------
# chain complexes


@dataclass
class IntegerChainComplex:
    """Boundary maps of a 2-complex as sparse integer columns.

    ``d1[e] = {v: coeff}`` and ``d2[f] = {e: coeff}``; cell ids are those of
    the subdivision.  Edges run from ``u`` to ``v``; a triangle's boundary
    follows its corner order.
    """

    vertices: list
    edges: list
    faces: list
    d1: dict
    d2: dict

    def vertex_index(self):
        return {v: i for i, v in enumerate(self.vertices)}

    def edge_index(self):
        return {e: i for i, e in enumerate(self.edges)}

    def face_index(self):
        return {f: i for i, f in enumerate(self.faces)}

    def d1_matrix(self):
        """Dense integer matrix of the first boundary map (rows = vertices)."""
        vi = self.vertex_index()
        M = [[0] * len(self.edges) for _ in self.vertices]
        for j, e in enumerate(self.edges):
            for v, c in self.d1[e].items():
                M[vi[v]][j] += c
        return M

    def d2_matrix(self):
        """Dense integer matrix of the second boundary map (rows = edges)."""
        ei = self.edge_index()
        M = [[0] * len(self.faces) for _ in self.edges]
        for j, f in enumerate(self.faces):
            for e, c in self.d2[f].items():
                M[ei[e]][j] += c
        return M

    def boundary_of_boundary_is_zero(self):
        for f in self.faces:
            acc = defaultdict(int)
            for e, c in self.d2[f].items():
                for v, d in self.d1[e].items():
                    acc[v] += c * d
            if any(acc.values()):
                return False
        return True


def _face_boundary(S, f):
    face = S.faces[f]
    n = len(face.corners)
    out = {}
    for i in range(n):
        e = S.edges[face.sides[i]]
        out[face.sides[i]] = out.get(face.sides[i], 0) + (1 if e.u == face.corners[i] else -1)
    return {e: c for e, c in out.items() if c}


def chain_complex(S, E=None, drop_vertex=None, drop_edge=None):
    """Chain complex of S, of a region E, or of either minus an open star.

    ``drop_vertex`` removes the open star of a vertex; ``drop_edge`` removes an
    open edge together with its incident faces.
    """
    if E is None:
        V, Ed, F = set(S.vertices), set(S.edges), set(S.faces)
    else:
        V, Ed, F = set(E.vertices), set(E.edges), set(E.faces)
    if drop_vertex is not None:
        V.discard(drop_vertex)
        Ed -= set(S.vertex_edges[drop_vertex])
        F -= set(S.vertex_faces[drop_vertex])
    if drop_edge is not None:
        Ed.discard(drop_edge)
        F -= set(S.edge_faces[drop_edge])
    edges = sorted(Ed)
    faces = sorted(F)
    d1 = {}
    for e in edges:
        ed = S.edges[e]
        d1[e] = {ed.v: 1, ed.u: -1} if ed.u != ed.v else {}
    d2 = {f: _face_boundary(S, f) for f in faces}
    return IntegerChainComplex(sorted(V), edges, faces, d1, d2)


# ---------------------------------------------------------------------------
# reductions


def _collapse(C, keep_edges=()):
    """Elementary collapses; returns (remaining faces, remaining edges, pairs).

    ``pairs`` lists (edge, face) in collapse order.  Edges in ``keep_edges``
    are never used as free edges.
    """
    keep = set(keep_edges)
    faces = set(C.faces)
    edge_faces = defaultdict(set)
    for f in C.faces:
        for e in C.d2[f]:
            edge_faces[e].add(f)
    edges = set(C.edges)
    stack = sorted((e for e in edges if len(edge_faces[e]) == 1 and e not in keep), reverse=True)
    pairs = []
    while stack:
        e = stack.pop()
        if e not in edges or len(edge_faces[e]) != 1:
            continue
        (f,) = edge_faces[e]
        pairs.append((e, f))
        faces.discard(f)
        edges.discard(e)
        for e2 in C.d2[f]:
            edge_faces[e2].discard(f)
            if e2 in edges and len(edge_faces[e2]) == 1 and e2 not in keep:
                stack.append(e2)
    return faces, edges, pairs


def _components(vertices, edge_list):
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edge_list:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in vertices})


def smith_diagonal(M):
    """Nonzero Smith normal form diagonal of a dense integer matrix."""
    A = [list(map(int, row)) for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    diag = []
    t = 0
    while t < m and t < n:
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i, j = piv
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = A[i][t] // p
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                if A[i][t]:
                    dirty = True
            for j in range(t + 1, n):
                q = A[t][j] // p
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                if A[t][j]:
                    dirty = True
            if not dirty:
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if A[i][j] % p), None)
                if bad is None:
                    break
                A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
                continue
            # move the smallest nonzero entry of row/column t to the pivot
            best = (abs(p), t, t)
            for i in range(t + 1, m):
                if A[i][t] and abs(A[i][t]) < best[0]:
                    best = (abs(A[i][t]), i, t)
            for j in range(t + 1, n):
                if A[t][j] and abs(A[t][j]) < best[0]:
                    best = (abs(A[t][j]), t, j)
            _, i, j = best
            A[t], A[i] = A[i], A[t]
            for row in A:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def _sparse_unit_reduce(cols):
    """Eliminate unit pivots from sparse integer columns.

    Returns (number of unit pivots, leftover columns) where the leftover
    matrix has the same Smith form apart from the removed unit factors.
    """
    cols = {j: dict(c) for j, c in cols.items() if c}
    rows = defaultdict(set)
    for j, c in cols.items():
        for i in c:
            rows[i].add(j)
    units = 0
    progress = True
    while progress:
        progress = False
        for j in sorted(cols, key=lambda j: (len(cols[j]), j)):
            if j not in cols:
                continue
            c = cols[j]
            piv = next((i for i in sorted(c, key=lambda i: (len(rows[i]), i)) if abs(c[i]) == 1),
                       None)
            if piv is None:
                continue
            a = c[piv]
            for j2 in sorted(rows[piv] - {j}):
                c2 = cols[j2]
                q = c2[piv] * a  # a = +-1, so q * a * a = c2[piv]
                for i, x in c.items():
                    y = c2.get(i, 0) - q * x
                    if y:
                        if i not in c2:
                            rows[i].add(j2)
                        c2[i] = y
                    elif i in c2:
                        del c2[i]
                        rows[i].discard(j2)
                if not c2:
                    del cols[j2]
            for i in c:
                rows[i].discard(j)
            del cols[j]
            rows.pop(piv, None)
            units += 1
            progress = True
    return units, cols


@dataclass
class H1Result:
    betti1: int
    torsion: list
    betti2: int
    rank_d2: int

    def to_json(self):
        return {"betti1": self.betti1, "torsion": list(self.torsion), "betti2": self.betti2}


def homology_H1(C: IntegerChainComplex) -> H1Result:
    """H1 as free rank plus invariant factors; also the rank of H2."""
    comps = _components(C.vertices, [tuple(C.d1[e]) for e in C.edges if len(C.d1[e]) == 2])
    rank_d1 = len(C.vertices) - comps
    faces, edges, pairs = _collapse(C)
    cols = {f: C.d2[f] for f in sorted(faces)}
    units, rest = _sparse_unit_reduce(cols)
    diag = [1] * units
    if rest:
        row_ids = sorted({i for c in rest.values() for i in c})
        ri = {e: k for k, e in enumerate(row_ids)}
        col_ids = sorted(rest)
        M = [[0] * len(col_ids) for _ in row_ids]
        for k, j in enumerate(col_ids):
            for i, x in rest[j].items():
                M[ri[i]][k] = x
        diag += smith_diagonal(M)
    rank_d2 = len(pairs) + len(diag)
    betti1 = len(C.edges) - rank_d1 - rank_d2
    torsion = sorted(d for d in diag if d > 1)
    betti2 = len(C.faces) - rank_d2
    return H1Result(betti1, torsion, betti2, rank_d2)


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CycleCurve:
    """Simple closed edge path in the subdivision 1-skeleton."""

    S: object
    vertices: tuple
    edges: tuple
    signs: tuple

    @classmethod
    def from_vertices(cls, S, vertices):
        vs = list(vertices)
        if len(vs) > 1 and vs[0] == vs[-1]:
            vs = vs[:-1]
        if len(vs) < 3:
            raise InvalidCurveError("a closed curve needs at least three vertices")
        if len(set(vs)) != len(vs):
            raise InvalidCurveError("curve is not simple: a vertex repeats")
        edges, signs = [], []
        for a, b in zip(vs, vs[1:] + vs[:1]):
            e = S.edge_between(a, b)
            if e is None:
                raise InvalidCurveError(f"vertices {a} and {b} are not joined by an edge")
            edges.append(e)
            signs.append(1 if S.edges[e].u == a else -1)
        if len(set(edges)) != len(edges):
            raise InvalidCurveError("curve is not simple: an edge repeats")
        return cls(S, tuple(vs), tuple(edges), tuple(signs))

    def chain(self):
        return {e: s for e, s in zip(self.edges, self.signs)}

    def boundary(self):
        acc = defaultdict(int)
        for e, s in zip(self.edges, self.signs):
            ed = self.S.edges[e]
            acc[ed.v] += s
            acc[ed.u] -= s
        return {v: c for v, c in acc.items() if c}

    def contains_point(self, P):
        if P.kind == "vertex":
            return P.cell in self.vertex_set
        if P.kind == "edge":
            return P.cell in self.edge_set
        return False

    @property
    def vertex_set(self):
        return frozenset(self.vertices)

    @property
    def edge_set(self):
        return frozenset(self.edges)

    def to_json(self):
        return {"vertices": len(self.vertices),
                "points": [self.S.to_parent(ComplexPoint.vertex(v)).to_json() for v in self.vertices]}


def _solve_chain(C, target, order=1):
    """Integer 2-chain c with d2 c = target, or None when there is none.

    Free edges are peeled in increasing (order=1) or decreasing (order=-1) id
    order; anything left over is solved by exact rational elimination.
    """
    edge_faces = defaultdict(set)
    for f in C.faces:
        for e in C.d2[f]:
            edge_faces[e].add(f)
    r = defaultdict(int, {e: c for e, c in target.items() if c})
    if any(e not in C.d1 for e in r):
        return None
    faces = set(C.faces)
    coeff = {}
    heap = [order * e for e in C.edges if len(edge_faces[e]) == 1]
    heapq.heapify(heap)
    while heap:
        e = order * heapq.heappop(heap)
        if len(edge_faces[e]) != 1:
            continue
        (f,) = edge_faces[e]
        s = C.d2[f][e]
        x, rem = divmod(r.get(e, 0), s)
        if rem:
            return None
        if x:
            coeff[f] = x
            for e2, c in C.d2[f].items():
                r[e2] -= x * c
                if not r[e2]:
                    del r[e2]
        faces.discard(f)
        for e2 in C.d2[f]:
            edge_faces[e2].discard(f)
            if len(edge_faces[e2]) == 1:
                heapq.heappush(heap, order * e2)
    if faces:
        sol = _rational_solve({f: C.d2[f] for f in sorted(faces, key=lambda f: order * f)}, dict(r))
        if sol is None:
            return None
        for f, x in sol.items():
            if x:
                coeff[f] = x
                for e2, c in C.d2[f].items():
                    r[e2] -= x * c
                    if not r[e2]:
                        del r[e2]
    if any(r.values()):
        return None
    return dict(sorted(coeff.items()))


def _rational_solve(cols, rhs):
    """Exact solution of sum_j x_j cols[j] = rhs over the rationals, if integral."""
    from fractions import Fraction

    order = list(cols)
    pivots = []  # (row, col, reduced column)
    reduced = {}
    b = {i: Fraction(v) for i, v in rhs.items() if v}
    basis = {}
    for j in order:
        c = {i: Fraction(v) for i, v in cols[j].items()}
        combo = {j: Fraction(1)}
        for piv_row, (pc, pcombo) in basis.items():
            if piv_row in c and c[piv_row]:
                q = c[piv_row] / pc[piv_row]
                for i, v in pc.items():
                    c[i] = c.get(i, 0) - q * v
                for k, v in pcombo.items():
                    combo[k] = combo.get(k, 0) - q * v
        c = {i: v for i, v in c.items() if v}
        if not c:
            continue
        piv = min(c)
        for pr, (pc, pcombo) in list(basis.items()):
            if piv in pc and pc[piv]:
                q = pc[piv] / c[piv]
                for i, v in c.items():
                    pc[i] = pc.get(i, 0) - q * v
                for k, v in combo.items():
                    pcombo[k] = pcombo.get(k, 0) - q * v
                basis[pr] = ({i: v for i, v in pc.items() if v}, pcombo)
        basis[piv] = (c, combo)
    x = defaultdict(Fraction)
    for piv, (pc, combo) in basis.items():
        if piv in b and b[piv]:
            q = b[piv] / pc[piv]
            for i, v in pc.items():
                b[i] = b.get(i, 0) - q * v
            for k, v in combo.items():
                x[k] += q * v
    if any(b.values()):
        return None
    out = {}
    for k, v in x.items():
        if v.denominator != 1:
            return None
        if v:
            out[k] = int(v)
    return out


def bounding_chain(S, gamma: CycleCurve, order=1, C=None):
    """The integer 2-chain whose boundary is the curve."""
    C = chain_complex(S) if C is None else C
    c = _solve_chain(C, gamma.chain(), order)
    if c is None:
        raise InvalidScenarioError("curve bounds no 2-chain: the complex is not H1-trivial")
    return c


def apply_d2(C, chain):
    acc = defaultdict(int)
    for f, x in chain.items():
        for e, c in C.d2[f].items():
            acc[e] += x * c
    return {e: v for e, v in acc.items() if v}


def bounds_after_removal(S, gamma, drop_vertex=None, drop_edge=None):
    """Whether the curve is null-homologous once an open star is removed."""
    C = chain_complex(S, drop_vertex=drop_vertex, drop_edge=drop_edge)
    if drop_vertex is not None and drop_vertex in gamma.vertex_set:
        raise InvalidCurveError("the removed vertex lies on the curve")
    if drop_edge is not None and drop_edge in gamma.edge_set:
        raise InvalidCurveError("the removed edge lies on the curve")
    return _solve_chain(C, gamma.chain()) is not None


# ---------------------------------------------------------------------------
# interiors


@dataclass
class InteriorClassification:
    gamma: CycleCurve
    chain: dict
    faces_in: frozenset
    vertex_in: dict = field(default_factory=dict)
    tested: dict = field(default_factory=dict)

    def face_in(self, f):
        return f in self.faces_in

    def point_in(self, P):
        """Membership of a subdivision point in Int of the curve."""
        S = self.gamma.S
        if self.gamma.contains_point(P):
            return False
        if P.kind == "face":
            return P.cell in self.faces_in
        if P.kind == "edge":
            return any(f in self.faces_in for f in S.edge_faces[P.cell])
        return self.vertex_in[P.cell]

    def in_or_on(self, P):
        return self.gamma.contains_point(P) or self.point_in(P)

    def region(self):
        from .region import Region

        return Region.closure(self.gamma.S, self.faces_in, self.gamma.edges)

    def summary(self):
        S = self.gamma.S
        return {"faces_in": len(self.faces_in), "faces": len(S.faces),
                "vertices_in": sum(1 for v in self.vertex_in.values() if v),
                "chain_coefficients": sorted({int(x) for x in self.chain.values()})}


def curve_interior(S, gamma: CycleCurve, C=None) -> InteriorClassification:
    """Classification from the bounding chain; vertices by their open stars."""
    c = bounding_chain(S, gamma, C=C)
    faces_in = frozenset(f for f, x in c.items() if x)
    vin = {}
    for v in S.vertices:
        if v in gamma.vertex_set:
            continue
        vin[v] = any(f in faces_in for f in S.vertex_faces[v])
    return InteriorClassification(gamma, c, faces_in, vin)


def vertex_deletion_in(S, gamma, v):
    """Independent test: is [gamma] nonzero in H1 of S minus the open star of v."""
    return not bounds_after_removal(S, gamma, drop_vertex=v)


def edge_deletion_in(S, gamma, e):
    """Midpoint test for an edge point: remove the open edge and its faces."""
    return not bounds_after_removal(S, gamma, drop_edge=e)


def cross_validate(cls: InteriorClassification, vertices=(), edges=()):
    """Compare chain-based and deletion-based verdicts on chosen cells."""
    S = cls.gamma.S
    out = {"tested": 0, "agree": 0, "disagreements": []}
    for v in sorted(set(vertices)):
        if v in cls.gamma.vertex_set:
            continue
        a = cls.vertex_in[v]
        b = vertex_deletion_in(S, cls.gamma, v)
        cls.tested[("vertex", v)] = b
        out["tested"] += 1
        if a == b:
            out["agree"] += 1
        else:
            out["disagreements"].append({"vertex": v, "chain": a, "deletion": b})
    for e in sorted(set(edges)):
        if e in cls.gamma.edge_set:
            continue
        a = any(f in cls.faces_in for f in S.edge_faces[e])
        b = edge_deletion_in(S, cls.gamma, e)
        cls.tested[("edge", e)] = b
        out["tested"] += 1
        if a == b:
            out["agree"] += 1
        else:
            out["disagreements"].append({"edge": e, "chain": a, "deletion": b})
    return out


def accumulation_check(cls: InteriorClassification, radius):
    """Distance in the 1-skeleton from each curve vertex to an interior face."""
    S = cls.gamma.S
    targets = set()
    for f in cls.faces_in:
        targets.update(S.faces[f].corners)
    dist = {v: 0.0 for v in targets}
    heap = [(0.0, v) for v in sorted(targets)]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist.get(v, math.inf) or d > radius:
            continue
        for e in S.vertex_edges[v]:
            ed = S.edges[e]
            w = ed.v if ed.u == v else ed.u
            nd = d + ed.length
            if nd < dist.get(w, math.inf):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    failures = [v for v in cls.gamma.vertices if dist.get(v, math.inf) > radius]
    worst = max((dist.get(v, math.inf) for v in cls.gamma.vertices), default=0.0)
    return {"radius": radius, "max_distance": worst, "failures": failures,
            "pass": not failures}
