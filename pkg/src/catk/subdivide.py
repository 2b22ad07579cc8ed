"""Triangulated refinements of a complex with prescribed seams.

Every parent edge is split at the seam points it carries and then into equal
arclength pieces of length at most h, so all incident faces share the same
boundary vertices.  Each parent face is triangulated in its own chart by a
constrained Delaunay triangulation (``triangle``), seams included as
constraint segments.  Finally, global longest-edge bisection brings every
cell diameter to at most h; bisecting the longest edge in all of its incident
triangles at once keeps the mesh conforming across non-manifold edges.
"""

from __future__ import annotations

import bisect
import heapq
import math
from collections import defaultdict

import numpy as np
import triangle as tr

from .complex import ComplexPoint, Edge, Face, PolyhedralComplex
from .errors import InvalidSeamError, LocationError
from .model import EPS, chart_dist, chart_lerp, orient


def _on_segment(a, b, p, tol):
    """Parameter of p along chart segment [a, b] if p lies on it, else None."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    s = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2
    if s < -tol or s > 1 + tol:
        return None
    if abs(orient(a, b, p)) / math.sqrt(L2) > tol:
        return None
    return min(max(s, 0.0), 1.0)


def _cross(a, b, c, d, tol):
    """Proper crossing point of chart segments [a,b] and [c,d], else None."""
    r = (b[0] - a[0], b[1] - a[1])
    s = (d[0] - c[0], d[1] - c[1])
    den = r[0] * s[1] - r[1] * s[0]
    if abs(den) <= tol * max(1.0, math.hypot(*r) * math.hypot(*s)):
        return None
    w = (c[0] - a[0], c[1] - a[1])
    t = (w[0] * s[1] - w[1] * s[0]) / den
    u = (w[0] * r[1] - w[1] * r[0]) / den
    if tol < t < 1 - tol and tol < u < 1 - tol:
        return (a[0] + t * r[0], a[1] + t * r[1])
    return None


class SubdividedComplex(PolyhedralComplex):
    """Triangulated refinement; every triangle uses its parent face's chart.

    Edges are oriented from the lower to the higher vertex id, and the edge
    parameter is arclength from the lower id.  ``vertex_parent[v]`` is
    ``('vertex', pv)``, ``('edge', pe, t)`` or ``('face', pf, xy)``.
    """

    def __init__(self, parent, h, vertex_parent, edges, faces, edge_parent, face_parent, seams):
        super().__init__(parent.kappa, list(range(len(vertex_parent))), edges, faces)
        self.parent = parent
        self.h = h
        self.vertex_parent = vertex_parent
        self.edge_parent = edge_parent
        self.face_parent = face_parent
        self.seams = seams
        self.parent_vertex = {}
        self.edge_points = defaultdict(list)
        for v, vp in enumerate(vertex_parent):
            if vp[0] == "vertex":
                self.parent_vertex[vp[1]] = v
            elif vp[0] == "edge":
                self.edge_points[vp[1]].append((vp[2], v))
        for pe, e in parent.edges.items():
            pts = self.edge_points[pe]
            pts.append((0.0, self.parent_vertex[e.u]))
            pts.append((e.length, self.parent_vertex[e.v]))
            pts.sort()
        self.parent_faces = defaultdict(list)
        for t, pf in sorted(face_parent.items()):
            self.parent_faces[pf].append(t)
        self._face_arrays = {}

    # -- parent correspondence ---------------------------------------------

    def max_diameter(self):
        return max((e.length for e in self.edges.values()), default=0.0)

    def vertex_xy(self, v, pf):
        """Chart coordinates of subdivision vertex v in parent face pf."""
        vp = self.vertex_parent[v]
        X = self.parent
        if vp[0] == "vertex":
            return X.vertex_chart(pf, vp[1])
        if vp[0] == "edge":
            return X.point_chart(ComplexPoint.on_edge(vp[1], vp[2]), pf)
        return vp[2]

    def to_parent(self, p: ComplexPoint) -> ComplexPoint:
        if p.kind == "vertex":
            vp = self.vertex_parent[p.cell]
            if vp[0] == "vertex":
                return ComplexPoint.vertex(vp[1])
            if vp[0] == "edge":
                return ComplexPoint.on_edge(vp[1], vp[2])
            return ComplexPoint.in_face(vp[1], vp[2])
        if p.kind == "edge":
            e = self.edges[p.cell]
            ep = self.edge_parent[p.cell]
            if ep[0] == "edge":
                pe = ep[1]
                ta, tb = self._edge_param(e.u, pe), self._edge_param(e.v, pe)
                t = ta + (tb - ta) * (p.t / e.length)
                return ComplexPoint.on_edge(pe, t)
            pf = ep[1]
            xy = chart_lerp(self.kappa, self.vertex_xy(e.u, pf), self.vertex_xy(e.v, pf), p.t / e.length)
            return ComplexPoint.in_face(pf, xy)
        return ComplexPoint.in_face(self.face_parent[p.cell], p.xy)

    def _edge_param(self, v, pe):
        vp = self.vertex_parent[v]
        if vp[0] == "edge":
            return vp[2]
        e = self.parent.edges[pe]
        return 0.0 if vp[1] == e.u else e.length

    def from_parent(self, p: ComplexPoint) -> ComplexPoint:
        """Locate a parent-complex point in the subdivision."""
        if p.kind == "vertex":
            return ComplexPoint.vertex(self.parent_vertex[p.cell])
        if p.kind == "edge":
            pts = self.edge_points[p.cell]
            L = self.parent.edges[p.cell].length
            tol = EPS * max(1.0, L)
            ts = [q[0] for q in pts]
            i = bisect.bisect_left(ts, p.t)
            for j in (i - 1, i):
                if 0 <= j < len(ts) and abs(ts[j] - p.t) <= tol:
                    return ComplexPoint.vertex(pts[j][1])
            a, b = pts[i - 1], pts[i]
            eid = self.edge_between(a[1], b[1])
            e = self.edges[eid]
            frac = (p.t - a[0]) / (b[0] - a[0])
            s = frac * e.length if e.u == a[1] else (1.0 - frac) * e.length
            return ComplexPoint.on_edge(eid, s)
        return self.locate_in_parent_face(p.cell, p.xy)

    def _arrays(self, pf):
        arr = self._face_arrays.get(pf)
        if arr is None:
            tids = self.parent_faces[pf]
            A = np.array([self.faces[t].chart for t in tids], dtype=float)
            arr = (np.array(tids), A)
            self._face_arrays[pf] = arr
        return arr

    def locate_in_parent_face(self, pf, xy) -> ComplexPoint:
        tids, A = self._arrays(pf)
        p = np.asarray(xy, dtype=float)
        a, b, c = A[:, 0], A[:, 1], A[:, 2]
        v0, v1, v2 = b - a, c - a, p - a
        den = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
        l1 = (v2[:, 0] * v1[:, 1] - v2[:, 1] * v1[:, 0]) / den
        l2 = (v0[:, 0] * v2[:, 1] - v0[:, 1] * v2[:, 0]) / den
        m = np.minimum(np.minimum(1 - l1 - l2, l1), l2)
        k = int(np.argmax(m))
        if m[k] < -1e-7:
            raise LocationError(f"point {tuple(xy)} lies outside parent face {pf}")
        return self.canonical_face_point(int(tids[k]), (float(p[0]), float(p[1])), tol=1e-9)

    def parent_point_xy(self, p: ComplexPoint, pf):
        """Chart coordinates of a subdivision point in parent face pf."""
        return self.parent.point_chart(self.to_parent(p), pf)

    def triangles_of_parent(self, pf):
        return list(self.parent_faces[pf])


# ---------------------------------------------------------------------------
# construction


class _Builder:
    def __init__(self, X, h):
        self.X = X
        self.k = X.kappa
        self.h = h
        self.vparent = []
        self.vchart = {}
        self.pvid = {}
        self.epts = {}  # pe -> {t: vid}

    def new_vertex(self, parent):
        self.vparent.append(parent)
        return len(self.vparent) - 1

    def xy(self, v, pf):
        key = (v, pf)
        c = self.vchart.get(key)
        if c is None:
            vp = self.vparent[v]
            if vp[0] == "vertex":
                c = self.X.vertex_chart(pf, vp[1])
            elif vp[0] == "edge":
                c = self.X.point_chart(ComplexPoint.on_edge(vp[1], vp[2]), pf)
            else:
                if vp[1] != pf:
                    raise LocationError(f"vertex {v} has no chart in face {pf}")
                c = vp[2]
            self.vchart[key] = c
        return c


def _seam_segments(X, seams):
    """Split seams into along-edge and in-face pieces.

    Returns per-seam lists of pieces ``('edge', pe, P, Q)`` or
    ``('face', pf, P, Q)`` plus the required edge parameters.
    """
    required = defaultdict(set)
    pieces = []
    for si, seam in enumerate(seams):
        pts = list(seam)
        if len(pts) < 2:
            raise InvalidSeamError(f"seam {si} has fewer than two points")
        out = []
        for P in pts:
            if P.kind == "edge":
                required[P.cell].add(P.t)
        for P, Q in zip(pts[:-1], pts[1:]):
            if P == Q:
                continue
            pe = _common_edge(X, P, Q)
            if pe is not None:
                out.append(("edge", pe, P, Q))
                continue
            common = sorted(set(X.point_faces(P)) & set(X.point_faces(Q)))
            if not common:
                raise InvalidSeamError(f"seam {si}: consecutive points {P} and {Q} share no face")
            out.append(("face", common[0], P, Q))
        pieces.append(out)
    return pieces, required


def _common_edge(X, P, Q):
    def edges_of(R):
        if R.kind == "vertex":
            return set(X.vertex_edges[R.cell])
        if R.kind == "edge":
            return {R.cell}
        return set()

    common = sorted(edges_of(P) & edges_of(Q))
    return common[0] if common else None


def _edge_t(X, pe, P):
    e = X.edges[pe]
    if P.kind == "edge":
        return P.t
    return 0.0 if P.cell == e.u else e.length


def subdivide(X, h, seams=(), min_angle=20.0):
    """Triangulate X with cell diameter at most h, seams in the 1-skeleton.

    ``seams`` is a sequence of polylines, each a sequence of parent
    ComplexPoints whose consecutive points share a closed face.  Returns a
    SubdividedComplex whose ``seams`` lists the vertex chain of each polyline.
    """
    if not h > 0:
        raise ValueError("mesh parameter h must be positive")
    k = X.kappa
    B = _Builder(X, h)
    pieces, required = _seam_segments(X, seams)

    for pv in sorted(X.vertices):
        B.pvid[pv] = B.new_vertex(("vertex", pv))

    # shared points on parent edges
    for pe in sorted(X.edges):
        e = X.edges[pe]
        L = e.length
        tol = EPS * max(1.0, L)
        req = sorted({0.0, L} | {min(max(t, 0.0), L) for t in required.get(pe, ())})
        merged = [req[0]]
        for t in req[1:]:
            if t - merged[-1] > tol:
                merged.append(t)
            else:
                merged[-1] = t if abs(t - L) <= tol else merged[-1]
        merged[-1] = L
        pts = {0.0: B.pvid[e.u], L: B.pvid[e.v]}
        for a, b in zip(merged[:-1], merged[1:]):
            n = max(1, math.ceil((b - a) / h - 1e-12))
            for i in range(n + 1):
                t = b if i == n else a + (b - a) * i / n
                if t not in pts:
                    pts[t] = B.new_vertex(("edge", pe, t))
        B.epts[pe] = dict(sorted(pts.items()))

    def edge_vid(pe, t):
        pts = B.epts[pe]
        if t in pts:
            return pts[t]
        L = X.edges[pe].length
        best = min(pts, key=lambda s: abs(s - t))
        if abs(best - t) > EPS * max(1.0, L):
            raise InvalidSeamError(f"seam point t={t} on edge {pe} was not registered")
        return pts[best]

    face_points = defaultdict(dict)  # pf -> {xy: vid} for interior points

    def point_vid(P, pf=None):
        if P.kind == "vertex":
            return B.pvid[P.cell]
        if P.kind == "edge":
            return edge_vid(P.cell, P.t)
        reg = face_points[P.cell]
        for xy, v in reg.items():
            if math.hypot(xy[0] - P.xy[0], xy[1] - P.xy[1]) <= 1e-12:
                return v
        v = B.new_vertex(("face", P.cell, P.xy))
        reg[P.xy] = v
        return v

    # per-face seam segments as vertex pairs
    face_segs = defaultdict(list)  # pf -> list of (seam idx, piece idx, va, vb)
    for si, plist in enumerate(pieces):
        for pi, (kind, cell, P, Q) in enumerate(plist):
            if kind == "face":
                face_segs[cell].append((si, pi, point_vid(P), point_vid(Q)))

    piece_chain = {}  # (si, pi) -> vertex list
    triangles = {}
    edge_parent = {}
    tid_counter = 0

    for pf in sorted(X.faces):
        f = X.faces[pf]
        n = len(f.corners)
        boundary = []
        for i in range(n):
            pe = f.sides[i]
            pts = list(B.epts[pe].values())
            if f.corners[i] != X.edges[pe].u:
                pts = pts[::-1]
            boundary.extend(pts[:-1])
        vids = list(boundary)
        for v in face_points[pf].values():
            vids.append(v)
        segs = face_segs.get(pf, [])
        scale = max(max(abs(c[0]), abs(c[1])) for c in f.chart)
        tol = 1e-10 * max(1.0, scale)
        # crossings between seam segments become vertices
        coords = {v: B.xy(v, pf) for v in vids}
        extra = []
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                a, b = coords[segs[i][2]], coords[segs[i][3]]
                c, d = coords[segs[j][2]], coords[segs[j][3]]
                x = _cross(a, b, c, d, 1e-12)
                if x is not None and all(math.hypot(x[0] - q[0], x[1] - q[1]) > tol for q in extra):
                    extra.append(x)
        for x in extra:
            v = point_vid(ComplexPoint.in_face(pf, x))
            vids.append(v)
            coords[v] = x
        # split segments at the points lying on them
        constraint = set()
        for si, pi, va, vb in segs:
            a, b = coords[va], coords[vb]
            on = []
            for v, q in coords.items():
                if v in (va, vb):
                    continue
                s = _on_segment(a, b, q, tol)
                if s is not None and 0 < s < 1:
                    on.append((s, v))
            chain = [va] + [v for _, v in sorted(on)] + [vb]
            piece_chain[(si, pi)] = chain
            for x, y in zip(chain[:-1], chain[1:]):
                constraint.add((min(x, y), max(x, y)))
        for i in range(len(boundary)):
            x, y = boundary[i], boundary[(i + 1) % len(boundary)]
            constraint.add((min(x, y), max(x, y)))

        local = {v: i for i, v in enumerate(vids)}
        area = 0.3 * h * h
        if k != 0.0:
            # chart lengths shrink towards the disk boundary; Rivara finishes the job
            area *= 1.0
        data = {
            "vertices": np.array([coords[v] for v in vids], dtype=float),
            "segments": np.array(sorted((local[a], local[b]) for a, b in constraint), dtype=np.int32),
        }
        out = tr.triangulate(data, f"pq{min_angle:g}a{area:.17g}YYQ")
        V = out["vertices"]
        newv = list(vids)
        for i in range(len(vids), len(V)):
            xy = (float(V[i][0]), float(V[i][1]))
            v = B.new_vertex(("face", pf, xy))
            newv.append(v)
        for T in out["triangles"]:
            a, b, c = (newv[int(i)] for i in T)
            if orient(B.xy(a, pf), B.xy(b, pf), B.xy(c, pf)) < 0:
                b, c = c, b
            triangles[tid_counter] = (a, b, c, pf)
            tid_counter += 1
            for x, y in ((a, b), (b, c), (c, a)):
                key = (min(x, y), max(x, y))
                if key not in edge_parent:
                    edge_parent[key] = ("face", pf)

    # parent-edge pieces override face parentage; free parent edges included
    for pe in sorted(X.edges):
        pts = list(B.epts[pe].values())
        for x, y in zip(pts[:-1], pts[1:]):
            edge_parent[(min(x, y), max(x, y))] = ("edge", pe)

    # seam chains at the initial triangulation
    chains = []
    for si, plist in enumerate(pieces):
        chain = []
        for pi, (kind, cell, P, Q) in enumerate(plist):
            if kind == "edge":
                ta, tb = _edge_t(X, cell, P), _edge_t(X, cell, Q)
                lo, hi = min(ta, tb), max(ta, tb)
                tol = EPS * max(1.0, X.edges[cell].length)
                seg = [v for t, v in B.epts[cell].items() if lo - tol <= t <= hi + tol]
                if ta > tb:
                    seg = seg[::-1]
            else:
                seg = piece_chain[(si, pi)]
            if chain and chain[-1] == seg[0]:
                chain.extend(seg[1:])
            else:
                chain.extend(seg)
        chains.append(chain)

    _rivara(B, triangles, edge_parent, chains, h)
    return _assemble(X, B, h, triangles, edge_parent, chains)


def _edge_len(B, key, parent, tris_of_edge, triangles):
    a, b = key
    if parent[0] == "edge":
        pe = parent[1]
        e = B.X.edges[pe]

        def t(v):
            vp = B.vparent[v]
            if vp[0] == "edge":
                return vp[2]
            return 0.0 if vp[1] == e.u else e.length

        return abs(t(a) - t(b))
    pf = parent[1]
    return chart_dist(B.k, B.xy(a, pf), B.xy(b, pf))


def _rivara(B, triangles, edge_parent, chains, h):
    """Bisect the globally longest edge until every edge is at most h."""
    edge_tris = defaultdict(set)
    for t, (a, b, c, pf) in triangles.items():
        for x, y in ((a, b), (b, c), (c, a)):
            edge_tris[(min(x, y), max(x, y))].add(t)
    lengths = {}
    heap = []
    for key, par in edge_parent.items():
        L = _edge_len(B, key, par, edge_tris, triangles)
        lengths[key] = L
        if L > h:
            heap.append((-L, key))
    heapq.heapify(heap)
    seam_index = defaultdict(set)
    for ci, ch in enumerate(chains):
        for x, y in zip(ch[:-1], ch[1:]):
            seam_index[(min(x, y), max(x, y))].add(ci)
    next_tid = max(triangles, default=-1) + 1
    tol = h * (1 + 1e-12)

    def add_edge(key, par):
        edge_parent[key] = par
        L = _edge_len(B, key, par, edge_tris, triangles)
        lengths[key] = L
        if L > tol:
            heapq.heappush(heap, (-L, key))

    while heap:
        negL, key = heapq.heappop(heap)
        if key not in edge_parent or lengths[key] != -negL:
            continue
        a, b = key
        par = edge_parent.pop(key)
        del lengths[key]
        if par[0] == "edge":
            pe = par[1]
            e = B.X.edges[pe]

            def tp(v):
                vp = B.vparent[v]
                if vp[0] == "edge":
                    return vp[2]
                return 0.0 if vp[1] == e.u else e.length

            m = B.new_vertex(("edge", pe, 0.5 * (tp(a) + tp(b))))
        else:
            pf = par[1]
            m = B.new_vertex(("face", pf, chart_lerp(B.k, B.xy(a, pf), B.xy(b, pf), 0.5)))
        add_edge((a, m), par)
        add_edge((b, m) if b < m else (m, b), par)
        for t in sorted(edge_tris.pop(key, ())):
            x, y, z, pf = triangles.pop(t)
            for p, q in ((x, y), (y, z), (z, x)):
                edge_tris[(min(p, q), max(p, q))].discard(t)
            # rotate so the split edge is (x, y)
            while {x, y} != {a, b}:
                x, y, z = y, z, x
            for tri in ((x, m, z), (m, y, z)):
                triangles[next_tid] = (*tri, pf)
                for p, q in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                    edge_tris[(min(p, q), max(p, q))].add(next_tid)
                next_tid += 1
            ck = (min(z, m), max(z, m))
            if ck not in edge_parent:
                add_edge(ck, ("face", pf))
        for ci in sorted(seam_index.pop(key, ())):
            ch = chains[ci]
            i = 0
            while i < len(ch) - 1:
                if {ch[i], ch[i + 1]} == {a, b}:
                    ch.insert(i + 1, m)
                    i += 1
                i += 1
            seam_index[(min(a, m), max(a, m))].add(ci)
            seam_index[(min(b, m), max(b, m))].add(ci)


def _assemble(X, B, h, triangles, edge_parent, chains):
    k = X.kappa
    keys = sorted(edge_parent)
    eid = {key: i for i, key in enumerate(keys)}
    edges = [Edge(eid[key], key[0], key[1], _edge_len(B, key, edge_parent[key], None, None))
             for key in keys]
    faces = []
    face_parent = {}
    for new_id, t in enumerate(sorted(triangles)):
        a, b, c, pf = triangles[t]
        chart = (B.xy(a, pf), B.xy(b, pf), B.xy(c, pf))
        sides = (eid[(min(a, b), max(a, b))], eid[(min(b, c), max(b, c))], eid[(min(c, a), max(c, a))])
        faces.append(Face(new_id, (a, b, c), chart, sides))
        face_parent[new_id] = pf
    eparent = {eid[key]: edge_parent[key] for key in keys}
    S = SubdividedComplex(X, h, list(B.vparent), edges, faces, eparent, face_parent,
                          [list(c) for c in chains])
    return S
