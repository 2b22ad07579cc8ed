"""Locally-finite M_kappa-polyhedral 2-complexes.

A complex is a set of convex model polygons (faces) whose sides are glued
isometrically to shared edges.  Every face keeps its own chart: the chart
coordinates of its corners.  Gluings are implicit in the side -> edge
incidence: a side of length L is identified with an edge of length L, and
the parameter along the edge is the arclength from the edge's first endpoint.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

from . import model
from .errors import InvalidComplexError, InvalidFaceError, InvalidGluingError, LocationError
from .model import EPS, chart_angle, chart_dist, chart_lerp, check_kappa, orient

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int
    length: float


@dataclass(frozen=True)
class Face:
    """Convex polygon; side i runs from corners[i] to corners[i+1]."""

    id: int
    corners: tuple
    chart: tuple  # chart coordinates of the corners, same order
    sides: tuple  # edge ids, same order as the polygon sides


@dataclass(frozen=True)
class ComplexPoint:
    """A located point: a vertex, an edge plus arclength, or a face plus chart coords.

    Points are always canonical: a point on the boundary of a cell is stored
    against the lowest-dimensional cell containing it.
    """

    kind: str
    cell: int
    t: float | None = None
    xy: tuple | None = None

    @classmethod
    def vertex(cls, v):
        return cls("vertex", int(v))

    @classmethod
    def on_edge(cls, e, t):
        return cls("edge", int(e), float(t))

    @classmethod
    def in_face(cls, f, xy):
        return cls("face", int(f), None, (float(xy[0]), float(xy[1])))

    def to_json(self):
        d = {"kind": self.kind, "cell": self.cell}
        if self.t is not None:
            d["t"] = self.t
        if self.xy is not None:
            d["xy"] = list(self.xy)
        return d


class PolyhedralComplex:
    """Shared cell structure for input complexes and their subdivisions."""

    def __init__(self, kappa, vertices, edges, faces):
        self.kappa = check_kappa(kappa)
        self.vertices = list(vertices)
        self.edges = {e.id: e for e in edges}
        self.faces = {f.id: f for f in faces}
        self.vertex_edges = defaultdict(list)
        self.vertex_faces = defaultdict(list)
        self.edge_faces = defaultdict(list)
        for e in self.edges.values():
            self.vertex_edges[e.u].append(e.id)
            self.vertex_edges[e.v].append(e.id)
        for f in self.faces.values():
            for c in f.corners:
                self.vertex_faces[c].append(f.id)
            for s in f.sides:
                self.edge_faces[s].append(f.id)
        self._edge_key = {}
        for e in self.edges.values():
            self._edge_key[(min(e.u, e.v), max(e.u, e.v))] = e.id

    # -- incidence helpers -------------------------------------------------

    def edge_between(self, a, b):
        return self._edge_key.get((min(a, b), max(a, b)))

    def corner_index(self, face_id, v):
        return self.faces[face_id].corners.index(v)

    def vertex_chart(self, face_id, v):
        f = self.faces[face_id]
        return f.chart[f.corners.index(v)]

    def edge_chart(self, face_id, e_id):
        """Chart coordinates (in face_id) of edge e_id's endpoints u, v."""
        e = self.edges[e_id]
        return self.vertex_chart(face_id, e.u), self.vertex_chart(face_id, e.v)

    def point_faces(self, p: ComplexPoint):
        if p.kind == "vertex":
            return sorted(self.vertex_faces[p.cell])
        if p.kind == "edge":
            return sorted(self.edge_faces[p.cell])
        return [p.cell]

    def point_chart(self, p: ComplexPoint, face_id):
        """Chart coordinates of p in the chart of a face whose closure holds p."""
        if p.kind == "vertex":
            return self.vertex_chart(face_id, p.cell)
        if p.kind == "edge":
            a, b = self.edge_chart(face_id, p.cell)
            return chart_lerp(self.kappa, a, b, p.t / self.edges[p.cell].length)
        if p.cell != face_id:
            raise LocationError(f"point in face {p.cell} has no chart in face {face_id}")
        return p.xy

    def distance_in_face(self, face_id, p, q):
        return chart_dist(self.kappa, self.point_chart(p, face_id), self.point_chart(q, face_id))

    def corner_angle(self, face_id, v):
        f = self.faces[face_id]
        i = f.corners.index(v)
        n = len(f.corners)
        return chart_angle(self.kappa, f.chart[i], f.chart[(i + 1) % n], f.chart[i - 1])

    def face_area(self, face_id):
        """Area of a face; Gauss-Bonnet for kappa < 0."""
        f = self.faces[face_id]
        n = len(f.corners)
        if self.kappa == 0.0:
            s = 0.0
            for i in range(n):
                a, b = f.chart[i], f.chart[(i + 1) % n]
                s += a[0] * b[1] - a[1] * b[0]
            return abs(s) / 2.0
        excess = (n - 2) * math.pi - sum(self.corner_angle(face_id, v) for v in f.corners)
        return excess / (-self.kappa)

    def is_connected(self):
        if not self.vertices:
            return False
        adj = defaultdict(set)
        for e in self.edges.values():
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.vertices)

    def total_edge_length(self):
        return sum(e.length for e in self.edges.values())

    def total_area(self):
        return sum(self.face_area(f) for f in self.faces)

    # -- location ------------------------------------------------------------

    def canonical_face_point(self, face_id, xy, tol=None):
        """Canonicalise chart coordinates inside a face (snap to boundary)."""
        f = self.faces[face_id]
        n = len(f.corners)
        scale = max(max(abs(c[0]), abs(c[1])) for c in f.chart)
        tol = (EPS * max(1.0, scale)) if tol is None else tol
        for i in range(n):
            if math.hypot(xy[0] - f.chart[i][0], xy[1] - f.chart[i][1]) <= tol:
                return ComplexPoint.vertex(f.corners[i])
        sgn = 1.0 if orient(f.chart[0], f.chart[1], f.chart[2]) > 0 else -1.0
        for i in range(n):
            a, b = f.chart[i], f.chart[(i + 1) % n]
            L = math.hypot(b[0] - a[0], b[1] - a[1])
            o = sgn * orient(a, b, xy) / L
            if o < -tol:
                raise LocationError(f"point {xy} lies outside face {face_id}")
            if o <= tol:
                s = ((xy[0] - a[0]) * (b[0] - a[0]) + (xy[1] - a[1]) * (b[1] - a[1])) / (L * L)
                if -tol <= s * L and s * L <= L + tol:
                    e = self.edges[f.sides[i]]
                    proj = (a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]))
                    start = a if f.corners[i] == e.u else b
                    t = chart_dist(self.kappa, start, proj)
                    return ComplexPoint.on_edge(e.id, min(max(t, 0.0), e.length))
        return ComplexPoint.in_face(face_id, xy)

    def locate(self, raw) -> ComplexPoint:
        """Locate ``('face', id, coords) | ('edge', id, t) | ('vertex', id)``."""
        kind = raw[0]
        if kind == "vertex":
            if raw[1] not in self.vertex_faces and raw[1] not in self.vertex_edges:
                raise LocationError(f"unknown vertex {raw[1]}")
            return ComplexPoint.vertex(raw[1])
        if kind == "edge":
            e = self.edges.get(raw[1])
            if e is None:
                raise LocationError(f"unknown edge {raw[1]}")
            t = float(raw[2])
            tol = EPS * max(1.0, e.length)
            if t < -tol or t > e.length + tol:
                raise LocationError(f"parameter {t} outside edge {e.id} of length {e.length}")
            if t <= tol:
                return ComplexPoint.vertex(e.u)
            if t >= e.length - tol:
                return ComplexPoint.vertex(e.v)
            return ComplexPoint.on_edge(e.id, t)
        if kind == "face":
            if raw[1] not in self.faces:
                raise LocationError(f"unknown face {raw[1]}")
            coords = raw[2]
            if self.kappa != 0.0 and len(coords) == 3:
                coords = model.ModelPoint(self.kappa, coords).chart
            return self.canonical_face_point(raw[1], (float(coords[0]), float(coords[1])))
        raise LocationError(f"unknown location kind {kind!r}")


class Complex(PolyhedralComplex):
    """Validated input complex (faces are arbitrary convex polygons)."""

    def __init__(self, kappa, vertices, edges, faces, document=None):
        super().__init__(kappa, vertices, edges, faces)
        self.document = document
        self._validate()

    def _validate(self):
        k = self.kappa
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise InvalidComplexError("duplicate vertex ids")
        for e in self.edges.values():
            if e.u not in vset or e.v not in vset:
                raise InvalidComplexError(f"edge {e.id} references an unknown vertex")
            if e.u == e.v:
                raise InvalidComplexError(f"edge {e.id} is a loop")
            if not e.length > 0:
                raise InvalidComplexError(f"edge {e.id} has non-positive length")
        for f in self.faces.values():
            n = len(f.corners)
            if n < 3:
                raise InvalidFaceError(f"face {f.id} has fewer than three sides")
            if k != 0.0 and any(c[0] ** 2 + c[1] ** 2 >= 1.0 for c in f.chart):
                raise InvalidFaceError(f"face {f.id} has a corner at infinity")
            signs = []
            for i in range(n):
                o = orient(f.chart[i], f.chart[(i + 1) % n], f.chart[(i + 2) % n])
                scale = max(1e-300, chart_dist(0.0, f.chart[i], f.chart[(i + 1) % n])
                            * chart_dist(0.0, f.chart[(i + 1) % n], f.chart[(i + 2) % n]))
                signs.append(o / scale)
            if all(s > EPS for s in signs):
                pass
            elif all(s < -EPS for s in signs):
                pass
            else:
                raise InvalidFaceError(f"face {f.id} is not a strictly convex polygon")
            for i in range(n):
                e = self.edges.get(f.sides[i])
                if e is None:
                    raise InvalidComplexError(f"face {f.id} references unknown edge {f.sides[i]}")
                a, b = f.corners[i], f.corners[(i + 1) % n]
                if {a, b} != {e.u, e.v}:
                    raise InvalidGluingError(
                        f"face {f.id} side {i} endpoints {a},{b} do not match edge {e.id}")
                L = chart_dist(k, f.chart[i], f.chart[(i + 1) % n])
                if abs(L - e.length) > 1e-9 * max(1.0, e.length):
                    raise InvalidGluingError(
                        f"face {f.id} side {i} has length {L}, edge {e.id} has length {e.length}")
            if len(set(f.corners)) != n:
                raise InvalidFaceError(f"face {f.id} repeats a vertex")
        if not self.is_connected():
            raise InvalidComplexError("complex is not connected")


def build_complex(doc) -> Complex:
    """Build and validate a complex from its JSON description (dict or text).

    Schema: ``kappa``; ``vertices`` (ids); ``edges`` ({id, length, endpoints});
    ``faces`` ({id, polygon, sides: [{edge, reversed}]}).  A side that is not
    reversed runs from the edge's first endpoint to its second.
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    try:
        kappa = check_kappa(doc["kappa"])
        vertices = [int(v) for v in doc["vertices"]]
        edges = []
        for e in doc["edges"]:
            u, v = e["endpoints"]
            edges.append(Edge(int(e["id"]), int(u), int(v), float(e["length"])))
        emap = {e.id: e for e in edges}
        faces = []
        for f in doc["faces"]:
            poly = f["polygon"]
            sides = f["sides"]
            if len(poly) != len(sides):
                raise InvalidFaceError(f"face {f['id']}: polygon and side lists differ in length")
            chart = []
            for c in poly:
                if kappa == 0.0:
                    if len(c) != 2:
                        raise InvalidFaceError(f"face {f['id']}: Euclidean corners need 2 coordinates")
                    chart.append((float(c[0]), float(c[1])))
                else:
                    if len(c) != 3:
                        raise InvalidFaceError(f"face {f['id']}: hyperbolic corners need hyperboloid triples")
                    chart.append(model.ModelPoint(kappa, c).chart)
            corners = []
            for s in sides:
                e = emap.get(int(s["edge"]))
                if e is None:
                    raise InvalidComplexError(f"face {f['id']} references unknown edge {s['edge']}")
                corners.append(e.v if s.get("reversed", False) else e.u)
            faces.append(Face(int(f["id"]), tuple(corners), tuple(chart),
                              tuple(int(s["edge"]) for s in sides)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValueError) and "curvature" in str(exc):
            raise InvalidComplexError(str(exc)) from exc
        raise InvalidComplexError(f"malformed complex document: {exc!r}") from exc
    return Complex(kappa, vertices, edges, faces, document=doc)


def complex_document(X: PolyhedralComplex) -> dict:
    """Serialise a complex back to its JSON description."""
    faces = []
    for f in sorted(X.faces.values(), key=lambda f: f.id):
        n = len(f.corners)
        sides = []
        for i, s in enumerate(f.sides):
            e = X.edges[s]
            sides.append({"edge": s, "reversed": f.corners[i] != e.u})
        if X.kappa == 0.0:
            poly = [list(c) for c in f.chart]
        else:
            poly = [list(model.ModelPoint.from_chart(X.kappa, c).coords) for c in f.chart]
        faces.append({"id": f.id, "polygon": poly, "sides": sides})
        assert len(sides) == n
    return {
        "kappa": X.kappa,
        "vertices": sorted(X.vertices),
        "edges": [{"id": e.id, "length": e.length, "endpoints": [e.u, e.v]}
                  for e in sorted(X.edges.values(), key=lambda e: e.id)],
        "faces": faces,
    }


# ---------------------------------------------------------------------------
# links


@dataclass
class LinkGraph:
    """Metric graph of directions at a point.

    ``arcs`` holds ``(node_a, node_b, length, face_id)``; a face-interior point
    has a single node with one loop arc of length 2*pi.
    """

    base: ComplexPoint
    nodes: list
    arcs: list = field(default_factory=list)

    @property
    def total_length(self):
        return sum(a[2] for a in self.arcs)


def link_graph(X: PolyhedralComplex, p: ComplexPoint) -> LinkGraph:
    if p.kind == "face":
        return LinkGraph(p, [("face", p.cell)], [(("face", p.cell), ("face", p.cell), TWO_PI, p.cell)])
    if p.kind == "edge":
        nodes = [("dir", 0), ("dir", 1)]
        arcs = [(nodes[0], nodes[1], math.pi, f) for f in sorted(X.edge_faces[p.cell])]
        return LinkGraph(p, nodes, arcs)
    v = p.cell
    nodes = sorted(X.vertex_edges[v])
    arcs = []
    for fid in sorted(X.vertex_faces[v]):
        f = X.faces[fid]
        i = f.corners.index(v)
        e1 = f.sides[i]
        e0 = f.sides[i - 1]
        arcs.append((e0, e1, X.corner_angle(fid, v), fid))
    return LinkGraph(p, nodes, arcs)


def _shortest(adj, src, dst, skip):
    dist = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d, x = heapq.heappop(heap)
        if x == dst:
            return d
        if d > dist.get(x, math.inf):
            continue
        for y, w, idx in adj[x]:
            if idx == skip:
                continue
            nd = d + w
            if nd < dist.get(y, math.inf):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return math.inf


def link_girth(L: LinkGraph) -> float:
    """Length of the shortest injective cycle of a link (inf for a forest)."""
    adj = defaultdict(list)
    for idx, (a, b, w, _) in enumerate(L.arcs):
        adj[a].append((b, w, idx))
        adj[b].append((a, w, idx))
    best = math.inf
    for idx, (a, b, w, _) in enumerate(L.arcs):
        if a == b:
            best = min(best, w)
            continue
        best = min(best, w + _shortest(adj, a, b, idx))
    return best


@dataclass
class LinkConditionReport:
    girth: dict
    passed: bool
    min_girth: float

    def to_json(self):
        return {
            "passed": self.passed,
            "min_girth": None if math.isinf(self.min_girth) else self.min_girth,
            "girth": {str(k): (None if math.isinf(v) else v) for k, v in sorted(self.girth.items())},
        }


def check_link_condition(X: PolyhedralComplex, tol=1e-9) -> LinkConditionReport:
    girth = {}
    for v in sorted(X.vertices):
        girth[v] = link_girth(link_graph(X, ComplexPoint.vertex(v)))
    m = min(girth.values(), default=math.inf)
    return LinkConditionReport(girth, m >= TWO_PI - tol, m)


def polygon_document(kappa, chart_polygon):
    """Document for a single convex face given by chart coordinates."""
    kappa = check_kappa(kappa)
    n = len(chart_polygon)
    pts = [(float(x), float(y)) for x, y in chart_polygon]
    edges = []
    for i in range(n):
        edges.append({"id": i, "length": chart_dist(kappa, pts[i], pts[(i + 1) % n]),
                      "endpoints": [i, (i + 1) % n]})
    if kappa == 0.0:
        poly = [list(p) for p in pts]
    else:
        poly = [list(model.ModelPoint.from_chart(kappa, p).coords) for p in pts]
    return {
        "kappa": kappa,
        "vertices": list(range(n)),
        "edges": edges,
        "faces": [{"id": 0, "polygon": poly, "sides": [{"edge": i, "reversed": False} for i in range(n)]}],
    }
