"""Closed subsets of a subdivided complex, as unions of closed cells."""

from __future__ import annotations

from dataclasses import dataclass, field

from .complex import ComplexPoint
from .errors import EmptyRegionError


@dataclass(frozen=True)
class Region:
    """A closed union of cells of a SubdividedComplex (closed under faces)."""

    S: object
    faces: frozenset
    edges: frozenset
    vertices: frozenset
    cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def closure(cls, S, faces=(), edges=(), vertices=()):
        F = frozenset(int(f) for f in faces)
        E = set(int(e) for e in edges)
        for f in F:
            E.update(S.faces[f].sides)
        V = set(int(v) for v in vertices)
        for e in E:
            V.add(S.edges[e].u)
            V.add(S.edges[e].v)
        if not F and not E and not V:
            raise EmptyRegionError("region has no cells")
        return cls(S, F, frozenset(E), frozenset(V))

    @classmethod
    def all(cls, S):
        R = getattr(S, "_full_region", None)
        if R is None:
            R = cls.closure(S, S.faces.keys(), S.edges.keys(), S.vertices)
            S._full_region = R
        return R

    @property
    def is_all(self):
        return len(self.faces) == len(self.S.faces) and len(self.edges) == len(self.S.edges)

    def is_closed(self):
        S = self.S
        return all(e in self.edges for f in self.faces for e in S.faces[f].sides) and all(
            S.edges[e].u in self.vertices and S.edges[e].v in self.vertices for e in self.edges)

    def contains(self, p: ComplexPoint) -> bool:
        if p.kind == "vertex":
            return p.cell in self.vertices
        if p.kind == "edge":
            return p.cell in self.edges
        return p.cell in self.faces

    def contains_parent(self, p: ComplexPoint) -> bool:
        return self.contains(self.S.from_parent(p))

    def bare_edges(self):
        """Edges of the region that bound no face of the region."""
        S = self.S
        return sorted(e for e in self.edges if not any(f in self.faces for f in S.edge_faces[e]))

    def summary(self):
        return {"faces": len(self.faces), "edges": len(self.edges), "vertices": len(self.vertices)}


def point_in_polygon(xy, poly):
    """Strict interior test by ray casting (chart coordinates)."""
    x, y = xy
    inside = False
    n = len(poly)
    for i in range(n):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xc > x:
                inside = not inside
    return inside


def carve(S, holes):
    """Region of all triangles outside the given open polygons.

    ``holes`` is a list of ``(parent_face, chart_polygon)``; the polygon
    boundaries must already be seams of S so every triangle is either inside
    or outside.
    """
    excluded = set()
    for pf, poly in holes:
        for t in S.triangles_of_parent(pf):
            c = S.faces[t].chart
            cen = ((c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0)
            if point_in_polygon(cen, poly):
                excluded.add(t)
    keep = [t for t in sorted(S.faces) if t not in excluded]
    return Region.closure(S, keep)
