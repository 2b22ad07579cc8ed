"""Piecewise-geodesic paths through the cells of a subdivided complex."""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .model import chart_dist, chart_lerp


def segment_length(S, cell, P, Q):
    kind, cid = cell
    if kind == "edge":
        return abs(_edge_t(S, cid, P) - _edge_t(S, cid, Q))
    return chart_dist(S.kappa, S.point_chart(P, cid), S.point_chart(Q, cid))


def _edge_t(S, e_id, P):
    e = S.edges[e_id]
    if P.kind == "edge":
        return P.t
    return 0.0 if P.cell == e.u else e.length


def point_in_cell(S, cell, P):
    """Whether P lies in the closure of the cell ``('face'|'edge', id)``."""
    kind, cid = cell
    if kind == "edge":
        e = S.edges[cid]
        return (P.kind == "edge" and P.cell == cid) or (P.kind == "vertex" and P.cell in (e.u, e.v))
    f = S.faces[cid]
    if P.kind == "vertex":
        return P.cell in f.corners
    if P.kind == "edge":
        return P.cell in f.sides
    return P.cell == cid


@dataclass(frozen=True)
class PiecewisePath:
    """Breakpoints in S with one closed cell per segment."""

    S: object
    points: tuple
    cells: tuple
    seg_lengths: tuple

    @classmethod
    def build(cls, S, points, cells):
        points = tuple(points)
        cells = tuple(cells)
        lens = tuple(segment_length(S, c, P, Q) for c, P, Q in zip(cells, points[:-1], points[1:]))
        return cls(S, points, cells, lens)

    @property
    def length(self):
        return float(sum(self.seg_lengths))

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def reversed(self):
        return PiecewisePath(self.S, self.points[::-1], self.cells[::-1], self.seg_lengths[::-1])

    def _cum(self):
        out = [0.0]
        for L in self.seg_lengths:
            out.append(out[-1] + L)
        return out

    def point_at(self, s):
        """Point at arclength s from the start (clamped to the path)."""
        cum = self._cum()
        if s <= 0 or len(self.points) == 1:
            return self.points[0]
        if s >= cum[-1]:
            return self.points[-1]
        i = min(bisect.bisect_right(cum, s) - 1, len(self.seg_lengths) - 1)
        while i < len(self.seg_lengths) - 1 and self.seg_lengths[i] == 0.0:
            i += 1
        L = self.seg_lengths[i]
        frac = (s - cum[i]) / L if L > 0 else 0.0
        return self._interp(i, frac)

    def _interp(self, i, frac):
        S = self.S
        kind, cid = self.cells[i]
        P, Q = self.points[i], self.points[i + 1]
        if kind == "edge":
            t = _edge_t(S, cid, P) + frac * (_edge_t(S, cid, Q) - _edge_t(S, cid, P))
            return S.locate(("edge", cid, t))
        xy = chart_lerp(S.kappa, S.point_chart(P, cid), S.point_chart(Q, cid), frac)
        return S.canonical_face_point(cid, xy, tol=1e-12)

    def sub_path(self, s):
        """Initial piece of arclength s."""
        cum = self._cum()
        if s >= cum[-1]:
            return self
        pts = [self.points[0]]
        cells = []
        for i, L in enumerate(self.seg_lengths):
            if cum[i + 1] < s:
                pts.append(self.points[i + 1])
                cells.append(self.cells[i])
                continue
            frac = (s - cum[i]) / L if L > 0 else 0.0
            pts.append(self._interp(i, frac))
            cells.append(self.cells[i])
            break
        return PiecewisePath.build(self.S, pts, cells)

    def samples(self, spacing):
        """Breakpoints plus points every ``spacing`` of arclength."""
        out = list(self.points)
        L = self.length
        if spacing > 0 and L > 0:
            n = int(L // spacing)
            out.extend(self.point_at(k * spacing) for k in range(1, n + 1))
        return out

    def parent_points(self):
        return [self.S.to_parent(P) for P in self.points]

    def is_valid(self, tol=1e-9):
        for c, P, Q in zip(self.cells, self.points[:-1], self.points[1:]):
            if not (point_in_cell(self.S, c, P) and point_in_cell(self.S, c, Q)):
                return False
        return True

    def to_json(self):
        return {
            "length": self.length,
            "points": [p.to_json() for p in self.parent_points()],
        }


def single_point_path(S, P):
    return PiecewisePath(S, (P,), (), ())

