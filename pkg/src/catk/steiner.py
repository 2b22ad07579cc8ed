"""Steiner-point graphs whose shortest paths upper-bound geodesic distance."""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .complex import ComplexPoint
from .errors import EmptyRegionError, NoPathError
from .model import chart_dist, chart_dist_np, chart_lerp_np
from .region import Region


class SteinerGraph:
    """Nodes: every subdivision vertex, then Steiner points on region edges.

    Node ``v < len(S.vertices)`` is vertex v.  Arcs join nodes on a common
    region edge (consecutive only) and nodes of a region triangle that do not
    share a side.  The graph matrix reserves one extra slot for a query source.
    """

    def __init__(self, S, E: Region, h_s):
        if not h_s > 0:
            raise ValueError("Steiner spacing must be positive")
        self.S = S
        self.E = E
        self.h_s = h_s
        k = S.kappa
        nv = len(S.vertices)
        self.loc = [("vertex", v, None) for v in range(nv)]
        self.edge_nodes = {}
        for e_id in sorted(E.edges):
            e = S.edges[e_id]
            n = max(0, math.ceil(e.length / h_s - 1e-9) - 1)
            ids = [e.u]
            for i in range(1, n + 1):
                self.loc.append(("edge", e_id, e.length * i / (n + 1)))
                ids.append(len(self.loc) - 1)
            ids.append(e.v)
            self.edge_nodes[e_id] = ids
        N = len(self.loc)
        self.N = N
        rows, cols, w = [], [], []
        for e_id, ids in self.edge_nodes.items():
            step = S.edges[e_id].length / (len(ids) - 1)
            for a, b in zip(ids[:-1], ids[1:]):
                rows.append(a)
                cols.append(b)
                w.append(step)
        groups = {}
        for t in sorted(E.faces):
            f = S.faces[t]
            sides = []
            for i in range(3):
                ids = self.edge_nodes[f.sides[i]]
                sides.append(ids if ids[0] == f.corners[i] else ids[::-1])
            key = tuple(len(x) - 2 for x in sides)
            g = groups.setdefault(key, ([], []))
            g[0].append(sides[0][:-1] + sides[1][:-1] + sides[2][:-1])
            g[1].append(f.chart)
        extra_r, extra_c, extra_w = [], [], []
        for key, (tables, charts) in groups.items():
            table = np.array(tables, dtype=np.int64)
            C = np.array(charts, dtype=float)
            offs = [0, key[0] + 1, key[0] + key[1] + 2]
            coords = []
            for i in range(3):
                fr = np.arange(key[i] + 1) / (key[i] + 1)
                a = np.repeat(C[:, i][:, None, :], len(fr), axis=1)
                b = np.repeat(C[:, (i + 1) % 3][:, None, :], len(fr), axis=1)
                coords.append(chart_lerp_np(k, a, b, np.broadcast_to(fr, a.shape[:2])))
            coords = np.concatenate(coords, axis=1)
            pa_idx, pb_idx = [], []
            for i in range(3):
                j = (i + 1) % 3
                for y in range(1, key[j] + 1):
                    pa_idx.append(offs[i])
                    pb_idx.append(offs[j] + y)
                for jj in range(i + 1, 3):
                    for x in range(1, key[i] + 1):
                        for y in range(1, key[jj] + 1):
                            pa_idx.append(offs[i] + x)
                            pb_idx.append(offs[jj] + y)
            if not pa_idx:
                continue
            pa_idx = np.array(pa_idx)
            pb_idx = np.array(pb_idx)
            extra_r.append(table[:, pa_idx].ravel())
            extra_c.append(table[:, pb_idx].ravel())
            extra_w.append(chart_dist_np(k, coords[:, pa_idx].reshape(-1, 2),
                                         coords[:, pb_idx].reshape(-1, 2)))
        R0 = np.concatenate([np.array(rows, dtype=np.int64)] + extra_r)
        C0 = np.concatenate([np.array(cols, dtype=np.int64)] + extra_c)
        W0 = np.concatenate([np.array(w, dtype=float)] + extra_w)
        r = np.concatenate([R0, C0])
        c = np.concatenate([C0, R0])
        ww = np.concatenate([W0, W0])
        # keep the shortest of any duplicate arcs
        order = np.lexsort((ww, c, r))
        r, c, ww = r[order], c[order], ww[order]
        keep = np.ones(len(r), dtype=bool)
        keep[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        self.matrix = csr_matrix((ww[keep], (r[keep], c[keep])), shape=(N + 1, N + 1))
        self.n_arcs = int(keep.sum()) // 2

    # -- node geometry -------------------------------------------------------

    def node_point(self, n) -> ComplexPoint:
        kind, cell, t = self.loc[n]
        if kind == "vertex":
            return ComplexPoint.vertex(cell)
        return ComplexPoint.on_edge(cell, t)

    def node_faces(self, n):
        """Region triangles whose closure holds node n."""
        kind, cell, _ = self.loc[n]
        src = self.S.vertex_faces[cell] if kind == "vertex" else self.S.edge_faces[cell]
        return sorted(f for f in src if f in self.E.faces)

    def attachments(self, P: ComplexPoint):
        """(node, weight) pairs joining a region point to the graph."""
        S, E = self.S, self.E
        if P.kind == "vertex":
            return [(P.cell, 0.0)]
        out = {}
        if P.kind == "edge":
            e = S.edges[P.cell]
            ids = self.edge_nodes[P.cell]
            ts = [0.0 if n == e.u else e.length if n == e.v else self.loc[n][2] for n in ids]
            for n, t in zip(ids, ts):
                out[n] = abs(t - P.t)
            tris = [f for f in S.edge_faces[P.cell] if f in E.faces]
        else:
            tris = [P.cell]
        for t in tris:
            xy = S.point_chart(P, t)
            f = S.faces[t]
            for s in f.sides:
                for n in self.edge_nodes[s]:
                    if n in out:
                        continue
                    out[n] = chart_dist(S.kappa, xy, S.point_chart(self.node_point(n), t))
        return sorted(out.items())

    def _search(self, P, limit=math.inf):
        """Single-source distances from P; returns (root, dist, pred)."""
        src = self.attachments(P)
        N = self.N
        zero = [n for n, w in src if w == 0.0]
        if zero:
            root = zero[0]
            dist, pred = dijkstra(self.matrix, directed=True, indices=root,
                                  return_predecessors=True, limit=limit)
        else:
            root = N
            extra = csr_matrix(
                ([w for _, w in src], ([N] * len(src), [n for n, _ in src])), shape=(N + 1, N + 1))
            dist, pred = dijkstra(self.matrix + extra, directed=True, indices=N,
                                  return_predecessors=True, limit=limit)
        return root, dist, pred

    def distances_from(self, P, targets, limit=math.inf):
        """Graph distance upper bounds from P to each target point."""
        _, dist, _ = self._search(P, limit)
        out = []
        for Q in targets:
            if Q == P:
                out.append(0.0)
                continue
            d = min((dist[n] + w for n, w in self.attachments(Q)), default=math.inf)
            direct = self._direct(P, Q)
            out.append(min(d, direct) if direct is not None else d)
        return out

    def shortest(self, P: ComplexPoint, Q: ComplexPoint, limit=math.inf):
        """Shortest graph route P -> Q as a list of points plus its length.

        ``limit`` bounds the search radius; routes longer than it are retried
        without a bound.
        """
        if P == Q:
            return [P], 0.0
        root, dist, pred = self._search(P, limit)
        dst = self.attachments(Q)
        best, best_n = math.inf, None
        for n, w in dst:
            d = dist[n] + w
            if d < best:
                best, best_n = d, n
        direct = self._direct(P, Q)
        if direct is None and not math.isfinite(best) and math.isfinite(limit):
            return self.shortest(P, Q)
        N = self.N
        if direct is not None and direct <= best:
            return [P, Q], direct
        if best_n is None or not math.isfinite(best):
            raise NoPathError("target is not reachable in the Steiner graph")
        nodes = []
        n = best_n
        while n != root and n >= 0:
            nodes.append(n)
            n = pred[n]
        if root != N:
            nodes.append(root)
        nodes.reverse()
        pts = [P] + [self.node_point(n) for n in nodes] + [Q]
        out = [pts[0]]
        for x in pts[1:]:
            if x != out[-1]:
                out.append(x)
        return out, float(best)

    def _direct(self, P, Q):
        """Length of the straight segment P-Q if both lie in a common region cell."""
        S = self.S
        cands = self.point_tris(P)
        common = [t for t in cands if t in self.point_tris(Q)]
        if common:
            t = common[0]
            return chart_dist(S.kappa, S.point_chart(P, t), S.point_chart(Q, t))
        eP, eQ = self.point_edges(P), self.point_edges(Q)
        ce = sorted(set(eP) & set(eQ))
        if ce:
            e = S.edges[ce[0]]

            def t_of(R):
                return R.t if R.kind == "edge" else (0.0 if R.cell == e.u else e.length)

            return abs(t_of(P) - t_of(Q))
        return None

    def point_tris(self, P):
        S, E = self.S, self.E
        if P.kind == "vertex":
            src = S.vertex_faces[P.cell]
        elif P.kind == "edge":
            src = S.edge_faces[P.cell]
        else:
            src = [P.cell]
        return sorted(f for f in src if f in E.faces)

    def point_edges(self, P):
        S, E = self.S, self.E
        if P.kind == "vertex":
            return sorted(e for e in S.vertex_edges[P.cell] if e in E.edges)
        if P.kind == "edge":
            return [P.cell] if P.cell in E.edges else []
        return []

    def connected(self):
        """Whether every region vertex is reachable from the first one."""
        from scipy.sparse.csgraph import connected_components

        _, labels = connected_components(self.matrix, directed=False)
        vs = sorted(self.E.vertices)
        return len({labels[v] for v in vs}) == 1


def steiner_graph(S, E=None, h_s=None):
    if E is None:
        E = Region.all(S)
    if not E.vertices:
        raise EmptyRegionError("cannot build a graph on an empty region")
    return SteinerGraph(S, E, S.h / 2 if h_s is None else h_s)
