"""Channel unfolding, the funnel algorithm, and shortest routes in links.

A channel is a sequence of triangles in which consecutive triangles share an
edge.  Unfolding places the whole channel in one model chart (triangles may
overlap there; the funnel only uses local orientation tests, so this is
harmless).  Chart geodesics are straight lines for every kappa <= 0 in use,
so the classic funnel algorithm applies verbatim.
"""

from __future__ import annotations

import heapq
import math
from collections import defaultdict

from .errors import CatkError
from .model import chart_angle, chart_dist, chart_lerp, orient, place_third

TWO_PI = 2.0 * math.pi


class ChannelError(CatkError):
    """Consecutive channel triangles do not share an edge."""


def shared_edge(S, t1, t2):
    a = S.faces[t1].corners
    b = S.faces[t2].corners
    common = [v for v in a if v in b]
    if len(common) != 2:
        raise ChannelError(f"triangles {t1} and {t2} do not share an edge")
    return common[0], common[1]


def unfold(S, tris):
    """Per-index maps vertex -> chart coords, all in one developed chart."""
    k = S.kappa
    f0 = S.faces[tris[0]]
    pos = [dict(zip(f0.corners, f0.chart))]
    for i in range(1, len(tris)):
        x, y = shared_edge(S, tris[i - 1], tris[i])
        prev = pos[-1]
        w = next(v for v in S.faces[tris[i - 1]].corners if v not in (x, y))
        z = next(v for v in S.faces[tris[i]].corners if v not in (x, y))
        X, Y, W = prev[x], prev[y], prev[w]
        side = -1 if orient(X, Y, W) > 0 else 1
        dxz = S.edges[S.edge_between(x, z)].length
        dyz = S.edges[S.edge_between(y, z)].length
        dxy = S.edges[S.edge_between(x, y)].length
        Z = place_third(k, X, Y, dxz, dyz, side, dab=dxy)
        pos.append({x: X, y: Y, z: Z})
    return pos


def mirrored(S, tri, p):
    f = S.faces[tri]
    a, b, c = (p[v] for v in f.corners)
    return orient(a, b, c) < 0


def place_point(S, tri, p, P):
    """Coordinates of S-point P (in the closure of tri) in the developed chart p."""
    k = S.kappa
    if P.kind == "vertex":
        return p[P.cell]
    if P.kind == "edge":
        e = S.edges[P.cell]
        return chart_lerp(k, p[e.u], p[e.v], P.t / e.length)
    f = S.faces[tri]
    own = S.point_chart(P, tri)
    c0, c1 = f.corners[0], f.corners[1]
    o0, o1 = f.chart[0], f.chart[1]
    side = 1 if orient(o0, o1, own) >= 0 else -1
    if mirrored(S, tri, p):
        side = -side
    return place_third(k, p[c0], p[c1], chart_dist(k, o0, own), chart_dist(k, o1, own), side,
                       dab=S.edges[f.sides[0]].length)


def _tag(P):
    return ("v", P.cell) if P.kind == "vertex" else None


def funnel(portals):
    """Simple stupid funnel algorithm.

    ``portals`` is a list of ``(left, right)`` where each side is
    ``(coords, tag)``; the first and last portals are degenerate (start, end).
    Returns the apex list as ``(coords, tag, portal_index)``.
    """

    def same(a, b):
        if a[1] is not None and a[1] == b[1]:
            return True
        return a[0] == b[0]

    apex = portals[0][0]
    apex_i = 0
    left, right = apex, apex
    li = ri = 0
    out = [(apex[0], apex[1], 0)]
    n = len(portals)
    i = 1
    guard = 0
    while i < n:
        guard += 1
        if guard > 50 * n * n + 1000:
            raise ChannelError("funnel did not terminate")
        pl, pr = portals[i]
        if not same(pr, apex) and orient(apex[0], right[0], pr[0]) >= 0:
            if same(apex, right) or same(apex, left) or orient(apex[0], left[0], pr[0]) < 0:
                right, ri = pr, i
            else:
                apex, apex_i = left, li
                out.append((apex[0], apex[1], apex_i))
                left = right = apex
                li = ri = apex_i
                i = apex_i + 1
                continue
        if not same(pl, apex) and orient(apex[0], left[0], pl[0]) <= 0:
            if same(apex, left) or same(apex, right) or orient(apex[0], right[0], pl[0]) > 0:
                left, li = pl, i
            else:
                apex, apex_i = right, ri
                out.append((apex[0], apex[1], apex_i))
                left = right = apex
                li = ri = apex_i
                i = apex_i + 1
                continue
        i += 1
    end = portals[-1][0]
    if not same(out[-1][:2], end):
        out.append((end[0], end[1], n - 1))
    return out


def _seg_cross(A, B, L, R):
    """Parameter along portal L->R where line A->B meets it."""
    d1 = orient(A, B, L)
    d2 = orient(A, B, R)
    den = d1 - d2
    if den == 0.0:
        return None
    return d1 / den


# ---------------------------------------------------------------------------
# links at a point, restricted to a region


def link_arcs(S, E, P):
    """Arcs ``(node_a, node_b, length, tri)`` of the region link at P.

    Offsets inside an arc are measured from node_a: the previous-corner edge
    at a vertex, the direction towards the edge's first endpoint on an edge,
    the direction towards corner 0 inside a face.
    """
    if P.kind == "face":
        return [("C", "C", TWO_PI, P.cell)]
    if P.kind == "edge":
        return [("U", "V", math.pi, t) for t in sorted(S.edge_faces[P.cell]) if t in E.faces]
    v = P.cell
    arcs = []
    for t in sorted(S.vertex_faces[v]):
        if t not in E.faces:
            continue
        f = S.faces[t]
        i = f.corners.index(v)
        arcs.append((f.sides[i - 1], f.sides[i], S.corner_angle(t, v), t))
    return arcs


def direction_offset(S, P, tri, p, Pxy, Dxy):
    """Offset inside the link arc of ``tri`` for the direction P -> D.

    ``p`` maps the triangle's corners to chart coordinates (own or developed).
    """
    k = S.kappa
    f = S.faces[tri]
    if P.kind == "vertex":
        i = f.corners.index(P.cell)
        return chart_angle(k, Pxy, p[f.corners[i - 1]], Dxy)
    if P.kind == "edge":
        return chart_angle(k, Pxy, p[S.edges[P.cell].u], Dxy)
    a = chart_angle(k, Pxy, p[f.corners[0]], Dxy)
    o = orient(Pxy, p[f.corners[0]], Dxy)
    if mirrored(S, tri, p):
        o = -o
    return a if o >= 0 else TWO_PI - a


def link_route(S, E, P, pos_in, pos_out):
    """Shortest route in the region link at P between two directions.

    Positions are ``(tri, offset)``.  Returns ``(length, tris)`` where tris is
    the sequence of triangles swept by the route (inf, [] if disconnected).
    """
    arcs = link_arcs(S, E, P)
    by_tri = {a[3]: a for a in arcs}
    t_in, off_in = pos_in
    t_out, off_out = pos_out
    if t_in not in by_tri or t_out not in by_tri:
        return math.inf, []
    adj = defaultdict(list)
    for a, b, w, t in arcs:
        adj[a].append((b, w, t))
        adj[b].append((a, w, t))
    ai, bi, wi, _ = by_tri[t_in]
    ao, bo, wo, _ = by_tri[t_out]
    best = (math.inf, [])
    if t_in == t_out:
        d = abs(off_in - off_out)
        if ai == bi:
            d = min(d, wi - d)
        best = (d, [t_in])
    starts = [(off_in, ai), (wi - off_in, bi)]
    ends = {}
    for d, node in ((off_out, ao), (wo - off_out, bo)):
        ends[node] = min(ends.get(node, math.inf), d)
    dist = {}
    prev = {}
    heap = []
    for d, node in starts:
        if d < dist.get(node, math.inf):
            dist[node] = d
            prev[node] = None
            heapq.heappush(heap, (d, _key(node), node))
    done = set()
    while heap:
        d, _, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, w, t in adj[x]:
            nd = d + w
            if nd < dist.get(y, math.inf) - 1e-15:
                dist[y] = nd
                prev[y] = (x, t)
                heapq.heappush(heap, (nd, _key(y), y))
    for node, d_end in sorted(ends.items(), key=lambda kv: _key(kv[0])):
        if node in dist and dist[node] + d_end < best[0] - 1e-15:
            seq = []
            x = node
            while prev[x] is not None:
                x, t = prev[x]
                seq.append(t)
            tris = [t_in] + seq[::-1] + [t_out]
            clean = [tris[0]]
            for t in tris[1:]:
                if t != clean[-1]:
                    clean.append(t)
            best = (dist[node] + d_end, clean)
    return best


def _key(node):
    return (0, node, "") if isinstance(node, int) else (1, 0, str(node))


def link_points_at(S, E, P, pos, target, tol=1e-9):
    """Link points at distance ``target`` from ``pos = (tri, offset)``.

    Returns sorted ``(tri, offset)`` pairs; empty when every direction of the
    region link at P is closer than ``target``.
    """
    arcs = link_arcs(S, E, P)
    by_tri = {a[3]: a for a in arcs}
    t_in, off_in = pos
    if t_in not in by_tri:
        return []
    adj = defaultdict(list)
    for a, b, w, t in arcs:
        adj[a].append((b, w))
        adj[b].append((a, w))
    ai, bi, wi, _ = by_tri[t_in]
    dist = {}
    heap = []
    for d, node in ((off_in, ai), (wi - off_in, bi)):
        if d < dist.get(node, math.inf):
            dist[node] = d
            heapq.heappush(heap, (d, _key(node), node))
    done = set()
    while heap:
        d, _, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, w in adj[x]:
            if d + w < dist.get(y, math.inf):
                dist[y] = d + w
                heapq.heappush(heap, (d + w, _key(y), y))
    out = []
    for a, b, w, t in arcs:
        da, db = dist.get(a, math.inf), dist.get(b, math.inf)

        def f(x):
            v = min(da + x, db + w - x)
            if t == t_in:
                d = abs(x - off_in)
                if a == b:
                    d = min(d, w - d)
                v = min(v, d)
            return v

        cands = {target - da, w - target + db}
        if t == t_in:
            cands |= {off_in + target, off_in - target}
        for x in sorted(cands):
            if -tol <= x <= w + tol:
                x = min(max(x, 0.0), w)
                if abs(f(x) - target) <= tol and not any(
                        tt == t and abs(xx - x) <= tol for tt, xx in out):
                    out.append((t, x))
    return sorted(out)
