"""Geodesics in X and in closed regions E under the induced path metric.

Two phases: a Steiner-graph shortest path gives a route and an upper bound;
straightening then replaces the route by the shortest path inside its
triangle channel (funnel algorithm on the unfolded channel) and removes every
vertex where the path turns by less than pi in the region link, by rerouting
the channel around the other side of that vertex.  The result is a local
geodesic of the region whose length never exceeds the graph length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .complex import ComplexPoint
from .errors import (
    ConvergenceError,
    InvalidSeedError,
    NoPathError,
    NotRectifiablyConnectedError,
    OutsideRegionError,
)
from .funnel import (
    _seg_cross,
    _tag,
    direction_offset,
    funnel,
    link_points_at,
    link_route,
    place_point,
    shared_edge,
    unfold,
)
from .model import chart_angle, chart_dist, chart_lerp, orient, point_at_angle
from .path import PiecewisePath, point_in_cell, single_point_path
from .region import Region
from .steiner import SteinerGraph

ANGLE_TOL = 1e-9


@dataclass
class GeodesicResult:
    path: PiecewisePath
    length: float
    history: list = field(default_factory=list)
    h_s: float = 0.0

    def to_json(self):
        return {"length": self.length, "history": list(self.history), "h_s": self.h_s,
                "path": self.path.to_json()}


# ---------------------------------------------------------------------------
# legs


def _tris_of(S, E, P):
    if P.kind == "vertex":
        src = S.vertex_faces[P.cell]
    elif P.kind == "edge":
        src = S.edge_faces[P.cell]
    else:
        src = [P.cell]
    return sorted(t for t in src if t in E.faces)


def _edges_of(S, E, P):
    if P.kind == "vertex":
        return sorted(e for e in S.vertex_edges[P.cell] if e in E.edges)
    if P.kind == "edge":
        return [P.cell] if P.cell in E.edges else []
    return []


def _legs(S, E, pts):
    """Split a route into channel legs and bare-edge legs."""
    legs = []
    cur = None
    for i in range(len(pts) - 1):
        A, B = pts[i], pts[i + 1]
        common = [t for t in _tris_of(S, E, A) if t in _tris_of(S, E, B)]
        if common:
            if cur is None:
                cur = {"kind": "channel", "start": A, "tris": [common[0]]}
                continue
            last = cur["tris"][-1]
            if last in common:
                continue
            T = common[0]
            if A.kind != "vertex":
                cur["tris"].append(T)
                continue
            prev_pt = pts[i - 1]
            pin = (last, direction_offset(S, A, last, _own(S, last), S.point_chart(A, last),
                                          S.point_chart(prev_pt, last)))
            pout = (T, direction_offset(S, A, T, _own(S, T), S.point_chart(A, T), S.point_chart(B, T)))
            d, route = link_route(S, E, A, pin, pout)
            if math.isfinite(d):
                cur["tris"].extend(route[1:])
            else:
                cur["end"] = A
                legs.append(cur)
                cur = {"kind": "channel", "start": A, "tris": [T]}
            continue
        ce = sorted(set(_edges_of(S, E, A)) & set(_edges_of(S, E, B)))
        if not ce:
            raise NoPathError(f"route step {A} -> {B} leaves the region")
        if cur is not None:
            cur["end"] = A
            legs.append(cur)
            cur = None
        if legs and legs[-1]["kind"] == "bare" and legs[-1]["edge"] == ce[0]:
            legs[-1]["end"] = B
        else:
            legs.append({"kind": "bare", "start": A, "end": B, "edge": ce[0]})
    if cur is not None:
        cur["end"] = pts[-1]
        legs.append(cur)
    return legs


def _own(S, t):
    f = S.faces[t]
    return dict(zip(f.corners, f.chart))


# ---------------------------------------------------------------------------
# channel straightening


def _on_shared(S, t1, t2, P):
    x, y = shared_edge(S, t1, t2)
    if P.kind == "vertex":
        return P.cell in (x, y)
    if P.kind == "edge":
        return P.cell == S.edge_between(x, y)
    return False


def _trim(S, tris, a, b):
    tris = list(tris)
    while len(tris) > 1 and _on_shared(S, tris[0], tris[1], a):
        tris.pop(0)
    while len(tris) > 1 and _on_shared(S, tris[-2], tris[-1], b):
        tris.pop()
    return tris


def _channel_path(S, tris, a, b):
    """Shortest path from a to b inside the channel; returns breakpoints.

    Breakpoints are ``(ComplexPoint, coords, is_vertex)``; all coordinates live
    in the developed chart of the channel.
    """
    k = S.kappa
    pos = unfold(S, tris)
    A = place_point(S, tris[0], pos[0], a)
    B = place_point(S, tris[-1], pos[-1], b)
    portals = [((A, _tag(a)), (A, _tag(a)))]
    for m in range(1, len(tris)):
        x, y = shared_edge(S, tris[m - 1], tris[m])
        p = pos[m - 1]
        w = next(v for v in S.faces[tris[m - 1]].corners if v not in (x, y))
        if orient_lr(p[x], p[y], p[w]):
            L, R = x, y
        else:
            L, R = y, x
        portals.append(((p[L], ("v", L)), (p[R], ("v", R))))
    portals.append(((B, _tag(b)), (B, _tag(b))))
    apexes = funnel(portals)
    bps = [(a, A, a.kind == "vertex", 0)]
    for (c0, t0, i0), (c1, t1, i1) in zip(apexes[:-1], apexes[1:]):
        for m in range(i0 + 1, i1):
            (Lc, Lt), (Rc, Rt) = portals[m]
            if Lt in (t0, t1) or Rt in (t0, t1):
                continue
            s = _seg_cross(c0, c1, Lc, Rc)
            if s is None:
                continue
            s = min(max(s, 0.0), 1.0)
            lv, rv = Lt[1], Rt[1]
            eid = S.edge_between(lv, rv)
            e = S.edges[eid]
            tol = 1e-10 * max(1.0, e.length)
            pm = pos[m - 1]
            X = (Lc[0] + s * (Rc[0] - Lc[0]), Lc[1] + s * (Rc[1] - Lc[1]))
            t = chart_dist(k, pm[e.u], X)
            if t <= tol:
                P = ComplexPoint.vertex(e.u)
            elif t >= e.length - tol:
                P = ComplexPoint.vertex(e.v)
            else:
                P = ComplexPoint.on_edge(eid, t)
            if P.kind == "vertex":
                X = pm[P.cell]
                if bps[-1][0] == P:
                    continue
            bps.append((P, X, P.kind == "vertex", m))
        if t1 is not None and t1[0] == "v" and i1 != len(portals) - 1:
            P = ComplexPoint.vertex(t1[1])
            if bps[-1][0] != P:
                bps.append((P, c1, True, i1))
    if bps[-1][0] != b or len(bps) == 1:
        bps.append((b, B, b.kind == "vertex", len(portals) - 1))
    return pos, bps


def orient_lr(X, Y, W):
    """True when (X, Y) is the (left, right) order as seen walking away from W."""
    return orient(X, Y, W) < 0


def _assign_cells(S, tris, bps):
    """Triangle index for each segment, searched monotonically along the channel."""
    out = []
    j = 0
    for (P, *_), (Q, *_) in zip(bps[:-1], bps[1:]):
        found = None
        for jj in range(j, len(tris)):
            cell = ("face", tris[jj])
            if point_in_cell(S, cell, P) and point_in_cell(S, cell, Q):
                found = jj
                break
        if found is None:
            for jj in range(len(tris)):
                cell = ("face", tris[jj])
                if point_in_cell(S, cell, P) and point_in_cell(S, cell, Q):
                    found = jj
                    break
        if found is None:
            raise NoPathError(f"no channel triangle holds the segment {P} -> {Q}")
        out.append(found)
        j = found
    return out


def straighten_channel(S, E, tris, a, b, max_rounds=500):
    """Shortest locally geodesic path from a to b, starting from a channel."""
    tris = _dedupe(tris)
    for _ in range(max_rounds):
        tris = _trim(S, tris, a, b)
        pos, bps = _channel_path(S, tris, a, b)
        idx = _assign_cells(S, tris, bps)
        changed = False
        for k in range(1, len(bps) - 1):
            P, Pc, is_v, _ = bps[k]
            if not is_v:
                continue
            j_in, j_out = idx[k - 1], idx[k]
            t_in, t_out = tris[j_in], tris[j_out]
            off_in = direction_offset(S, P, t_in, pos[j_in], Pc, bps[k - 1][1])
            off_out = direction_offset(S, P, t_out, pos[j_out], Pc, bps[k + 1][1])
            d, route = link_route(S, E, P, (t_in, off_in), (t_out, off_out))
            if d < math.pi - ANGLE_TOL:
                tris = _dedupe(tris[:j_in] + route + tris[j_out + 1:])
                changed = True
                break
        if not changed:
            break
    pts = [bp[0] for bp in bps]
    cells = [("face", tris[j]) for j in idx]
    return PiecewisePath.build(S, pts, cells)


def _dedupe(tris):
    """Drop repeats and erase loops; a shortest path never re-enters a triangle."""
    out = []
    seen = {}
    for t in tris:
        if t in seen:
            for u in out[seen[t] + 1:]:
                del seen[u]
            del out[seen[t] + 1:]
            continue
        seen[t] = len(out)
        out.append(t)
    return out


def straighten_points(S, E, pts, max_rounds=500):
    """Straighten a route given as a list of region points."""
    if len(pts) == 1:
        return single_point_path(S, pts[0])
    legs = _legs(S, E, pts)
    points, cells = [], []
    for leg in legs:
        if leg["kind"] == "bare":
            seg_pts = [leg["start"], leg["end"]]
            seg_cells = [("edge", leg["edge"])]
        else:
            p = straighten_channel(S, E, leg["tris"], leg["start"], leg["end"], max_rounds)
            seg_pts, seg_cells = list(p.points), list(p.cells)
        if points and points[-1] == seg_pts[0]:
            seg_pts = seg_pts[1:]
        points.extend(seg_pts)
        cells.extend(seg_cells)
    return PiecewisePath.build(S, points, cells)


def straighten(S, path, E=None, max_rounds=500):
    """Straighten an existing path; the result is never longer."""
    E = Region.all(S) if E is None else E
    out = straighten_points(S, E, list(path.points), max_rounds)
    return out if out.length <= path.length + 1e-12 else path


# ---------------------------------------------------------------------------
# geodesic drivers


def default_gap(S):
    return 1e-4 * complex_diameter(S.parent)


def complex_diameter(X):
    """Largest face diameter of the parent complex (a lower bound on diam X)."""
    best = 0.0
    for f in X.faces.values():
        for i in range(len(f.chart)):
            for j in range(i + 1, len(f.chart)):
                best = max(best, chart_dist(X.kappa, f.chart[i], f.chart[j]))
    for e in X.edges.values():
        best = max(best, e.length)
    return best


def _graph(S, E, h_s):
    key = ("steiner", round(h_s, 15))
    G = E.cache.get(key)
    if G is None:
        G = SteinerGraph(S, E, h_s)
        E.cache[key] = G
    return G


def _run(S, E, p, q, target_gap, min_rounds, max_rounds, h_s0, constrained, bound=None):
    if target_gap is None:
        target_gap = default_gap(S)
    if h_s0 is None:
        h_s0 = S.h / 2
    if constrained:
        for P in (p, q):
            if not E.contains(P):
                raise OutsideRegionError(f"point {P} is not in the region")
        conn = E.cache.get("connected")
        if conn is None:
            conn = _graph(S, E, h_s0).connected()
            E.cache["connected"] = conn
        if not conn:
            raise NotRectifiablyConnectedError("region is not rectifiably connected")
    best = None
    history = []
    for r in range(max_rounds):
        h_s = h_s0 / 2 ** r
        G = _graph(S, E, h_s)
        limit = math.inf if bound is None else bound + 4.0 * h_s
        pts, _ = G.shortest(p, q, limit)
        path = straighten_points(S, E, pts)
        if best is None or path.length < best.length:
            best = path
        history.append(best.length)
        if r + 1 >= min_rounds and history[-2] - history[-1] < target_gap:
            return GeodesicResult(best, best.length, history, h_s)
    raise ConvergenceError(
        f"geodesic did not converge in {max_rounds} rounds (history {history})",
        best=GeodesicResult(best, best.length, history, h_s0 / 2 ** (max_rounds - 1)))


def geodesic_X(S, p, q, target_gap=None, min_rounds=2, max_rounds=8, h_s0=None, bound=None):
    """Approximate X-geodesic between two subdivision points.

    ``bound`` is the length of any known path from p to q; it only narrows
    the graph search.
    """
    return _run(S, Region.all(S), p, q, target_gap, min_rounds, max_rounds, h_s0, False, bound)


def geodesic_Y(S, E, p, q, target_gap=None, min_rounds=2, max_rounds=8, h_s0=None, bound=None):
    """Approximate geodesic in the induced path metric of region E."""
    return _run(S, E, p, q, target_gap, min_rounds, max_rounds, h_s0, True, bound)


def shortest_path(G: SteinerGraph, s, t):
    """Graph-only shortest path (upper bound) as a PiecewisePath."""
    pts, _ = G.shortest(s, t)
    S, E = G.S, G.E
    if len(pts) == 1:
        return single_point_path(S, pts[0])
    cells = []
    for A, B in zip(pts[:-1], pts[1:]):
        common = [x for x in _tris_of(S, E, A) if x in _tris_of(S, E, B)]
        if common:
            cells.append(("face", common[0]))
        else:
            ce = sorted(set(_edges_of(S, E, A)) & set(_edges_of(S, E, B)))
            cells.append(("edge", ce[0]))
    return PiecewisePath.build(S, pts, cells)


# ---------------------------------------------------------------------------
# extension of geodesics to a curve


@dataclass
class ExtensionResult:
    path: PiecewisePath
    outcome: str  # "reached_curve", "exited", "stuck" or "budget"
    terminal: ComplexPoint

    @property
    def reached(self):
        return self.outcome == "reached_curve"

    def to_json(self):
        return {"outcome": self.outcome, "length": self.path.length,
                "terminal": self.path.S.to_parent(self.terminal).to_json()}


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _on_side(S, f, i, P):
    """Whether P lies on side i of face f (corners i and i+1)."""
    if P.kind == "vertex":
        return P.cell in (f.corners[i], f.corners[(i + 1) % 3])
    if P.kind == "edge":
        return P.cell == f.sides[i]
    return False


def _ray_exit(S, t, P, Pc, d):
    """First boundary point of triangle t hit by the chart ray Pc + s*d."""
    f = S.faces[t]
    C = f.chart
    best = None
    for i in range(3):
        if _on_side(S, f, i, P):
            continue
        a, b = C[i], C[(i + 1) % 3]
        ab = (b[0] - a[0], b[1] - a[1])
        den = _cross(d, ab)
        if abs(den) < 1e-300:
            continue
        ap = (a[0] - Pc[0], a[1] - Pc[1])
        s = _cross(ap, ab) / den
        u = _cross(ap, d) / den
        if s <= 0.0 or u < -1e-9 or u > 1 + 1e-9:
            continue
        if best is None or s < best[0]:
            best = (s, i, min(max(u, 0.0), 1.0))
    if best is None:
        raise NoPathError(f"ray leaves triangle {t} nowhere")
    s, i, u = best
    X = (Pc[0] + s * d[0], Pc[1] + s * d[1])
    e = S.edges[f.sides[i]]
    tol = 1e-10 * max(1.0, e.length)
    a, b = f.corners[i], f.corners[(i + 1) % 3]
    ta = chart_dist(S.kappa, C[i], X)
    tb = chart_dist(S.kappa, C[(i + 1) % 3], X)
    if ta <= tol:
        return ComplexPoint.vertex(a), C[i]
    if tb <= tol:
        return ComplexPoint.vertex(b), C[(i + 1) % 3]
    tt = ta if e.u == a else tb
    return ComplexPoint.on_edge(f.sides[i], tt), X


def _probe(S, t):
    return 0.25 * min(S.edges[e].length for e in S.faces[t].sides)


def _continue_edge(S, Q, t, Qc, Bc, face_ok):
    """Straight continuation across an edge point: (tri, chart, direction) list."""
    k = S.kappa
    e = S.edges[Q.cell]
    Uc = S.point_chart(ComplexPoint.vertex(e.u), t)
    theta = chart_angle(k, Qc, Uc, Bc)
    out = []
    for t2 in sorted(S.edge_faces[Q.cell], key=lambda x: (not face_ok(x), x)):
        if t2 == t:
            continue
        f2 = S.faces[t2]
        X2 = S.point_chart(Q, t2)
        U2 = S.point_chart(ComplexPoint.vertex(e.u), t2)
        W2 = next(f2.chart[i] for i, c in enumerate(f2.corners) if c not in (e.u, e.v))
        side = 1 if orient(X2, U2, W2) > 0 else -1
        D2 = point_at_angle(k, X2, U2, math.pi - theta, _probe(S, t2), side)
        out.append((t2, X2, (D2[0] - X2[0], D2[1] - X2[1])))
    return out


def _continue_vertex(S, Q, t, Qc, Bc, face_ok):
    k = S.kappa
    full = Region.all(S)
    off = direction_offset(S, Q, t, _own(S, t), Qc, Bc)
    pts = link_points_at(S, full, Q, (t, off), math.pi)
    pts.sort(key=lambda p: (not face_ok(p[0]), p[0], p[1]))
    out = []
    for t2, x in pts:
        f2 = S.faces[t2]
        i = f2.corners.index(Q.cell)
        V2 = f2.chart[i]
        prev, nxt = f2.chart[i - 1], f2.chart[(i + 1) % 3]
        side = 1 if orient(V2, prev, nxt) > 0 else -1
        D2 = point_at_angle(k, V2, prev, x, _probe(S, t2), side)
        out.append((t2, V2, (D2[0] - V2[0], D2[1] - V2[1])))
    return out


def march(S, points, cells, face_ok, stop, step=None, max_length=math.inf):
    """Continue a path straight beyond its end; returns (path, outcome).

    ``stop(Q)`` returns an outcome string to halt at point Q or None to go on.
    Straight continuation makes link angle exactly pi at edges and vertices;
    candidates are ordered by ``face_ok`` first, then by lowest triangle id.
    A continuation into a face failing ``face_ok`` ends with "exited"; no
    continuation ends with "stuck"; reaching ``max_length`` ends with "length".
    """
    k = S.kappa
    step = S.h if step is None else step
    points = list(points)
    cells = list(cells)
    A, Q = points[-2], points[-1]
    kind, cid = cells[-1]
    if kind == "face":
        t = cid
    else:
        t = sorted(S.edge_faces[cid], key=lambda x: (not face_ok(x), x))[0]
    Ac, Qc = S.point_chart(A, t), S.point_chart(Q, t)
    d = (Qc[0] - Ac[0], Qc[1] - Ac[1])
    travelled = 0.0
    guard = 0
    while True:
        guard += 1
        outcome = stop(Q)
        if outcome is not None:
            break
        if travelled >= max_length or guard > 10 ** 6:
            outcome = "length"
            break
        if Q.kind == "face":
            nxt = [(t, Qc, d)]
        elif Q.kind == "edge":
            nxt = _continue_edge(S, Q, t, Qc, Ac, face_ok)
        else:
            nxt = _continue_vertex(S, Q, t, Qc, Ac, face_ok)
        if not nxt:
            outcome = "stuck"
            break
        t, Qc0, d = nxt[0]
        if not face_ok(t):
            outcome = "exited"
            break
        R, Rc = _ray_exit(S, t, Q, Qc0, d)
        seg = chart_dist(k, Qc0, Rc)
        if travelled + seg > max_length:
            frac = (max_length - travelled) / seg
            Rc = chart_lerp(k, Qc0, Rc, frac)
            R = S.canonical_face_point(t, Rc, tol=1e-12)
            seg = max_length - travelled
        n = max(1, math.ceil(seg / step - 1e-12))
        for j in range(1, n):
            xy = chart_lerp(k, Qc0, Rc, j / n)
            points.append(S.canonical_face_point(t, xy, tol=1e-12))
            cells.append(("face", t))
        points.append(R)
        cells.append(("face", t))
        travelled += seg
        Ac, Q, Qc = Qc0, R, Rc
    return PiecewisePath.build(S, points, cells), outcome


def extend_to_length(S, path, length, step=None):
    """Straight continuation of a path in X until its total length is reached."""
    if path.length >= length:
        return path.sub_path(length)
    out, _ = march(S, path.points, path.cells, lambda t: True, lambda Q: None, step,
                   length - path.length)
    return out


def extend_geodesic(S, gamma, seed, step=None, classification=None, max_length=None):
    """Extend a geodesic seed beyond its end until it meets the curve.

    Interior faces are preferred at every branching, then the lowest triangle
    id.  Stops on the curve, on leaving the curve's closed interior, or where
    no straight continuation exists.
    """
    from .homology import curve_interior

    cls = curve_interior(S, gamma) if classification is None else classification
    if len(seed.points) < 2 or seed.length <= 0.0:
        raise InvalidSeedError("seed must be a path of positive length")
    for P in seed.points:
        if not cls.point_in(P):
            raise InvalidSeedError(f"seed point {P} is not in the interior of the curve")
    for kind, cid in seed.cells:
        if kind == "face" and cid not in cls.faces_in:
            raise InvalidSeedError(f"seed crosses face {cid} outside the interior")
    if max_length is None:
        max_length = 20.0 * complex_diameter(S.parent)

    def stop(Q):
        if gamma.contains_point(Q):
            return "reached_curve"
        if not cls.point_in(Q):
            return "exited"
        return None

    path, outcome = march(S, seed.points, seed.cells, lambda t: t in cls.faces_in, stop, step,
                          max_length)
    return ExtensionResult(path, outcome, path.points[-1])
