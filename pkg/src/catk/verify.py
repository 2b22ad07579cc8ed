"""Numerical checks of the comparison geometry of regions.

All distances measured here are upper bounds (computed geodesics), so an
inequality ``d_Y <= comparison + tol`` that passes is a conservative pass.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .complex import ComplexPoint
from .errors import ConvergenceError, InvalidCurveError, InvalidTriangleError
from .funnel import direction_offset, link_route
from .geodesic import (
    _graph,
    _own,
    complex_diameter,
    default_gap,
    extend_to_length,
    geodesic_X,
    geodesic_Y,
    march,
)
from .homology import CycleCurve, curve_interior
from .model import chart_angle, comparison_angle
from .region import Region

# ---------------------------------------------------------------------------
# tolerances


@dataclass(frozen=True)
class Tolerances:
    """Verification tolerances; all lengths in the complex's units."""

    target_gap: float
    tol_geo: float
    tol_cat: float
    angle_floor: float = 0.02
    angle_const: float = 0.01
    min_scale: float = 0.0

    @classmethod
    def defaults(cls, S, **overrides):
        gap = overrides.pop("target_gap", None) or default_gap(S)
        vals = {"target_gap": gap, "tol_geo": 10.0 * gap, "tol_cat": 5.0 * gap,
                "min_scale": 1e-3 * complex_diameter(S.parent)}
        vals.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**vals)

    def tol_angle(self, h, eps):
        return max(self.angle_floor, self.angle_const * h / eps)

    def to_json(self):
        return {"target_gap": self.target_gap, "tol_geo": self.tol_geo, "tol_cat": self.tol_cat,
                "angle_floor": self.angle_floor, "angle_const": self.angle_const,
                "min_scale": self.min_scale}


def _geo_Y(S, E, p, q, tol, bound=None):
    try:
        return geodesic_Y(S, E, p, q, target_gap=tol.target_gap, bound=bound)
    except ConvergenceError as err:
        return err.best


def _geo_X(S, p, q, tol, bound=None):
    try:
        return geodesic_X(S, p, q, target_gap=tol.target_gap, bound=bound)
    except ConvergenceError as err:
        return err.best


def _pj(S, P):
    return S.to_parent(P).to_json()


def _decrement(res):
    h = res.history
    return max(0.0, h[-2] - h[-1]) if len(h) >= 2 else 0.0


# ---------------------------------------------------------------------------
# sampling


def random_point(S, E, rng):
    """Random point of a region: area-weighted face, uniform barycentric."""
    key = "sampling"
    data = E.cache.get(key)
    if data is None:
        faces = sorted(E.faces)
        if faces:
            w = np.array([S.face_area(f) for f in faces])
        else:
            faces = sorted(E.edges)
            w = np.array([S.edges[e].length for e in faces])
        data = (faces, w / w.sum(), bool(E.faces))
        E.cache[key] = data
    cells, prob, has_faces = data
    c = cells[int(rng.choice(len(cells), p=prob))]
    if not has_faces:
        return S.locate(("edge", c, float(rng.uniform(0.0, S.edges[c].length))))
    r1, r2 = rng.random(), rng.random()
    s = math.sqrt(r1)
    w = (1.0 - s, s * (1.0 - r2), s * r2)
    ch = S.faces[c].chart
    xy = (sum(w[i] * ch[i][0] for i in range(3)), sum(w[i] * ch[i][1] for i in range(3)))
    return S.canonical_face_point(c, xy, tol=1e-12)


def _triple_rng(seed, i):
    return np.random.default_rng([int(seed), int(i)])


# ---------------------------------------------------------------------------
# triangles and angles


@dataclass
class TriangleSample:
    p: ComplexPoint
    q: ComplexPoint
    r: ComplexPoint
    pq: object
    pr: object
    qr: object

    @property
    def a(self):
        return self.pq.length

    @property
    def b(self):
        return self.pr.length

    @property
    def c(self):
        return self.qr.length

    def side_from(self, vertex):
        """The two sides leaving a vertex ('p', 'q' or 'r') as paths."""
        if vertex == "p":
            return self.pq.path, self.pr.path
        if vertex == "q":
            return self.pq.path.reversed(), self.qr.path
        return self.pr.path.reversed(), self.qr.path.reversed()

    def to_json(self, S):
        return {"p": _pj(S, self.p), "q": _pj(S, self.q), "r": _pj(S, self.r),
                "sides": [self.a, self.b, self.c]}


def triangle_sample(S, E, p, q, r, tol):
    pq = _geo_Y(S, E, p, q, tol)
    pr = _geo_Y(S, E, p, r, tol)
    qr = _geo_Y(S, E, q, r, tol)
    return TriangleSample(p, q, r, pq, pr, qr)


@dataclass
class AngleEstimate:
    scales: list
    angles: list
    estimate: float
    residual: float
    warnings: list = field(default_factory=list)

    def to_json(self):
        return {"scales": self.scales, "angles": self.angles, "estimate": self.estimate,
                "residual": self.residual, "warnings": list(self.warnings)}


def alexandrov_angle_Y(S, E, side1, side2, tol, eps=None, depth=6):
    """Small-scale comparison angles between two paths leaving one point.

    Scales are eps * 2**-k; the ladder stops at ``tol.min_scale``.  The
    estimate is the deepest value; the residual is the last change.
    """
    L = min(side1.length, side2.length)
    if L <= 0.0:
        raise InvalidTriangleError("angle needs two sides of positive length")
    eps = 0.5 * L if eps is None else min(eps, L)
    scales, angles, notes = [], [], []
    for k in range(depth + 1):
        t = eps * 2.0 ** -k
        if t < tol.min_scale and scales:
            notes.append(f"ladder clipped at scale {scales[-1]:.6g}")
            break
        x, y = side1.point_at(t), side2.point_at(t)
        d = 0.0 if x == y else min(_geo_Y(S, E, x, y, tol, bound=2 * t).length, 2 * t)
        angles.append(comparison_angle(0.0, t, t, d))
        scales.append(t)
    for n in notes:
        warnings.warn(n, stacklevel=2)
    res = abs(angles[-1] - angles[-2]) if len(angles) > 1 else 0.0
    return AngleEstimate(scales, angles, angles[-1], res, notes)


def _chord(kappa, s1, s2, gamma):
    """Distance between points at distances s1, s2 along rays at angle gamma."""
    sg = math.sin(0.5 * gamma) ** 2
    if kappa == 0.0:
        return math.sqrt(max((s1 - s2) ** 2 + 4.0 * s1 * s2 * sg, 0.0))
    R = 1.0 / math.sqrt(-kappa)
    u = math.sinh((s1 - s2) / (2 * R)) ** 2 + math.sinh(s1 / R) * math.sinh(s2 / R) * sg
    return 2.0 * R * math.asinh(math.sqrt(max(u, 0.0)))


def _cmp_angle(kappa, a, b, c):
    c = min(max(c, abs(a - b)), a + b)
    return comparison_angle(kappa, a, b, c)


@dataclass
class MarginReport:
    checks: list = field(default_factory=list)
    seed: int | None = None
    incomplete: bool = False
    notes: list = field(default_factory=list)

    @property
    def violations(self):
        return [c for c in self.checks if c["violation"]]

    @property
    def min_margin(self):
        return min((c["margin"] for c in self.checks), default=None)

    def to_json(self):
        return {"checks": len(self.checks), "min_margin": self.min_margin,
                "violations": self.violations, "flipped": [c for c in self.checks if c.get("flipped")],
                "seed": self.seed, "incomplete": self.incomplete, "notes": list(self.notes)}


def _record(kind, witnesses, measured, comparison, tol, tight=None):
    margin = comparison - measured
    rec = {"kind": kind, "witnesses": witnesses, "measured": measured,
           "comparison": comparison, "margin": margin, "violation": margin < -tol}
    if tight is not None:
        tm = tight - measured
        rec["tight_margin"] = tm
        rec["flipped"] = (tm < -tol) != (margin < -tol)
    return rec


def cat_triangle_test(S, E, T: TriangleSample, tol, m=4, angle_depth=6):
    """Comparison inequality and vertex-angle checks for one triangle."""
    k = S.kappa
    rep = MarginReport()
    a, b, c = T.a, T.b, T.c
    if min(a, b, c) <= 0.0:
        rep.notes.append("degenerate triangle skipped")
        return rep
    da, db, dc = _decrement(T.pq), _decrement(T.pr), _decrement(T.qr)
    tight = (max(a - da, 0.0), max(b - db, 0.0), max(c - dc, 0.0))
    # (vertex, sides from it, lengths of those sides, opposite side)
    corners = [("p", a, b, c, tight[0], tight[1], tight[2]),
               ("q", a, c, b, tight[0], tight[2], tight[1]),
               ("r", b, c, a, tight[1], tight[2], tight[0])]
    for name, s1, s2, opp, t1, t2, t3 in corners:
        g = _cmp_angle(k, s1, s2, opp)
        gt = _cmp_angle(k, t1, t2, t3) if min(t1, t2) > 0 else g
        side1, side2 = T.side_from(name)
        fracs = [(j + 1) / (m + 1) for j in range(m)] if name == "p" else [0.5]
        for f in fracs:
            x, y = side1.point_at(f * s1), side2.point_at(f * s2)
            meas = 0.0 if x == y else _geo_Y(S, E, x, y, tol, bound=f * (s1 + s2)).length
            comp = _chord(k, f * s1, f * s2, g)
            comp_t = _chord(k, f * t1, f * t2, gt)
            rep.checks.append(_record("distance", [_pj(S, x), _pj(S, y)], meas, comp, tol.tol_cat,
                                      comp_t))
        est = alexandrov_angle_Y(S, E, side1, side2, tol, depth=angle_depth)
        tol_a = tol.tol_angle(S.h, est.scales[0])
        rec = _record("angle", [_pj(S, getattr(T, name))], est.estimate, g, tol_a, gt)
        rec["residual"] = est.residual
        rep.checks.append(rec)
    return rep


def cat_sweep(S, E, n, seed, tol, budget=None, m=4):
    """Seeded random triangles; each triple draws from its own RNG stream."""
    rep = MarginReport(seed=seed)
    start = time.monotonic()
    tris = []
    for i in range(n):
        if budget is not None and time.monotonic() - start > budget:
            rep.incomplete = True
            rep.notes.append(f"budget exhausted after {i} triangles")
            break
        rng = _triple_rng(seed, i)
        p, q, r = (random_point(S, E, rng) for _ in range(3))
        if len({p, q, r}) < 3:
            continue
        T = triangle_sample(S, E, p, q, r, tol)
        sub = cat_triangle_test(S, E, T, tol, m)
        for ch in sub.checks:
            ch["triangle"] = i
        rep.checks.extend(sub.checks)
        tris.append({"index": i, **T.to_json(S), "min_margin": sub.min_margin,
                     "violations": len(sub.violations)})
    rep.notes.append(f"{len(tris)} triangles tested")
    rep.triangles = tris
    return rep


# ---------------------------------------------------------------------------
# convexity


def convexity_check(S, E, n_pairs, seed, tol):
    """Y-geodesics between points of an X-ball stay in the slightly larger ball."""
    rep = MarginReport(seed=seed)
    full = Region.all(S)
    G = _graph(S, full, S.h / 2)
    for i in range(n_pairs):
        rng = _triple_rng(seed, 10 ** 6 + i)
        x, y = random_point(S, E, rng), random_point(S, E, rng)
        if x == y:
            continue
        gx = _geo_X(S, x, y, tol)
        L = gx.length
        mid = gx.path.point_at(0.5 * L)
        r = 0.5 * L
        gy = _geo_Y(S, E, x, y, tol)
        pts = list(gy.path.points)
        ub = G.distances_from(mid, pts)
        worst = None
        for z, u in zip(pts, ub):
            d = u
            if u > r + tol.tol_geo:
                d = _geo_X(S, mid, z, tol, bound=u).length
            if worst is None or d > worst[0]:
                worst = (d, z)
        rec = _record("ball", [_pj(S, x), _pj(S, y), _pj(S, worst[1])], worst[0], r, tol.tol_geo)
        rec["pair"] = i
        rep.checks.append(rec)
    return rep


# ---------------------------------------------------------------------------
# limit segments


def x_angle(S, p, path1, path2):
    """Angle in X between two paths at their common start p."""
    full = Region.all(S)
    pos = []
    for path in (path1, path2):
        kind, cid = path.cells[0]
        nxt = next(P for P in path.points[1:] if P != p)
        if kind == "face":
            t = cid
        else:
            t = sorted(S.edge_faces[cid])[0]
        own = _own(S, t)
        pc = S.point_chart(p, t)
        pos.append((t, direction_offset(S, p, t, own, pc, S.point_chart(nxt, t))))
    if p.kind == "face":
        t = p.cell
        return chart_angle(S.kappa, S.point_chart(p, t), S.point_chart(path1.points[1], t),
                           S.point_chart(path2.points[1], t))
    d, _ = link_route(S, full, p, pos[0], pos[1])
    return min(d, math.pi)


def _hausdorff_ends(S, R1, R2, tol):
    """Geodesics from a common point: sup distance is attained at the ends."""
    if R1.end == R2.end:
        return 0.0
    return _geo_X(S, R1.end, R2.end, tol, bound=R1.length + R2.length).length


def _closed_seam(S, T: TriangleSample):
    pts = []
    for path in (T.pq.path, T.qr.path, T.pr.path.reversed()):
        pp = path.parent_points()
        if pts and pts[-1] == pp[0]:
            pp = pp[1:]
        pts.extend(pp)
    if pts[-1] != pts[0]:
        pts.append(pts[0])
    return pts


def _near_curve(S2, gamma, P, tol):
    """Whether a point of S2 lies within tol of the curve (chart distance)."""
    if gamma.contains_point(P):
        return True
    for f in S2.point_faces(P):
        face = S2.faces[f]
        xy = S2.point_chart(P, f)
        for i, e in enumerate(face.sides):
            if e not in gamma.edge_set:
                continue
            a, b = face.chart[i], face.chart[(i + 1) % 3]
            L = math.hypot(b[0] - a[0], b[1] - a[1])
            s = ((xy[0] - a[0]) * (b[0] - a[0]) + (xy[1] - a[1]) * (b[1] - a[1])) / (L * L)
            s = min(max(s, 0.0), 1.0)
            if math.hypot(xy[0] - a[0] - s * (b[0] - a[0]), xy[1] - a[1] - s * (b[1] - a[1])) <= tol:
                return True
    return False


@dataclass
class LimitSegmentReport:
    angle_x: float
    angle_y: AngleEstimate
    tol_angle: float
    cauchy: dict
    contained: dict
    extension: dict
    eps: float
    witnesses: dict

    @property
    def angle_ok(self):
        return abs(self.angle_x - self.angle_y.estimate) <= self.tol_angle

    @property
    def passed(self):
        return (self.angle_ok and all(self.contained.values())
                and all(e["reached"] for e in self.extension.values())
                and all(c["cauchy"] for c in self.cauchy.values()))

    def to_json(self):
        return {"angle_x": self.angle_x, "angle_y": self.angle_y.to_json(),
                "difference": abs(self.angle_x - self.angle_y.estimate),
                "tol_angle": self.tol_angle, "angle_ok": self.angle_ok, "cauchy": self.cauchy,
                "contained": self.contained, "extension": self.extension, "eps": self.eps,
                "witnesses": self.witnesses, "passed": self.passed}


def limit_segments(S, E, p, q, r, tol, eps=None, depth=5, T=None):
    """Limit segments at p of the Y-triangle (p, q, r) and the angle identity."""
    from .subdivide import subdivide

    T = triangle_sample(S, E, p, q, r, tol) if T is None else T
    if min(T.a, T.b, T.c) <= 0.0:
        raise InvalidTriangleError("triangle has a degenerate side")
    try:
        S2 = subdivide(S.parent, S.h, seams=[_closed_seam(S, T)])
        gamma = CycleCurve.from_vertices(S2, S2.seams[0])
    except InvalidCurveError as err:
        raise InvalidTriangleError(f"triangle is not simple: {err}") from err
    cls = curve_interior(S2, gamma)
    eps = 0.25 * min(T.a, T.b, T.c) if eps is None else eps
    segs, cauchy = {}, {}
    for name, side in (("q", T.pq.path), ("r", T.pr.path)):
        prev, diffs, R = None, [], None
        for k in range(depth + 1):
            t = eps * 2.0 ** -k
            z = side.point_at(t)
            g = _geo_X(S, p, z, tol, bound=t).path
            R = extend_to_length(S, g, eps)
            if prev is not None:
                diffs.append(_hausdorff_ends(S, prev, R, tol))
            prev = R
        ok = bool(diffs) and diffs[-1] <= tol.tol_geo and all(
            d2 <= d1 + tol.tol_geo for d1, d2 in zip(diffs[:-1], diffs[1:]))
        cauchy[name] = {"differences": diffs, "cauchy": ok}
        segs[name] = R
    ang_x = x_angle(S, p, segs["q"], segs["r"])
    ang_y = alexandrov_angle_Y(S, E, T.pq.path, T.pr.path, tol)
    tol_a = tol.tol_angle(S.h, ang_y.scales[0])
    # containment of the limit segments in T and its interior
    scale = max(1.0, complex_diameter(S.parent))
    contained = {}
    for name, R in segs.items():
        ok = True
        for P in R.samples(S.h / 8):
            P2 = S2.from_parent(S.to_parent(P))
            if not (cls.in_or_on(P2) or _near_curve(S2, gamma, P2, 1e-9 * scale)):
                ok = False
                break
        contained[name] = ok
    # extension through T and its interior to the opposite side
    chain = list(gamma.vertices)
    iq = chain.index(S2.from_parent(S.to_parent(q)).cell)
    ir = chain.index(S2.from_parent(S.to_parent(r)).cell)
    opp_v = set(chain[min(iq, ir):max(iq, ir) + 1])
    opp_e = {S2.edge_between(x, y) for x, y in zip(chain[min(iq, ir):max(iq, ir)],
                                                    chain[min(iq, ir) + 1:max(iq, ir) + 1])}

    def stop(Q):
        if (Q.kind == "vertex" and Q.cell in opp_v) or (Q.kind == "edge" and Q.cell in opp_e):
            return "reached"
        if not (cls.in_or_on(Q) or _near_curve(S2, gamma, Q, 1e-9 * scale)):
            return "exited"
        return None

    p2 = S2.from_parent(S.to_parent(p))
    extension = {}
    sides = {"q": T.pq.path, "r": T.pr.path}
    for name, R in segs.items():
        # a limit segment on its own side extends along that side to q or r
        dev = _geo_X(S, R.end, sides[name].point_at(eps), tol, bound=2 * eps).length \
            if R.end != sides[name].point_at(eps) else 0.0
        if dev <= tol.tol_geo:
            extension[name] = {"reached": True, "outcome": "along_side",
                               "terminal": _pj(S, getattr(T, name)), "length": sides[name].length,
                               "deviation": dev}
            continue
        seed = _seed_in(S, S2, p2, R)
        path, outcome = march(S2, seed.points, seed.cells, lambda t: t in cls.faces_in, stop,
                              max_length=20.0 * scale)
        extension[name] = {"reached": outcome == "reached", "outcome": outcome,
                           "terminal": _pj(S2, path.end), "length": path.length}
    wit = {"p": _pj(S, p), "q": _pj(S, q), "r": _pj(S, r)}
    return LimitSegmentReport(ang_x, ang_y, tol_a, cauchy, contained, extension, eps, wit)


def _seed_in(S, S2, p2, R):
    """Initial piece of R re-expressed as a one-segment path of S2."""
    from .path import PiecewisePath

    delta = min(R.length, S2.h) / 4.0
    for _ in range(60):
        z2 = S2.from_parent(S.to_parent(R.point_at(delta)))
        cells = [("face", f) for f in S2.point_faces(p2) if f in S2.point_faces(z2)]
        if not cells and p2.kind != "face" and z2.kind in ("edge", "vertex"):
            e_common = _common_edge(S2, p2, z2)
            if e_common is not None:
                cells = [("edge", e_common)]
        if cells and z2 != p2:
            return PiecewisePath.build(S2, [p2, z2], [cells[0]])
        delta *= 0.5
    raise InvalidTriangleError("could not place a limit segment in the curve subdivision")


def _common_edge(S, A, B):
    def edges(P):
        if P.kind == "vertex":
            return set(S.vertex_edges[P.cell])
        if P.kind == "edge":
            return {P.cell}
        return set()

    common = sorted(edges(A) & edges(B))
    return common[0] if common else None


__all__ = [
    "AngleEstimate",
    "LimitSegmentReport",
    "MarginReport",
    "Tolerances",
    "TriangleSample",
    "alexandrov_angle_Y",
    "cat_sweep",
    "cat_triangle_test",
    "convexity_check",
    "limit_segments",
    "random_point",
    "triangle_sample",
    "x_angle",
]
