"""Constant-curvature model plane M^2_kappa for kappa <= 0.

Points of the Euclidean plane (kappa = 0) are stored as ``(x, y)``.  Points of
the hyperbolic plane (kappa < 0) are stored on the hyperboloid sheet
``<x, x> = 1/kappa, x0 > 0`` with the Minkowski form
``<x, y> = -x0*y0 + x1*y1 + x2*y2``.

Most of the toolkit works in *chart coordinates*: plain ``(x, y)`` pairs in
which geodesics are straight segments.  For kappa = 0 the chart is the plane
itself; for kappa < 0 it is the Klein disk (unit disk, independent of the
curvature scale).  The ``chart_*`` helpers below are the fast scalar versions
used by the meshing and geodesic code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CurvatureMismatchError,
    DegenerateTriangleError,
    InvalidGluingError,
    InvalidSidesError,
)

EPS = 1e-9

_J = np.diag([-1.0, 1.0, 1.0])


def check_kappa(kappa) -> float:
    """Validate a curvature value and return it as a float."""
    k = float(kappa)
    if not math.isfinite(k) or k > 0:
        raise ValueError(f"curvature must be a finite number <= 0, got {kappa!r}")
    return k


def _radius(kappa: float) -> float:
    return 1.0 / math.sqrt(-kappa)


# ---------------------------------------------------------------------------
# unit-hyperboloid helpers (kappa = -1 normalisation; scale by R outside)


def _mink(a, b) -> float:
    return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _lift(k):
    """Klein chart point -> unit hyperboloid point."""
    s = 1.0 - k[0] * k[0] - k[1] * k[1]
    if s <= 0.0:
        raise ValueError(f"chart point {k!r} lies outside the Klein disk")
    x0 = 1.0 / math.sqrt(s)
    return (x0, x0 * k[0], x0 * k[1])


def _renorm(u):
    return (math.sqrt(1.0 + u[1] * u[1] + u[2] * u[2]), u[1], u[2])


def _drop(u):
    """Unit hyperboloid point -> Klein chart point."""
    return (u[1] / u[0], u[2] / u[0])


def _unit_dist(ua, ub) -> float:
    d0 = ua[0] - ub[0]
    d1 = ua[1] - ub[1]
    d2 = ua[2] - ub[2]
    q = -d0 * d0 + d1 * d1 + d2 * d2
    if q <= 0.0:
        return 0.0
    return 2.0 * math.asinh(0.5 * math.sqrt(q))


def acosh1p(x: float) -> float:
    """``arccosh(1 + x)`` without cancellation for small ``x``."""
    if x <= 0.0:
        return 0.0
    return math.log1p(x + math.sqrt(x * (x + 2.0)))


# ---------------------------------------------------------------------------
# chart-level primitives


def orient(a, b, c) -> float:
    """Twice the signed area of (a, b, c); positive when c is left of a->b."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def chart_dist(kappa: float, a, b) -> float:
    if kappa == 0.0:
        return math.hypot(b[0] - a[0], b[1] - a[1])
    return _radius(kappa) * _unit_dist(_lift(a), _lift(b))


def chart_dist_np(kappa: float, A, B):
    """Vectorised chart_dist over (n, 2) coordinate arrays."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if kappa == 0.0:
        return np.hypot(B[:, 0] - A[:, 0], B[:, 1] - A[:, 1])

    def lift(K):
        x0 = 1.0 / np.sqrt(1.0 - K[:, 0] ** 2 - K[:, 1] ** 2)
        return x0, x0 * K[:, 0], x0 * K[:, 1]

    a0, a1, a2 = lift(A)
    b0, b1, b2 = lift(B)
    q = -(a0 - b0) ** 2 + (a1 - b1) ** 2 + (a2 - b2) ** 2
    return _radius(kappa) * 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(q, 0.0)))


def chart_lerp_np(kappa: float, A, B, t):
    """Vectorised chart_lerp: rows of A, B with fractions t (broadcast)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    t = np.asarray(t, dtype=float)[..., None]
    if kappa == 0.0:
        return A + t * (B - A)

    def lift(K):
        x0 = 1.0 / np.sqrt(1.0 - K[..., 0] ** 2 - K[..., 1] ** 2)
        return np.stack([x0, x0 * K[..., 0], x0 * K[..., 1]], axis=-1)

    ua, ub = lift(A), lift(B)
    diff = ua - ub
    q = -diff[..., 0] ** 2 + diff[..., 1] ** 2 + diff[..., 2] ** 2
    d = (2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(q, 0.0))))[..., None]
    s = np.sinh(d)
    safe = np.where(s > 0, s, 1.0)
    w1 = np.where(s > 0, np.sinh((1.0 - t) * d) / safe, 1.0 - t)
    w2 = np.where(s > 0, np.sinh(t * d) / safe, t)
    u = w1 * ua + w2 * ub
    return u[..., 1:] / u[..., :1]


def chart_lerp(kappa: float, a, b, t: float):
    """Point at fraction ``t`` of the geodesic from a to b (chart coords)."""
    if kappa == 0.0:
        return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
    if t == 0.0:
        return (a[0], a[1])
    if t == 1.0:
        return (b[0], b[1])
    ua, ub = _lift(a), _lift(b)
    d = _unit_dist(ua, ub)
    if d < 1e-14:
        return (a[0], a[1])
    s = math.sinh(d)
    w1 = math.sinh((1.0 - t) * d) / s
    w2 = math.sinh(t * d) / s
    u = (w1 * ua[0] + w2 * ub[0], w1 * ua[1] + w2 * ub[1], w1 * ua[2] + w2 * ub[2])
    return _drop(_renorm(u))


def half_angle(kappa: float, a: float, b: float, c: float) -> float:
    """Angle opposite side c in the model triangle with sides a, b, c.

    Uses the half-angle form of the law of cosines, which stays accurate for
    thin and for nearly flat triangles.  Inputs must already be validated.
    """
    if kappa == 0.0:
        s = (c - a + b) * (c + a - b)
        co = (a + b - c) * (a + b + c)
    else:
        r2 = 2.0 * _radius(kappa)
        s = math.sinh((c - a + b) / r2) * math.sinh((c + a - b) / r2)
        co = math.sinh((a + b + c) / r2) * math.sinh((a + b - c) / r2)
    s = max(s, 0.0)
    co = max(co, 0.0)
    return 2.0 * math.atan2(math.sqrt(s), math.sqrt(co))


def comparison_angle(kappa, a: float, b: float, c: float) -> float:
    """Angle at the vertex between the sides of length a and b.

    a = d(p, q), b = d(p, r), c = d(q, r); the result is the angle at the image
    of p in the comparison triangle in M^2_kappa.
    """
    kappa = check_kappa(kappa)
    if a <= 0.0 or b <= 0.0:
        raise DegenerateTriangleError(f"comparison angle needs positive sides, got a={a}, b={b}")
    if c < 0.0:
        raise InvalidSidesError(f"negative side length c={c}")
    tol = EPS * max(1.0, a + b + c)
    if c > a + b + tol or c < abs(a - b) - tol:
        raise InvalidSidesError(f"sides ({a}, {b}, {c}) violate the triangle inequality")
    return half_angle(kappa, a, b, c)


def chart_angle(kappa: float, p, q, r) -> float:
    """Angle at p of the geodesic triangle (p, q, r), chart coordinates."""
    a = chart_dist(kappa, p, q)
    b = chart_dist(kappa, p, r)
    if a <= 0.0 or b <= 0.0:
        raise DegenerateTriangleError("vertex angle with a coincident endpoint")
    c = chart_dist(kappa, q, r)
    return half_angle(kappa, a, b, min(max(c, abs(a - b)), a + b))


def point_at_angle(kappa: float, a, b, theta: float, d: float, side: int):
    """Point c with angle(b, a, c) = theta, d(a, c) = d, on ``side`` of a->b.

    ``side`` is +1 for the left of a->b (positive orientation in the chart) and
    -1 for the right.
    """
    if d == 0.0:
        return (a[0], a[1])
    if kappa == 0.0:
        L = math.hypot(b[0] - a[0], b[1] - a[1])
        ux, uy = (b[0] - a[0]) / L, (b[1] - a[1]) / L
        cs, sn = math.cos(theta), side * math.sin(theta)
        return (a[0] + d * (cs * ux - sn * uy), a[1] + d * (sn * ux + cs * uy))
    ua, ub = _lift(a), _lift(b)
    ip = _mink(ua, ub)
    e1 = (ub[0] + ip * ua[0], ub[1] + ip * ua[1], ub[2] + ip * ua[2])
    n1 = math.sqrt(max(_mink(e1, e1), 1e-300))
    e1 = (e1[0] / n1, e1[1] / n1, e1[2] / n1)
    # Lorentzian cross product J(a x e1) is the unit normal completing the frame
    cx = ua[1] * e1[2] - ua[2] * e1[1]
    cy = ua[2] * e1[0] - ua[0] * e1[2]
    cz = ua[0] * e1[1] - ua[1] * e1[0]
    e2 = (-cx, cy, cz)
    n2 = math.sqrt(max(_mink(e2, e2), 1e-300))
    e2 = (e2[0] / n2, e2[1] / n2, e2[2] / n2)
    delta = d / _radius(kappa)
    ch, sh = math.cosh(delta), math.sinh(delta)
    cs, sn = math.cos(theta), math.sin(theta)

    def build(sgn):
        u = tuple(ch * ua[i] + sh * (cs * e1[i] + sgn * sn * e2[i]) for i in range(3))
        return _drop(_renorm(u))

    c = build(1.0)
    if sn > 1e-15 and orient(a, b, c) * side < 0:
        c = build(-1.0)
    return c


def place_third(kappa: float, a, b, dac: float, dbc: float, side: int, dab: float | None = None):
    """Place the third vertex of a triangle given two vertices and two sides."""
    if dac == 0.0:
        return (a[0], a[1])
    if dab is None:
        dab = chart_dist(kappa, a, b)
    c = min(max(dbc, abs(dab - dac)), dab + dac)
    theta = half_angle(kappa, dab, dac, c)
    return point_at_angle(kappa, a, b, theta, dac, side)


# ---------------------------------------------------------------------------
# public point / isometry types


@dataclass(frozen=True)
class ModelPoint:
    """A point of M^2_kappa in the fixed model chart."""

    kappa: float
    coords: tuple

    def __post_init__(self):
        k = check_kappa(self.kappa)
        c = tuple(float(x) for x in self.coords)
        if k == 0.0:
            if len(c) != 2:
                raise ValueError("Euclidean points need two coordinates")
        else:
            if len(c) != 3:
                raise ValueError("hyperbolic points need three hyperboloid coordinates")
            R = _radius(k)
            if c[0] <= 0.0:
                raise ValueError("hyperboloid point must lie on the upper sheet (x0 > 0)")
            resid = abs(-c[0] ** 2 + c[1] ** 2 + c[2] ** 2 - 1.0 / k)
            if resid > 1e-6 * max(1.0, c[0] ** 2):
                raise ValueError(f"point {c} is not on the hyperboloid for kappa={k}")
            c = (math.sqrt(R * R + c[1] ** 2 + c[2] ** 2), c[1], c[2])
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_chart(cls, kappa, xy) -> "ModelPoint":
        k = check_kappa(kappa)
        if k == 0.0:
            return cls(k, (xy[0], xy[1]))
        u = _lift(xy)
        R = _radius(k)
        return cls(k, (R * u[0], R * u[1], R * u[2]))

    @property
    def chart(self) -> tuple:
        if self.kappa == 0.0:
            return self.coords
        return (self.coords[1] / self.coords[0], self.coords[2] / self.coords[0])


def _same_kappa(*points: ModelPoint) -> float:
    k = points[0].kappa
    for p in points[1:]:
        if p.kappa != k:
            raise CurvatureMismatchError(f"points live in different models ({k} vs {p.kappa})")
    return k


def dist(p: ModelPoint, q: ModelPoint) -> float:
    k = _same_kappa(p, q)
    if k == 0.0:
        return math.hypot(q.coords[0] - p.coords[0], q.coords[1] - p.coords[1])
    R = _radius(k)
    up = tuple(x / R for x in p.coords)
    uq = tuple(x / R for x in q.coords)
    return R * _unit_dist(up, uq)


def geodesic_point(p: ModelPoint, q: ModelPoint, t: float) -> ModelPoint:
    """Constant-speed parametrisation of [p, q] evaluated at fraction t."""
    k = _same_kappa(p, q)
    if t == 0.0:
        return p
    if t == 1.0:
        return q
    return ModelPoint.from_chart(k, chart_lerp(k, p.chart, q.chart, t))


def vertex_angle(p: ModelPoint, q: ModelPoint, r: ModelPoint) -> float:
    """Angle at p between the geodesics towards q and r."""
    k = _same_kappa(p, q, r)
    a, b = dist(p, q), dist(p, r)
    if a <= 0.0 or b <= 0.0:
        raise DegenerateTriangleError("vertex angle with a coincident endpoint")
    c = dist(q, r)
    return half_angle(k, a, b, min(max(c, abs(a - b)), a + b))


@dataclass(frozen=True, eq=False)
class ModelIsometry:
    """Isometry of M^2_kappa as a 3x3 matrix.

    Affine (homogeneous) form for kappa = 0, Lorentz-orthogonal form acting on
    hyperboloid coordinates for kappa < 0.
    """

    kappa: float
    matrix: np.ndarray

    def __call__(self, p: ModelPoint) -> ModelPoint:
        if p.kappa != self.kappa:
            raise CurvatureMismatchError("isometry and point live in different models")
        if self.kappa == 0.0:
            x = self.matrix @ np.array([p.coords[0], p.coords[1], 1.0])
            return ModelPoint(0.0, (x[0], x[1]))
        x = self.matrix @ np.array(p.coords)
        R = _radius(self.kappa)
        return ModelPoint(self.kappa, (math.sqrt(R * R + x[1] ** 2 + x[2] ** 2), x[1], x[2]))

    def apply_chart(self, xy):
        if self.kappa == 0.0:
            m = self.matrix
            return (m[0, 0] * xy[0] + m[0, 1] * xy[1] + m[0, 2], m[1, 0] * xy[0] + m[1, 1] * xy[1] + m[1, 2])
        u = self.matrix @ np.array(_lift(xy))
        return _drop(_renorm(u))

    def compose(self, other: "ModelIsometry") -> "ModelIsometry":
        """Return ``self o other``."""
        if other.kappa != self.kappa:
            raise CurvatureMismatchError("cannot compose isometries of different models")
        return ModelIsometry(self.kappa, self.matrix @ other.matrix)

    def inverse(self) -> "ModelIsometry":
        if self.kappa == 0.0:
            return ModelIsometry(0.0, np.linalg.inv(self.matrix))
        return ModelIsometry(self.kappa, _J @ self.matrix.T @ _J)

    def residual(self) -> float:
        """Deviation from being an isometry (0 for an exact one)."""
        m = self.matrix
        if self.kappa == 0.0:
            lin = m[:2, :2]
            return float(max(np.abs(lin.T @ lin - np.eye(2)).max(), np.abs(m[2] - [0, 0, 1]).max()))
        return float(np.abs(m.T @ _J @ m - _J).max())

    @property
    def preserves_orientation(self) -> bool:
        if self.kappa == 0.0:
            return bool(np.linalg.det(self.matrix[:2, :2]) > 0)
        return bool(np.linalg.det(self.matrix) > 0)


def _frame(ua, ub):
    ua = np.asarray(ua, dtype=float)
    ub = np.asarray(ub, dtype=float)
    e1 = ub + _mink(ua, ub) * ua
    e1 /= math.sqrt(_mink(e1, e1))
    e2 = _J @ np.cross(ua, e1)
    e2 /= math.sqrt(_mink(e2, e2))
    return np.column_stack([ua, e1, e2])


def gluing_isometry(
    src_a: ModelPoint,
    src_b: ModelPoint,
    dst_a: ModelPoint,
    dst_b: ModelPoint,
    preserve_orientation: bool = True,
) -> ModelIsometry:
    """Isometry taking src_a -> dst_a and src_b -> dst_b.

    Two such isometries exist; ``preserve_orientation`` picks the one that
    keeps the orientation (so a face on the left of src_a->src_b lands on the
    left of dst_a->dst_b) or the mirror one.
    """
    k = _same_kappa(src_a, src_b, dst_a, dst_b)
    ls, ld = dist(src_a, src_b), dist(dst_a, dst_b)
    if ls <= EPS or ld <= EPS:
        raise InvalidGluingError("gluing segment endpoints must be distinct")
    if abs(ls - ld) > EPS * max(1.0, ls):
        raise InvalidGluingError(f"segment lengths differ: {ls} vs {ld}")
    if k == 0.0:
        sa, sb = np.array(src_a.coords), np.array(src_b.coords)
        da, db = np.array(dst_a.coords), np.array(dst_b.coords)
        u = (sb - sa) / ls
        v = (db - da) / ld
        rot_u = np.array([[u[0], -u[1]], [u[1], u[0]]])
        rot_v = np.array([[v[0], -v[1]], [v[1], v[0]]])
        lin = rot_v @ rot_u.T
        if not preserve_orientation:
            lin = lin @ (2.0 * np.outer(u, u) - np.eye(2))
        m = np.eye(3)
        m[:2, :2] = lin
        m[:2, 2] = da - lin @ sa
        return ModelIsometry(0.0, m)
    R = _radius(k)
    F = _frame(np.array(src_a.coords) / R, np.array(src_b.coords) / R)
    G = _frame(np.array(dst_a.coords) / R, np.array(dst_b.coords) / R)
    D = np.diag([1.0, 1.0, 1.0 if preserve_orientation else -1.0])
    m = G @ D @ (_J @ F.T @ _J)
    return ModelIsometry(k, m)
