"""Scenario files, builders, random regions and verification runs.

A scenario is a single JSON object (``format_version: 1``) holding a complex
description, a mesh parameter, optional curve and region specifications and a
verification plan.  Unknown fields are rejected everywhere.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import time
import traceback
from dataclasses import dataclass

import numpy as np

from . import __version__
from .complex import ComplexPoint, build_complex, check_link_condition, link_girth, link_graph, polygon_document
from .errors import CatkError, ScenarioSchemaError
from .geodesic import complex_diameter, extend_geodesic, geodesic_X, geodesic_Y, _run
from .homology import (
    CycleCurve,
    accumulation_check,
    apply_d2,
    bounding_chain,
    chain_complex,
    cross_validate,
    curve_interior,
    homology_H1,
)
from .model import check_kappa, chart_dist
from .path import PiecewisePath
from .region import Region, carve
from .subdivide import subdivide
from .verify import (
    Tolerances,
    cat_sweep,
    convexity_check,
    limit_segments,
    random_point,
)

FORMAT_VERSION = 1
SUITES = ("link", "homology", "curve", "geodesics", "cat", "convexity", "limit")

# ---------------------------------------------------------------------------
# schema

_TOP = {"format_version", "name", "description", "complex", "h", "curve", "region", "seams",
        "plan", "expect"}
_PLAN = {"suites", "seed", "cat_triangles", "cat_pairs", "convexity_pairs", "limit_triangles",
         "geodesic_pairs", "probe_points", "curve_extensions", "curve_tested_vertices",
         "tolerances", "link_points", "budget", "negative_control"}
_TOL = {"target_gap", "tol_geo", "tol_cat", "angle_floor", "angle_const", "min_scale"}
_REGION_KINDS = {"all", "parent_faces", "carve", "interior", "generated", "cells", "edges"}


def _err(msg, field=None, doc_text=None):
    line = None
    if doc_text is not None and field is not None:
        key = f'"{field.split(".")[-1]}"'
        for i, ln in enumerate(doc_text.splitlines(), 1):
            if key in ln:
                line = i
                break
    raise ScenarioSchemaError(msg, field=field, line=line)


def _check_keys(obj, allowed, where, text):
    if not isinstance(obj, dict):
        _err(f"{where} must be an object", where, text)
    for k in obj:
        if k not in allowed:
            _err(f"unknown field {where + '.' if where else ''}{k}", f"{where}.{k}" if where else k,
                 text)


def _num(v, where, text, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _err(f"{where} must be a finite number", where, text)
    if positive and not v > 0:
        _err(f"{where} must be positive", where, text)
    return float(v)


def _point(raw, where, text):
    """Parent point spec: {"vertex": id} | {"edge": id, "t": t} | {"face": id, "xy": [x, y]}."""
    if not isinstance(raw, dict):
        _err(f"{where} must be a point object", where, text)
    keys = set(raw)
    if keys == {"vertex"}:
        return ("vertex", int(raw["vertex"]))
    if keys == {"edge", "t"}:
        return ("edge", int(raw["edge"]), _num(raw["t"], where + ".t", text))
    if keys == {"face", "xy"}:
        xy = raw["xy"]
        if not isinstance(xy, list) or len(xy) not in (2, 3):
            _err(f"{where}.xy must be a coordinate list", where + ".xy", text)
        return ("face", int(raw["face"]), [_num(c, where + ".xy", text) for c in xy])
    _err(f"{where} has fields {sorted(keys)}; expected vertex, edge+t or face+xy", where, text)


def point_json(P: ComplexPoint):
    if P.kind == "vertex":
        return {"vertex": P.cell}
    if P.kind == "edge":
        return {"edge": P.cell, "t": P.t}
    return {"face": P.cell, "xy": list(P.xy)}


@dataclass
class Scenario:
    doc: dict
    complex: object
    h: float
    expect: str

    @property
    def name(self):
        return self.doc.get("name", "scenario")

    @property
    def plan(self):
        return self.doc.get("plan", {})

    def hash(self):
        return scenario_hash(self.doc)


def canonical_json(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False,
                      allow_nan=False)


def scenario_hash(doc):
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def validate_document(doc, text=None) -> Scenario:
    """Strict validation of a scenario document; returns a Scenario."""
    _check_keys(doc, _TOP, "", text)
    if doc.get("format_version") != FORMAT_VERSION:
        _err(f"format_version must be {FORMAT_VERSION}", "format_version", text)
    for req in ("complex", "h"):
        if req not in doc:
            _err(f"missing required field {req}", req, text)
    cx = doc["complex"]
    _check_keys(cx, {"kappa", "vertices", "edges", "faces"}, "complex", text)
    kappa = _num(cx.get("kappa"), "complex.kappa", text)
    if kappa > 0:
        _err("complex.kappa must be <= 0", "kappa", text)
    edge_ids = set()
    for e in cx.get("edges", []):
        _check_keys(e, {"id", "length", "endpoints"}, "complex.edges[]", text)
        edge_ids.add(e.get("id"))
    for f in cx.get("faces", []):
        _check_keys(f, {"id", "polygon", "sides"}, "complex.faces[]", text)
        for s in f.get("sides", []):
            _check_keys(s, {"edge", "reversed"}, "complex.faces[].sides[]", text)
            if s.get("edge") not in edge_ids:
                _err(f"face {f.get('id')} references unknown edge id {s.get('edge')}", "edge", text)
    h = _num(doc["h"], "h", text, positive=True)
    expect = doc.get("expect", "pass")
    if expect not in ("pass", "violations"):
        _err("expect must be 'pass' or 'violations'", "expect", text)
    try:
        X = build_complex(cx)
    except CatkError as err:
        _err(f"invalid complex: {err}", "complex", text)
    check_kappa(kappa)
    for i, seam in enumerate(doc.get("seams", [])):
        if not isinstance(seam, list) or len(seam) < 2:
            _err(f"seams[{i}] must list at least two points", "seams", text)
        for j, p in enumerate(seam):
            _locate(X, _point(p, f"seams[{i}][{j}]", text), f"seams[{i}][{j}]", text)
    if "curve" in doc:
        cv = doc["curve"]
        _check_keys(cv, {"points"}, "curve", text)
        pts = cv.get("points", [])
        if len(pts) < 3:
            _err("curve.points needs at least three points", "curve", text)
        for j, p in enumerate(pts):
            _locate(X, _point(p, f"curve.points[{j}]", text), f"curve.points[{j}]", text)
    if "region" in doc:
        _validate_region(doc["region"], X, text, "curve" in doc)
    plan = doc.get("plan", {})
    _check_keys(plan, _PLAN, "plan", text)
    for s in plan.get("suites", []):
        if s not in SUITES:
            _err(f"unknown suite {s!r}", "suites", text)
    for key in ("seed", "cat_triangles", "cat_pairs", "convexity_pairs", "curve_extensions",
                "curve_tested_vertices"):
        if key in plan and (not isinstance(plan[key], int) or isinstance(plan[key], bool)
                            or plan[key] < 0):
            _err(f"plan.{key} must be a non-negative integer", key, text)
    if not isinstance(plan.get("negative_control", False), bool):
        _err("plan.negative_control must be a boolean", "negative_control", text)
    if "budget" in plan:
        _num(plan["budget"], "plan.budget", text, positive=True)
    tols = plan.get("tolerances", {})
    _check_keys(tols, _TOL, "plan.tolerances", text)
    for k, v in tols.items():
        _num(v, f"plan.tolerances.{k}", text, positive=(k != "min_scale"))
    for key, n in (("limit_triangles", 3), ("geodesic_pairs", 2)):
        for i, item in enumerate(plan.get(key, [])):
            _check_keys(item, {"points", "expected", "tolerance", "metric"}, f"plan.{key}[]", text)
            if item.get("metric", "region") not in ("region", "ambient"):
                _err("metric must be 'region' or 'ambient'", "metric", text)
            pts = item.get("points", [])
            if len(pts) != n:
                _err(f"plan.{key}[{i}] needs {n} points", key, text)
            for j, p in enumerate(pts):
                _locate(X, _point(p, f"plan.{key}[{i}].points[{j}]", text), key, text)
    for i, item in enumerate(plan.get("probe_points", [])):
        _check_keys(item, {"name", "point", "expected"}, "plan.probe_points[]", text)
        _locate(X, _point(item.get("point"), f"plan.probe_points[{i}]", text), "probe_points", text)
        if item.get("expected") not in (None, "in", "out"):
            _err("probe expected must be 'in' or 'out'", "expected", text)
    for i, p in enumerate(plan.get("link_points", [])):
        _locate(X, _point(p, f"plan.link_points[{i}]", text), "link_points", text)
    return Scenario(doc, X, h, expect)


def _locate(X, raw, where, text):
    try:
        return X.locate(raw)
    except CatkError as err:
        _err(f"{where}: {err}", where, text)


def _validate_region(reg, X, text, has_curve):
    if not isinstance(reg, dict) or reg.get("kind") not in _REGION_KINDS:
        _err(f"region.kind must be one of {sorted(_REGION_KINDS)}", "region", text)
    kind = reg["kind"]
    allowed = {"all": {"kind"}, "parent_faces": {"kind", "faces"}, "carve": {"kind", "holes"},
               "interior": {"kind"}, "generated": {"kind", "seed", "cells"},
               "cells": {"kind", "faces"}, "edges": {"kind", "parent_edges"}}[kind]
    _check_keys(reg, allowed, "region", text)
    if kind == "parent_faces":
        for f in reg.get("faces", []):
            if f not in X.faces:
                _err(f"region references unknown face {f}", "faces", text)
    if kind == "edges":
        for e in reg.get("parent_edges", []):
            if e not in X.edges:
                _err(f"region references unknown edge {e}", "parent_edges", text)
    if kind == "carve":
        for i, hole in enumerate(reg.get("holes", [])):
            _check_keys(hole, {"face", "polygon"}, "region.holes[]", text)
            if hole.get("face") not in X.faces:
                _err(f"region.holes[{i}] references unknown face", "face", text)
            if len(hole.get("polygon", [])) < 3:
                _err(f"region.holes[{i}].polygon needs three points", "polygon", text)
    if kind == "interior" and not has_curve:
        _err("region kind 'interior' needs a curve", "region", text)
    if kind == "generated":
        for k in ("seed", "cells"):
            if not isinstance(reg.get(k), int) or reg[k] < 0:
                _err(f"region.{k} must be a non-negative integer", k, text)


def parse_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioSchemaError(f"invalid JSON: {err.msg}", line=err.lineno) from err
    return validate_document(doc, text)


def emit_scenario(doc, path=None):
    text = json.dumps(doc, indent=1, sort_keys=False, ensure_ascii=False, allow_nan=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# builders


def _doc(name, cx, h, **extra):
    d = {"format_version": FORMAT_VERSION, "name": name, "complex": cx, "h": h}
    d.update(extra)
    return d


def tripod_complex(W=4.0, H=5.0):
    """Three flat W x 2H rectangles glued along a common side x = 0."""
    V = [0, 1]
    edges = [{"id": 0, "length": 2 * H, "endpoints": [0, 1]}]
    faces = []
    for i in range(3):
        a, b = 2 + 2 * i, 3 + 2 * i
        V += [a, b]
        e1, e2, e3 = 1 + 3 * i, 2 + 3 * i, 3 + 3 * i
        edges += [{"id": e1, "length": W, "endpoints": [0, a]},
                  {"id": e2, "length": 2 * H, "endpoints": [a, b]},
                  {"id": e3, "length": W, "endpoints": [b, 1]}]
        faces.append({"id": i, "polygon": [[0.0, -H], [W, -H], [W, H], [0.0, H]],
                      "sides": [{"edge": e1, "reversed": False}, {"edge": e2, "reversed": False},
                                {"edge": e3, "reversed": False}, {"edge": 0, "reversed": True}]})
    return {"kappa": 0.0, "vertices": V, "edges": edges, "faces": faces}


TRIPOD_ARCS = [(-1, 1, 0), (1, -2, 1), (-2, 3, 2), (3, -3, 0), (-3, 2, 1), (2, -1, 2)]


def tripod_curve_points(W=4.0, H=5.0):
    """The six-arc curve: each arc is a two-segment polyline bulging into its face."""
    pts = []
    for a, b, f in TRIPOD_ARCS:
        pts.append({"edge": 0, "t": a + H})
        pts.append({"face": f, "xy": [W / 8.0 * abs(b - a), (a + b) / 2.0]})
    return pts


def build_example_tripod(W=4.0, H=5.0, h=0.25):
    """Scenario for three half-planes glued along a line with the six-arc curve."""
    if not W > 0 or not H > 3 or not h > 0:
        raise ScenarioSchemaError("tripod needs W > 0, H > 3 and h > 0")
    W, H, h = float(W), float(H), float(h)
    plan = {
        "suites": ["link", "homology", "curve", "geodesics", "cat", "convexity", "limit"],
        "seed": 1,
        "cat_triangles": 6,
        "convexity_pairs": 6,
        "curve_extensions": 12,
        "curve_tested_vertices": 24,
        "probe_points": [{"name": "origin", "point": {"edge": 0, "t": H}, "expected": "out"}],
        "geodesic_pairs": [{"points": [{"face": 0, "xy": [1.0, 0.0]}, {"face": 1, "xy": [1.0, 0.0]}],
                            "expected": 2.0, "tolerance": 1e-3, "metric": "ambient"}],
        "limit_triangles": [{"points": [{"face": 0, "xy": [1.0, 0.5]}, {"face": 1, "xy": [1.5, 1.0]},
                                        {"face": 1, "xy": [0.5, -1.2]}]}],
        "link_points": [{"edge": 0, "t": H - 2.0}, {"edge": 0, "t": H + 0.5}],
    }
    return _doc("example-1-tripod", tripod_complex(W, H), h,
                description="Three flat half-planes (truncated to W x 2H) glued along x = 0",
                curve={"points": tripod_curve_points(W, H)}, region={"kind": "interior"},
                plan=plan)


def square_scenario(h=0.25, side=3.0):
    s = float(side)
    cx = polygon_document(0.0, [(0, 0), (s, 0), (s, s), (0, s)])
    plan = {"suites": ["link", "homology", "curve", "geodesics", "cat", "convexity", "limit"],
            "seed": 7, "cat_triangles": 10, "convexity_pairs": 6, "curve_extensions": 6,
            "curve_tested_vertices": 12,
            "geodesic_pairs": [{"points": [{"face": 0, "xy": [0.2, 0.3]}, {"face": 0, "xy": [2.7, 2.1]}],
                                "expected": math.hypot(2.5, 1.8), "tolerance": 1e-6}],
            "limit_triangles": [{"points": [{"face": 0, "xy": [0.7, 0.8]}, {"face": 0, "xy": [2.4, 1.1]},
                                            {"face": 0, "xy": [1.2, 2.5]}]}]}
    return _doc("square", cx, h, description="Convex flat square",
                curve={"points": [{"vertex": 0}, {"vertex": 1}, {"vertex": 2}, {"vertex": 3}]},
                region={"kind": "all"}, plan=plan)


def annulus_scenario(h=0.25, side=3.0, hole=(0.4, 2.6)):
    s = float(side)
    a, b = hole
    poly = [[a, a], [b, a], [b, b], [a, b]]
    cx = polygon_document(0.0, [(0, 0), (s, 0), (s, s), (0, s)])
    x, y = (0.5 * a, 1.5), (0.5 * (b + s), 1.4)
    # shortest route wraps two corners of the hole, above or below
    around = min(math.hypot(a - x[0], c - x[1]) + (b - a) + math.hypot(y[0] - b, c - y[1])
                 for c in (a, b))
    plan = {"suites": ["link", "homology", "geodesics", "cat", "convexity"], "seed": 3,
            "cat_triangles": 20, "convexity_pairs": 20, "negative_control": True,
            "geodesic_pairs": [{"points": [{"face": 0, "xy": list(x)}, {"face": 0, "xy": list(y)}],
                                "expected": around, "tolerance": 1e-6}]}
    return _doc("annulus", cx, h, description="Flat square minus an open concentric square",
                region={"kind": "carve", "holes": [{"face": 0, "polygon": poly}]}, plan=plan,
                expect="violations")


def notch_scenario(h=0.25, side=4.0, segments=6):
    """Flat rectangle minus an open polygonal half-disk notch at the bottom."""
    s = float(side)
    cx = polygon_document(0.0, [(0, 0), (s, 0), (s, s), (0, s)])
    c, rad = s / 2, 1.0
    arc = [[c + rad * math.cos(math.pi * (1 - k / segments)), rad * math.sin(math.pi * (1 - k / segments))]
           for k in range(segments + 1)]
    # the notch polygon touches the bottom side; the top of the arc is vertex segments/2
    poly = [[c - rad, 0.0]] + arc[1:-1] + [[c + rad, 0.0]]
    top = arc[segments // 2]
    plan = {"suites": ["link", "homology", "geodesics", "cat", "convexity", "limit"], "seed": 5,
            "cat_triangles": 6, "convexity_pairs": 6,
            "limit_triangles": [{"points": [{"face": 0, "xy": arc[1]},
                                            {"face": 0, "xy": [c + 0.45, 1.25]},
                                            {"face": 0, "xy": [c - 1.6, 1.6]}]}],
            "geodesic_pairs": [{"points": [{"face": 0, "xy": [c - 1.3, 0.3]},
                                           {"face": 0, "xy": [c + 1.3, 0.3]}]}]}
    return _doc("notch", cx, h, description="Flat rectangle minus a polygonal half-disk notch",
                region={"kind": "carve", "holes": [{"face": 0, "polygon": poly}]}, plan=plan,
                seams=[[{"face": 0, "xy": top}, {"face": 0, "xy": [c, s]}]])


def cone_complex(angle=math.pi / 3, radius=2.0, n=3):
    """n flat isosceles triangles with apex angle ``angle`` glued cyclically at the apex."""
    V = list(range(n + 1))  # 0 apex, 1..n rim
    edges = []
    for i in range(n):
        edges.append({"id": i, "length": radius, "endpoints": [0, 1 + i]})
    base = 2 * radius * math.sin(angle / 2)
    for i in range(n):
        edges.append({"id": n + i, "length": base, "endpoints": [1 + i, 1 + (i + 1) % n]})
    faces = []
    for i in range(n):
        pts = [[0.0, 0.0], [radius, 0.0], [radius * math.cos(angle), radius * math.sin(angle)]]
        faces.append({"id": i, "polygon": pts,
                      "sides": [{"edge": i, "reversed": False}, {"edge": n + i, "reversed": False},
                                {"edge": (i + 1) % n, "reversed": True}]})
    return {"kappa": 0.0, "vertices": V, "edges": edges, "faces": faces}


def cone_scenario(h=0.5):
    plan = {"suites": ["link", "homology"], "seed": 1}
    return _doc("cone", cone_complex(), h, description="Three 60 degree sectors around a point",
                plan=plan, expect="violations")


def hyperbolic_scenario(h=0.25, kappa=-1.0, half=0.5):
    pts = [(-half, -half), (half, -half), (half, half), (-half, half)]
    cx = polygon_document(kappa, pts)
    p, q = (-0.3, -0.2), (0.35, 0.3)
    expected = chart_dist(kappa, p, q)
    plan = {"suites": ["link", "homology", "curve", "geodesics", "cat", "convexity"], "seed": 11,
            "cat_triangles": 6, "convexity_pairs": 4, "curve_extensions": 4,
            "curve_tested_vertices": 8,
            "geodesic_pairs": [{"points": [{"face": 0, "xy": list(p)}, {"face": 0, "xy": list(q)}],
                                "expected": expected, "tolerance": 1e-6}]}
    return _doc("hyperbolic-square", cx, h, description="Square in the hyperbolic plane (Klein chart)",
                curve={"points": [{"vertex": 0}, {"vertex": 1}, {"vertex": 2}, {"vertex": 3}]},
                region={"kind": "all"}, plan=plan)


def generated_region_scenario(seed, cells, h=0.25):
    doc = build_example_tripod(h=h)
    doc["name"] = f"tripod-region-{seed}"
    doc.pop("curve")
    doc["region"] = {"kind": "generated", "seed": seed, "cells": cells}
    doc["plan"] = {"suites": ["link", "homology", "cat", "convexity"], "seed": seed,
                   "cat_triangles": 8, "convexity_pairs": 4}
    return doc


BUILDERS = {
    "tripod": build_example_tripod,
    "square": square_scenario,
    "annulus": annulus_scenario,
    "notch": notch_scenario,
    "cone": cone_scenario,
    "hyperbolic": hyperbolic_scenario,
}


# ---------------------------------------------------------------------------
# regions


def generate_region(S, seed, target_cells):
    """Grow an H1-trivial region face by face from a random root.

    A face sharing an edge with the region is added only when its closure
    meets the region in a connected set; with H1 of the region trivial this is
    exactly the condition for H1 to stay trivial (Mayer-Vietoris).
    """
    rng = np.random.default_rng(int(seed))
    faces = sorted(S.faces)
    if target_cells <= 0 or not faces:
        raise ScenarioSchemaError("target_cells must be positive")
    if target_cells > len(faces):
        raise ScenarioSchemaError(f"target_cells {target_cells} exceeds the {len(faces)} faces")
    root = faces[int(rng.integers(len(faces)))]
    inF = {root}
    inE = set(S.faces[root].sides)
    inV = set(S.faces[root].corners)
    rejected = set()
    while len(inF) < target_cells:
        cand = sorted({g for e in inE for g in S.edge_faces[e]} - inF - rejected)
        if not cand:
            break
        f = cand[int(rng.integers(len(cand)))]
        face = S.faces[f]
        shared_e = [e for e in face.sides if e in inE]
        shared_v = {v for v in face.corners if v in inV}
        # connectivity of closure(f) meet region: vertices joined by shared edges
        comp = set()
        for e in shared_e:
            comp |= {S.edges[e].u, S.edges[e].v}
        if shared_v - comp:
            rejected.add(f)
            continue
        inF.add(f)
        inE |= set(face.sides)
        inV |= set(face.corners)
        rejected.clear()
    R = Region.closure(S, inF)
    res = homology_H1(chain_complex(S, R))
    if res.betti1 or res.torsion:
        raise CatkError("generated region failed the H1 re-check")
    return R


def _build_region(sc: Scenario, S, cls):
    reg = sc.doc.get("region", {"kind": "all"})
    kind = reg["kind"]
    X = sc.complex
    if kind == "all":
        return Region.all(S)
    if kind == "parent_faces":
        return Region.closure(S, [t for pf in reg["faces"] for t in S.triangles_of_parent(pf)])
    if kind == "edges":
        es = [e for e in S.edges if S.edge_parent[e][0] == "edge" and S.edge_parent[e][1] in set(reg["parent_edges"])]
        return Region.closure(S, edges=es)
    if kind == "carve":
        return carve(S, [(hd["face"], [(float(p[0]), float(p[1])) for p in hd["polygon"]])
                         for hd in reg["holes"]])
    if kind == "interior":
        return cls.region()
    if kind == "generated":
        return generate_region(S, reg["seed"], reg["cells"])
    return Region.closure(S, reg["faces"])


def _seams(sc: Scenario):
    X = sc.complex
    doc = sc.doc
    seams = []
    for seam in doc.get("seams", []):
        seams.append([X.locate(_point(p, "seam", None)) for p in seam])
    curve_idx = None
    if "curve" in doc:
        pts = [X.locate(_point(p, "curve", None)) for p in doc["curve"]["points"]]
        curve_idx = len(seams)
        seams.append(pts + [pts[0]])
    reg = doc.get("region")
    if reg and reg["kind"] == "carve":
        for hd in reg["holes"]:
            poly = [X.locate(("face", hd["face"], p)) for p in hd["polygon"]]
            seams.append(poly + [poly[0]])
    return seams, curve_idx


# ---------------------------------------------------------------------------
# runs


def _clean(x):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating,)):
        return _clean(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


@dataclass
class RunResult:
    body: dict
    metadata: dict
    exit_code: int

    @property
    def verdict(self):
        return self.body["verdict"]

    def report(self):
        return {"body": self.body, "metadata": self.metadata}

    def body_text(self):
        return canonical_json(self.body)

    def text(self):
        return json.dumps(_clean(self.report()), indent=1, sort_keys=True, ensure_ascii=False,
                          allow_nan=False) + "\n"


def exit_code_for(verdict, expect):
    code = {"pass": 0, "violations": 2, "error": 1}[verdict]
    if expect == "violations" and code in (0, 2):
        code = 2 - code
    return code


def run(sc: Scenario, seed=None, h=None) -> RunResult:
    """Execute a scenario's verification plan."""
    t0 = time.monotonic()
    timing = {}
    plan = sc.plan
    suites = plan.get("suites", list(SUITES))
    seed = plan.get("seed", 0) if seed is None else int(seed)
    h = sc.h if h is None else float(h)
    body = {"format_version": FORMAT_VERSION, "scenario": sc.name, "scenario_hash": sc.hash(),
            "parameters": {"h": h, "seed": seed, "expect": sc.expect, "suites": suites},
            "suites": {}}
    violations = []
    try:
        _run_suites(sc, suites, seed, h, body, violations, timing)
        verdict = "violations" if violations else "pass"
    except CatkError as err:
        body["error"] = {"type": type(err).__name__, "message": str(err)}
        verdict = "error"
    except Exception as err:  # noqa: BLE001 - any failure is reported as an error verdict
        body["error"] = {"type": type(err).__name__, "message": str(err),
                         "trace": traceback.format_exc().splitlines()[-3:]}
        verdict = "error"
    body["violations"] = violations
    body["verdict"] = verdict
    code = exit_code_for(verdict, sc.expect)
    body["exit_code"] = code
    body = _clean(body)
    meta = {"elapsed_s": round(time.monotonic() - t0, 3), "timing": timing, "catk_version": __version__}
    return RunResult(body, meta, code)


def _timed(timing, name, fn, *args, **kw):
    t = time.monotonic()
    out = fn(*args, **kw)
    timing[name] = round(time.monotonic() - t, 3)
    return out


def _run_suites(sc, suites, seed, h, body, violations, timing):
    X = sc.complex
    plan = sc.plan
    out = body["suites"]
    # complex and link condition
    lc = check_link_condition(X)
    body["complex"] = {"kappa": X.kappa, "vertices": len(X.vertices), "edges": len(X.edges),
                       "faces": len(X.faces), "diameter_lower_bound": complex_diameter(X)}
    seams, curve_idx = _seams(sc)
    S = _timed(timing, "subdivide", subdivide, X, h, seams)
    body["subdivision"] = {"h": h, "vertices": len(S.vertices), "edges": len(S.edges),
                           "faces": len(S.faces), "max_edge": S.max_diameter()}
    tol = Tolerances.defaults(S, **plan.get("tolerances", {}))
    body["tolerances"] = tol.to_json()
    if "link" in suites:
        rec = lc.to_json()
        extra = {}
        for raw in plan.get("link_points", []):
            P = S.from_parent(X.locate(_point(raw, "link", None)))
            g = link_girth(link_graph(S, P))
            extra[json.dumps(raw, sort_keys=True)] = g
        rec["subdivision_girth"] = extra
        rec["subdivision_passed"] = all(g >= 2 * math.pi - 1e-9 for g in extra.values())
        out["link"] = rec
        if not lc.passed:
            violations.append({"suite": "link", "kind": "link_condition", "min_girth": lc.min_girth})
        if extra and not rec["subdivision_passed"]:
            violations.append({"suite": "link", "kind": "subdivision_link"})
    # homology of X
    CX = _timed(timing, "chain_complex", chain_complex, S)
    hx = _timed(timing, "homology_X", homology_H1, CX)
    hom = {"X": hx.to_json(), "d1d2_zero": CX.boundary_of_boundary_is_zero()}
    if hx.betti1 != 0 or hx.torsion:
        raise ScenarioSchemaError("the complex is not H1-trivial; scenarios require simply connected input")
    cls = None
    gamma = None
    if curve_idx is not None:
        gamma = CycleCurve.from_vertices(S, S.seams[curve_idx])
        cls = _timed(timing, "curve_interior", curve_interior, S, gamma, CX)
    E = _timed(timing, "region", _build_region, sc, S, cls)
    CE = chain_complex(S, E)
    hE = homology_H1(CE)
    hom["E"] = {**hE.to_json(), **E.summary(), "closed": E.is_closed()}
    h1_trivial = hE.betti1 == 0 and not hE.torsion
    if "homology" in suites:
        out["homology"] = hom
    negative = sc.plan.get("negative_control", False)
    gated = ("cat", "convexity", "limit")
    skipped = {}
    if not h1_trivial and not negative:
        for s in gated:
            if s in suites:
                skipped[s] = "region has nontrivial H1; suite requires H1(E) = 0"
    if skipped:
        body["skipped"] = skipped
    if "curve" in suites and gamma is not None:
        out["curve"] = _timed(timing, "curve", _curve_suite, S, CX, gamma, cls, plan, seed, tol,
                              violations)
    if "geodesics" in suites:
        out["geodesics"] = _timed(timing, "geodesics", _geodesic_suite, S, E, plan, tol, violations)
    if "cat" in suites and "cat" not in skipped:
        rep = _timed(timing, "cat", cat_sweep, S, E, plan.get("cat_triangles", 10), seed, tol,
                     plan.get("budget"), plan.get("cat_pairs", 4))
        out["cat"] = _sweep_json(rep)
        violations.extend({"suite": "cat", **v} for v in rep.violations)
    if "convexity" in suites and "convexity" not in skipped:
        rep = _timed(timing, "convexity", convexity_check, S, E, plan.get("convexity_pairs", 6),
                     seed, tol)
        out["convexity"] = _sweep_json(rep)
        violations.extend({"suite": "convexity", **v} for v in rep.violations)
    if "limit" in suites and "limit" not in skipped:
        res = []
        for item in plan.get("limit_triangles", []):
            p, q, r = (S.from_parent(X.locate(_point(raw, "limit", None))) for raw in item["points"])
            rep = limit_segments(S, E, p, q, r, tol)
            j = rep.to_json()
            res.append(j)
            if not rep.passed:
                violations.append({"suite": "limit", "witnesses": j["witnesses"]})
        out["limit"] = res


def _sweep_json(rep):
    j = rep.to_json()
    by_kind = {}
    for c in rep.checks:
        k = c["kind"]
        by_kind[k] = min(by_kind.get(k, math.inf), c["margin"])
    j["min_margin_by_kind"] = by_kind
    if hasattr(rep, "triangles"):
        j["triangles"] = rep.triangles
    return j


def _curve_suite(S, CX, gamma, cls, plan, seed, tol, violations):
    X = S.parent
    rec = {"curve": gamma.to_json(), "simple": True, "classification": cls.summary()}
    rec["boundary_ok"] = apply_d2(CX, cls.chain) == gamma.chain()
    rec["unique"] = bounding_chain(S, gamma, order=-1, C=CX) == cls.chain
    inter = cls.region()
    hi = homology_H1(chain_complex(S, inter))
    rec["closure_homology"] = hi.to_json()
    # cells tested by both interior criteria
    rng = np.random.default_rng([int(seed), 99])
    on_parent_edges = sorted(v for v in S.vertices if S.vertex_parent[v][0] != "face"
                             and v not in gamma.vertex_set)
    candidates = sorted(v for v in cls.vertex_in)
    k = min(plan.get("curve_tested_vertices", 16), len(candidates))
    sample = sorted(int(x) for x in rng.choice(candidates, size=k, replace=False)) if k else []
    probe = []
    for item in plan.get("probe_points", []):
        P = S.from_parent(X.locate(_point(item["point"], "probe", None)))
        probe.append((item, P))
    nonmanifold = [v for v in on_parent_edges if S.vertex_parent[v][0] == "edge"
                   and len(X.edge_faces[S.vertex_parent[v][1]]) > 2]
    tested_v = sorted(set(sample) | set(nonmanifold) | {P.cell for _, P in probe if P.kind == "vertex"})
    tested_e = sorted({P.cell for _, P in probe if P.kind == "edge"})
    cv = cross_validate(cls, tested_v, tested_e)
    rec["cross_validation"] = cv
    if cv["disagreements"]:
        violations.append({"suite": "curve", "kind": "criteria_disagree", "count": len(cv["disagreements"])})
    probes = []
    for item, P in probe:
        if P.kind == "vertex":
            verdict = cls.tested.get(("vertex", P.cell))
        elif P.kind == "edge":
            verdict = cls.tested.get(("edge", P.cell))
        else:
            verdict = cls.point_in(P)
        entry = {"name": item.get("name"), "point": X.locate(_point(item["point"], "p", None)).to_json(),
                 "classification": "in" if verdict else "out", "expected": item.get("expected")}
        probes.append(entry)
        if item.get("expected") and entry["classification"] != item["expected"]:
            violations.append({"suite": "curve", "kind": "probe", "name": item.get("name")})
    rec["probes"] = probes
    # vertices in the interior with a neighbouring face outside it
    witnesses = []
    for v in tested_v:
        if cls.tested.get(("vertex", v)) and any(f not in cls.faces_in for f in S.vertex_faces[v]):
            witnesses.append(S.to_parent(ComplexPoint.vertex(v)).to_json())
    rec["non_open_witnesses"] = witnesses
    acc = accumulation_check(cls, 3 * S.h)
    rec["accumulation"] = {k2: v for k2, v in acc.items() if k2 != "failures"}
    rec["accumulation"]["failures"] = len(acc["failures"])
    if not acc["pass"]:
        violations.append({"suite": "curve", "kind": "accumulation"})
    ext = _extension_runs(S, gamma, cls, plan.get("curve_extensions", 8), seed)
    rec["extension"] = ext
    if ext["failures"]:
        violations.append({"suite": "curve", "kind": "extension", "count": ext["failures"]})
    if not (rec["boundary_ok"] and rec["unique"]):
        violations.append({"suite": "curve", "kind": "bounding_chain"})
    if not cls.faces_in:
        rec["warning"] = "interior is empty; checks pass vacuously"
    return rec


def _extension_runs(S, gamma, cls, n, seed):
    faces = sorted(cls.faces_in)
    outcomes = {}
    failures = 0
    runs = 0
    if not faces:
        return {"runs": 0, "outcomes": {}, "failures": 0}
    for i in range(n):
        rng = np.random.default_rng([int(seed), 7, i])
        f = faces[int(rng.integers(len(faces)))]
        ch = S.faces[f].chart
        w = rng.dirichlet([1.0, 1.0, 1.0])
        xy = (sum(w[j] * ch[j][0] for j in range(3)), sum(w[j] * ch[j][1] for j in range(3)))
        ang = rng.uniform(0.0, 2.0 * math.pi)
        d = 1e-3 * min(S.edges[e].length for e in S.faces[f].sides)
        xy2 = (xy[0] + d * math.cos(ang), xy[1] + d * math.sin(ang))
        P = S.canonical_face_point(f, xy, tol=1e-12)
        try:
            Q = S.canonical_face_point(f, xy2, tol=1e-12)
        except CatkError:
            continue
        if P.kind != "face" or Q.kind != "face":
            continue
        seed_path = PiecewisePath.build(S, [P, Q], [("face", f)])
        for sp in (seed_path, seed_path.reversed()):
            r = extend_geodesic(S, gamma, sp, classification=cls)
            runs += 1
            outcomes[r.outcome] = outcomes.get(r.outcome, 0) + 1
            if not r.reached:
                failures += 1
    return {"runs": runs, "outcomes": dict(sorted(outcomes.items())), "failures": failures}


def _geodesic_suite(S, E, plan, tol, violations):
    X = S.parent
    res = []
    for item in plan.get("geodesic_pairs", []):
        p, q = (S.from_parent(X.locate(_point(raw, "g", None))) for raw in item["points"])
        ambient = item.get("metric", "region") == "ambient"
        R = Region.all(S) if ambient else E
        r = _run(S, R, p, q, tol.target_gap, 4, 4, None, not R.is_all)
        hist = r.history
        mono = all(b <= a + 1e-12 for a, b in zip(hist[:-1], hist[1:]))
        conv = len(hist) >= 2 and hist[-2] - hist[-1] < tol.target_gap
        entry = {"points": [S.to_parent(p).to_json(), S.to_parent(q).to_json()],
                 "history": hist, "length": r.length, "monotone": mono, "converged": conv,
                 "breakpoints": len(r.path.points), "metric": "ambient" if ambient else "region"}
        ok = mono and conv
        if "expected" in item:
            tolr = item.get("tolerance", 1e-3)
            entry["expected"] = item["expected"]
            entry["error"] = abs(r.length - item["expected"])
            entry["within_tolerance"] = entry["error"] <= tolr
            ok = ok and entry["within_tolerance"]
        entry["passed"] = ok
        if not ok:
            violations.append({"suite": "geodesics", "points": entry["points"]})
        res.append(entry)
    return res


__all__ = [
    "BUILDERS",
    "RunResult",
    "Scenario",
    "annulus_scenario",
    "build_example_tripod",
    "canonical_json",
    "cone_scenario",
    "emit_scenario",
    "exit_code_for",
    "generate_region",
    "generated_region_scenario",
    "hyperbolic_scenario",
    "notch_scenario",
    "parse_scenario",
    "point_json",
    "run",
    "scenario_hash",
    "square_scenario",
    "validate_document",
]
