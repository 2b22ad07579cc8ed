"""Acceptance criteria 1-8. Each test prints one PASS/FAIL line; run with -s to see them."""

import copy
import json
import math
import time
import warnings

import pytest

from catk.cli import main
from catk.complex import ComplexPoint, build_complex, check_link_condition, link_girth, link_graph
from catk.homology import apply_d2, chain_complex, homology_H1
from catk.scenario import (
    BUILDERS,
    _build_region,
    _seams,
    cone_complex,
    generate_region,
    run,
    validate_document,
)
from catk.subdivide import subdivide
from catk.verify import Tolerances, cat_sweep, limit_segments


def _report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def _scenario(name):
    return validate_document(BUILDERS[name]())


def _quiet_run(name):
    # module fixtures run outside the per-test warning filter
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="ladder clipped")
        return run(_scenario(name))


@pytest.fixture(scope="module")
def tripod_run():
    t = time.monotonic()
    r = _quiet_run("tripod")
    return r, time.monotonic() - t


@pytest.fixture(scope="module")
def square_run():
    return _quiet_run("square")


def _setup(sc):
    seams, _ = _seams(sc)
    S = subdivide(sc.complex, sc.h, seams)
    return S, _build_region(sc, S, None), Tolerances.defaults(S)


# 1 ------------------------------------------------------------------------


def test_criterion_1_tripod_curve_and_interior(tripod_run):
    r, elapsed = tripod_run
    cur = r.body["suites"]["curve"]
    probe = {p["name"]: p["classification"] for p in cur["probes"]}
    checks = {
        "time<60s": elapsed < 60.0,
        "simple": cur["simple"] and cur["boundary_ok"] and cur["unique"],
        "betti1=2": cur["closure_homology"]["betti1"] == 2,
        "no torsion": cur["closure_homology"]["torsion"] == [],
        "origin out": probe["origin"] == "out",
        "non-open witness": len(cur["non_open_witnesses"]) > 0,
        "accumulation": cur["accumulation"]["pass"],
        "exit 0": r.exit_code == 0,
    }
    bad = [k for k, v in checks.items() if not v]
    _report(1, not bad, f"elapsed={elapsed:.1f}s failed={bad}")


# 2 ------------------------------------------------------------------------


def test_criterion_2_geodesic_distances(tripod_run):
    r, _ = tripod_run
    g = r.body["suites"]["geodesics"][0]
    tri_ok = (abs(g["length"] - 2.0) <= 1e-3 and g["monotone"] and len(g["history"]) == 4
              and all(b <= a for a, b in zip(g["history"][:-1], g["history"][1:])))
    errs = {}
    for name in ("square", "hyperbolic"):
        h = run(_scenario(name)).body["suites"]["geodesics"][0]
        errs[name] = abs(h["length"] - h["expected"])
    ok = tri_ok and all(e <= 1e-6 for e in errs.values())
    _report(2, ok, f"tripod={g['length']!r} rounds={len(g['history'])} errors={errs}")


# 3 ------------------------------------------------------------------------


def _sweep_ok(S, E, tol, seed=1):
    rep = cat_sweep(S, E, 50, seed, tol)
    return not rep.violations and rep.min_margin >= -tol.tol_cat, rep


def test_criterion_3a_square_sweep(square):
    S, E, tol = square
    ok, rep = _sweep_ok(S, E, tol)
    _report("3a", ok, f"square violations={len(rep.violations)} min_margin={rep.min_margin:.3g}")


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_criterion_3c_generated_regions(tripod, seed):
    R = generate_region(tripod.S, seed, 2000)
    assert homology_H1(chain_complex(tripod.S, R)).betti1 == 0
    ok, rep = _sweep_ok(tripod.S, R, tripod.tol, seed)
    _report("3c", ok, f"seed={seed} violations={len(rep.violations)} min_margin={rep.min_margin:.3g}")


@pytest.mark.xfail(strict=True, reason="the interior region has H1 = Z^2, so it is not CAT(kappa)")
def test_criterion_3b_tripod_interior(tripod):
    E = tripod.cls.region()
    ok, rep = _sweep_ok(tripod.S, E, tripod.tol)
    _report("3b", ok, f"interior violations={len(rep.violations)} min_margin={rep.min_margin:.3g}")


# 4 ------------------------------------------------------------------------


def test_criterion_4_annulus_negative_control():
    doc = BUILDERS["annulus"]()
    r = run(validate_document(doc))
    s = r.body["suites"]
    n_cat, n_conv = len(s["cat"]["violations"]), len(s["convexity"]["violations"])
    flipped = copy.deepcopy(doc)
    flipped["expect"] = "pass"
    code = run(validate_document(flipped)).exit_code
    ok = n_cat >= 1 and n_conv >= 1 and r.verdict == "violations" and r.exit_code == 0 and code == 2
    _report(4, ok, f"cat={n_cat} convexity={n_conv} exit={r.exit_code} swapped_exit={code}")


# 5 ------------------------------------------------------------------------


def _limit(S, E, tol, pts):
    rep = limit_segments(S, E, *pts, tol)
    diff = abs(rep.angle_x - rep.angle_y.estimate)
    ok = (diff <= rep.tol_angle and all(rep.contained.values())
          and all(e["reached"] for e in rep.extension.values()))
    return ok, diff


def test_criterion_5_limit_segments(square, tripod):
    out = {}
    S, E, tol = square
    out["square"] = _limit(S, E, tol, [S.locate_in_parent_face(0, xy)
                                       for xy in ((0.7, 0.8), (2.4, 1.1), (1.2, 2.5))])
    sc = _scenario("notch")
    S, E, tol = _setup(sc)
    raw = sc.plan["limit_triangles"][0]["points"]
    out["notch"] = _limit(S, E, tol, [S.from_parent(sc.complex.locate(("face", 0, d["xy"])))
                                      for d in raw])
    raw = tripod.sc.plan["limit_triangles"][0]["points"]
    out["tripod"] = _limit(tripod.S, tripod.full, tripod.tol,
                           [tripod.point(d["face"], *d["xy"]) for d in raw])
    ok = all(v[0] for v in out.values())
    _report(5, ok, " ".join(f"{k}:diff={v[1]:.2e}" for k, v in out.items()))


# 6 ------------------------------------------------------------------------


def test_criterion_6_cross_validation_and_chains(tripod_run, square_run, tripod):
    cvs = {"tripod": tripod_run[0].body["suites"]["curve"]["cross_validation"],
           "square": square_run.body["suites"]["curve"]["cross_validation"]}
    agree = all(c["tested"] > 0 and c["agree"] == c["tested"] for c in cvs.values())
    exact = tripod.C.boundary_of_boundary_is_zero() and apply_d2(tripod.C, tripod.cls.chain) == tripod.gamma.chain()
    ok = agree and exact
    _report(6, ok, " ".join(f"{k}:{c['agree']}/{c['tested']}" for k, c in cvs.items()) + f" exact={exact}")


# 7 ------------------------------------------------------------------------


def test_criterion_7_link_girth(tripod):
    S = tripod.S
    worst = max(abs(link_girth(link_graph(S, ComplexPoint.vertex(v))) - 2 * math.pi)
                for _, v in S.edge_points[0][1:-1])
    cone = check_link_condition(build_complex(cone_complex()))
    cone_run = run(_scenario("cone"))
    ok = (worst <= 1e-12 and not cone.passed and abs(cone.girth[0] - math.pi) <= 1e-12
          and cone_run.verdict == "violations")
    _report(7, ok, f"spine_error={worst:.1e} cone_girth={cone.girth[0]!r} cone={cone_run.verdict}")


# 8 ------------------------------------------------------------------------


def test_criterion_8_reproducible_reports(tripod_run, square_run, tmp_path):
    same = {"tripod": run(_scenario("tripod")).body_text() == tripod_run[0].body_text(),
            "square": run(_scenario("square")).body_text() == square_run.body_text()}
    src = tmp_path / "a.json"
    main(["example", "annulus", "--emit", str(src)])
    texts = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        main(["run", str(src), "--out", str(out)])
        texts.append(json.dumps(json.loads(out.read_text())["body"], sort_keys=True))
    same["annulus-cli"] = texts[0] == texts[1]
    _report(8, all(same.values()), f"{same}")
