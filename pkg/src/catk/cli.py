"""Command line interface: validate, run, example, gen-region."""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from .errors import CatkError
from .scenario import (
    BUILDERS,
    _seams,
    emit_scenario,
    generate_region,
    parse_scenario,
    run,
)
from .subdivide import subdivide


def _cmd_validate(args):
    sc = parse_scenario(args.file)
    print(json.dumps({"valid": True, "name": sc.name, "hash": sc.hash(), "expect": sc.expect}))
    return 0


def _cmd_run(args):
    sc = parse_scenario(args.file)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run(sc, seed=args.seed, h=args.h)
    text = res.text()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(json.dumps({"verdict": res.verdict, "exit_code": res.exit_code,
                          "violations": len(res.body["violations"]), "report": args.out}))
    else:
        sys.stdout.write(text)
    return res.exit_code


def _cmd_example(args):
    kw = {k: v for k, v in (("W", args.W), ("H", args.H), ("h", args.h)) if v is not None}
    if args.name != "tripod":
        kw.pop("W", None)
        kw.pop("H", None)
    doc = BUILDERS[args.name](**kw)
    text = emit_scenario(doc, args.emit)
    if not args.emit:
        sys.stdout.write(text)
    return 0


def _cmd_gen_region(args):
    sc = parse_scenario(args.file)
    seams, _ = _seams(sc)
    S = subdivide(sc.complex, sc.h, seams)
    R = generate_region(S, args.seed, args.cells)
    doc = dict(sc.doc)
    doc.pop("curve", None)
    doc["region"] = {"kind": "generated", "seed": args.seed, "cells": args.cells}
    # fixed sample points need not lie in a random region
    keep = ("seed", "cat_triangles", "cat_pairs", "convexity_pairs", "tolerances", "budget")
    plan = {k: v for k, v in sc.plan.items() if k in keep}
    plan["suites"] = ["link", "homology", "cat", "convexity"]
    doc["plan"] = plan
    summary = {"faces": len(R.faces), "edges": len(R.edges), "vertices": len(R.vertices),
               "betti1": 0}
    if args.out:
        emit_scenario(doc, args.out)
        print(json.dumps(summary))
    else:
        sys.stdout.write(emit_scenario(doc))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="catk", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", help="check a scenario file against the schema")
    v.add_argument("file")
    v.set_defaults(func=_cmd_validate)
    r = sub.add_parser("run", help="run a scenario's verification plan")
    r.add_argument("file")
    r.add_argument("--seed", type=int)
    r.add_argument("--h", type=float)
    r.add_argument("--out")
    r.set_defaults(func=_cmd_run)
    e = sub.add_parser("example", help="emit a built-in scenario")
    e.add_argument("name", choices=sorted(BUILDERS))
    e.add_argument("--W", type=float)
    e.add_argument("--H", type=float)
    e.add_argument("--h", type=float)
    e.add_argument("--emit", help="output file (stdout when omitted)")
    e.set_defaults(func=_cmd_example)
    g = sub.add_parser("gen-region", help="attach a random H1-trivial region to a scenario")
    g.add_argument("file")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--cells", type=int, required=True)
    g.add_argument("--out", help="output file (stdout when omitted)")
    g.set_defaults(func=_cmd_gen_region)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CatkError as err:
        print(f"catk: error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"catk: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
