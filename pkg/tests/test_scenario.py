import copy
import json

import pytest

from catk.cli import main
from catk.errors import ScenarioSchemaError
from catk.homology import chain_complex, homology_H1
from catk.scenario import (
    BUILDERS,
    build_example_tripod,
    emit_scenario,
    exit_code_for,
    generate_region,
    parse_scenario,
    run,
    scenario_hash,
    square_scenario,
    validate_document,
)
from catk.subdivide import subdivide
from conftest import square_complex


def _write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc, indent=1))
    return p


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_builders_validate(name):
    sc = validate_document(BUILDERS[name]())
    assert sc.h > 0


def test_minimal_scenario_defaults():
    doc = {"format_version": 1, "complex": square_scenario()["complex"], "h": 0.5}
    sc = validate_document(doc)
    assert sc.expect == "pass" and sc.plan == {}


def test_positive_curvature_rejected(tmp_path):
    doc = square_scenario()
    doc["complex"]["kappa"] = 0.5
    with pytest.raises(ScenarioSchemaError) as err:
        parse_scenario(_write(tmp_path, doc))
    assert err.value.field == "kappa"
    assert err.value.line is not None


def test_unknown_field_rejected():
    doc = square_scenario()
    doc["plan"]["colour"] = "blue"
    with pytest.raises(ScenarioSchemaError, match="colour"):
        validate_document(doc)


def test_dangling_edge_named():
    doc = square_scenario()
    doc["complex"]["faces"][0]["sides"][1]["edge"] = 42
    with pytest.raises(ScenarioSchemaError, match="42"):
        validate_document(doc)


def test_wrong_version_rejected():
    doc = square_scenario()
    doc["format_version"] = 2
    with pytest.raises(ScenarioSchemaError):
        validate_document(doc)


def test_bad_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "format_version": 1,\n "h": }\n')
    with pytest.raises(ScenarioSchemaError) as err:
        parse_scenario(p)
    assert err.value.line == 3


def test_emit_parse_roundtrip(tmp_path):
    doc = build_example_tripod()
    p = tmp_path / "t.json"
    emit_scenario(doc, p)
    assert parse_scenario(p).hash() == scenario_hash(doc)


def test_hash_covers_semantic_fields():
    a = square_scenario()
    b = copy.deepcopy(a)
    b["plan"]["seed"] += 1
    assert scenario_hash(a) != scenario_hash(b)


def test_tripod_builder_preconditions():
    with pytest.raises(ScenarioSchemaError):
        build_example_tripod(H=2.5)


def test_curve_meets_spine_only_at_six_points(tripod):
    spine = {v for _, v in tripod.S.edge_points[0]}
    on_spine = [v for v in tripod.gamma.vertices if v in spine]
    ts = sorted(round(tripod.S.to_parent(tripod.S.locate(("vertex", v))).t - 5.0, 9) for v in on_spine)
    assert ts == [-3, -2, -1, 1, 2, 3]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_generated_regions_are_h1_trivial(tripod, seed):
    R = generate_region(tripod.S, seed, 300)
    assert R.is_closed()
    assert len(R.faces) <= 300
    r = homology_H1(chain_complex(tripod.S, R))
    assert (r.betti1, r.torsion) == (0, [])
    assert generate_region(tripod.S, seed, 300).faces == R.faces


def test_generate_single_and_full():
    S = subdivide(square_complex(), 1.0)
    assert len(generate_region(S, 0, 1).faces) == 1
    assert len(generate_region(S, 0, len(S.faces)).faces) == len(S.faces)
    with pytest.raises(ScenarioSchemaError):
        generate_region(S, 0, len(S.faces) + 1)


def test_exit_code_swap():
    assert exit_code_for("pass", "pass") == 0
    assert exit_code_for("violations", "pass") == 2
    assert exit_code_for("violations", "violations") == 0
    assert exit_code_for("pass", "violations") == 2
    assert exit_code_for("error", "violations") == 1


def test_square_run_is_reproducible():
    sc = validate_document(square_scenario())
    a, b = run(sc), run(sc)
    assert a.verdict == "pass" and a.exit_code == 0
    assert a.body_text() == b.body_text()
    assert "elapsed_s" in a.metadata and "elapsed_s" not in a.body


def test_cone_run_reports_link_violation():
    r = run(validate_document(BUILDERS["cone"]()))
    assert r.verdict == "violations"
    assert r.exit_code == 0
    assert r.body["suites"]["link"]["min_girth"] == pytest.approx(3.141592653589793)


def test_region_with_hole_skips_comparison_suites():
    from catk.scenario import _doc

    ann = BUILDERS["annulus"]()
    doc = _doc("holed", ann["complex"], 0.5)
    doc["region"] = ann["region"]
    r = run(validate_document(doc))
    assert r.verdict == "pass"
    assert "cat" not in r.body["suites"]
    assert "H1" in r.body["skipped"]["cat"]


def test_cli_validate_and_example(tmp_path, capsys):
    out = tmp_path / "sq.json"
    assert main(["example", "square", "--emit", str(out)]) == 0
    assert main(["validate", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["valid"]


def test_cli_run_square(tmp_path):
    src, rep = tmp_path / "sq.json", tmp_path / "rep.json"
    main(["example", "square", "--emit", str(src)])
    assert main(["run", str(src), "--out", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["body"]["verdict"] == "pass"
    assert set(report) == {"body", "metadata"}


def test_cli_schema_error_exit_code(tmp_path, capsys):
    doc = square_scenario()
    doc["complex"]["kappa"] = 1.0
    assert main(["validate", str(_write(tmp_path, doc))]) == 1
    assert "kappa" in capsys.readouterr().err


def test_cli_gen_region(tmp_path, capsys):
    src = tmp_path / "t.json"
    main(["example", "tripod", "--h", "0.5", "--emit", str(src)])
    out = tmp_path / "g.json"
    assert main(["gen-region", str(src), "--seed", "4", "--cells", "60", "--out", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["faces"] == 60
    sc = parse_scenario(out)
    assert sc.doc["region"] == {"kind": "generated", "seed": 4, "cells": 60}


def test_negative_control_flag_must_be_boolean():
    doc = BUILDERS["annulus"]()
    doc["plan"]["negative_control"] = "yes"
    with pytest.raises(ScenarioSchemaError, match="negative_control"):
        validate_document(doc)
