import json

import pytest

from lieze import selftest
from lieze.cli import main
from lieze.parser import Scope, parse_expression
from lieze.selftest import data_path

ZOOM = str(data_path("zoomeron.lie"))
ALG = str(data_path("reduced_algebra.lie"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_symmetries_text(capsys):
    code, out, _ = run(capsys, "symmetries", ZOOM)
    assert code == 0
    assert "symmetry algebra dimension: 5" in out
    assert "span vs reference (V1, V2, V3, V4, V5): PASS" in out


def test_symmetries_json_reparses(capsys):
    code, out, _ = run(capsys, "symmetries", ZOOM, "--format", "json")
    rep = json.loads(out)
    assert rep["symmetries"]["span_match"] == "PASS"
    assert rep["input_digest"].startswith("sha256:")
    sc = Scope(symbols=frozenset({"x", "y", "t"}), functions={"u": None})
    for g in rep["symmetries"]["generators"]:
        for text in g["components"].values():
            parse_expression(text, sc)


def test_smaller_ansatz_is_contained(capsys):
    code, out, _ = run(capsys, "symmetries", ZOOM, "--ansatz", "1,1", "--json")
    assert code == 0 and json.loads(out)["symmetries"]["contained_in_reference"] is True


def test_missing_equation_exit_2(tmp_path, capsys):
    f = tmp_path / "p.lie"
    f.write_text("independent x\ndependent u\n")
    assert run(capsys, "symmetries", str(f))[0] == 2


def test_syntax_error_exit_2(tmp_path, capsys):
    f = tmp_path / "p.lie"
    f.write_text("independent x\ndependent u\nequation D(u,x) +\nleading D(u,x)\n")
    code, _, err = run(capsys, "symmetries", str(f))
    assert code == 2 and "line 3" in err


def test_bad_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["symmetries", ZOOM, "--ansatz", "two"])
    assert exc.value.code == 2
    assert run(capsys, "verify", ZOOM)[0] == 2
    assert run(capsys, "verify", ZOOM, "--solution", "nope")[0] == 2
    assert run(capsys, "verify", ZOOM, "--solution", "eq216", "--transform", "V3")[0] == 2
    assert run(capsys, "verify", "/no/such/file.lie", "--all")[0] == 2


def test_commute_tables(capsys):
    code, out, _ = run(capsys, "commute", ALG, "--json")
    rep = json.loads(out)["commute"]
    assert code == 0 and rep["table_match"] == "PASS" and rep["reference_matches"] == 16
    assert rep["entries"][1][2] == "W4"


def test_commute_single_field(tmp_path, capsys):
    f = tmp_path / "one.lie"
    f.write_text("independent x\ndependent u\nequation D(u,x,x)\nleading D(u,x,x)\nfield A { x = 1; }\n")
    code, out, _ = run(capsys, "commute", str(f), "--json")
    assert code == 0 and json.loads(out)["commute"]["entries"] == [["0"]]


def test_dependent_basis_exit_3(tmp_path, capsys):
    f = tmp_path / "dep.lie"
    f.write_text("independent x\ndependent u\nequation D(u,x,x)\nleading D(u,x,x)\n"
                 "field A { x = 1; }\nfield B { x = 2; }\n")
    assert run(capsys, "commute", str(f))[0] == 3


def test_rank_deficient_exit_3(tmp_path, capsys):
    f = tmp_path / "r.lie"
    f.write_text("independent x y\ndependent u\nequation D(u,x,y)\nleading D(u,x,y)\n"
                 "substitution R { u = F; mu = x + y; delta = 2*x + 2*y; }\n")
    assert run(capsys, "reduce", str(f))[0] == 3


def test_reduce_v4(capsys):
    code, out, _ = run(capsys, "reduce", ZOOM, "--subst", "V4", "--json")
    red = json.loads(out)["reduce"]["reductions"][0]["stage1"]
    assert code == 0 and red["reference"]["verdict"] == "PROPORTIONAL"
    assert red["consistency"]["passed"]


def test_reduce_v1_stage2(capsys):
    code, out, _ = run(capsys, "reduce", ZOOM, "--subst", "V1", "--stage2", "--json")
    red = json.loads(out)["reduce"]["reductions"][0]
    assert code == 0 and red["stage2"]["reference"]["verdict"] in ("PROPORTIONAL", "NOT PROPORTIONAL")
    assert red["stage2"]["consistency"]["passed"]


def test_reduce_missing_exit_2(capsys):
    assert run(capsys, "reduce", ZOOM, "--subst", "missing")[0] == 2


def test_verify_solutions(capsys):
    code, out, _ = run(capsys, "verify", ZOOM, "--all", "--json")
    verdicts = {v["name"]: v["verdict"] for v in json.loads(out)["verify"]["verifications"]}
    assert code == 0
    assert verdicts == {"eq216": "PASS (exact)", "sec32": "PASS (exact)", "sec33a": "PASS (exact)",
                        "sec33b": "FAIL", "sec32_airy": "SKIPPED"}


def test_verify_transform(capsys):
    code, out, _ = run(capsys, "verify", ZOOM, "--solution", "eq216", "--transform", "V5:1.0")
    assert code == 0 and "PASS" in out


def test_reports_are_byte_stable(capsys):
    a = run(capsys, "reduce", ZOOM, "--subst", "V3", "--stage2", "--json")[1]
    b = run(capsys, "reduce", ZOOM, "--subst", "V3", "--stage2", "--json")[1]
    assert a == b


def test_seed_changes_samples(capsys):
    a = json.loads(run(capsys, "verify", ZOOM, "--solution", "sec33b", "--json", "--seed", "1")[1])
    b = json.loads(run(capsys, "verify", ZOOM, "--solution", "sec33b", "--json", "--seed", "2")[1])
    assert a["verify"]["verifications"][0]["samples"] != b["verify"]["verifications"][0]["samples"]
    assert a["settings"]["seed"] == 1


def test_corrupted_table_names_commutator_criterion(tmp_path):
    text = data_path("zoomeron.lie").read_text()
    f = tmp_path / "z.lie"
    f.write_text(text.replace("V1: 0, -2*V2, 0, 0, 0;", "V1: 0, 2*V2, 0, 0, 0;"))
    summary = selftest.run(f, only=[1, 2])
    assert summary["criteria"][0]["passed"]
    assert summary["first_failure"] == "criterion 2 (commutator tables)"
    assert "[V1,V2]" in summary["criteria"][1]["detail"]["zoomeron"]["mismatches"]
