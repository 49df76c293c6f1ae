"""End-to-end tests for the command-line driver, run in process via main(argv)."""

import json
import re

import pytest

from csppat.catalog import build, max2_pattern, negtrans_pattern, tree_pattern
from csppat.cli import main
from csppat.generators import Formula3Sat, gen_3sat_instance, gen_pn_family
from csppat.model import CspInstance, neg
from csppat.serialize import parse, serialise


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        path = tmp_path / name
        text = obj if isinstance(obj, str) else serialise(obj)
        path.write_text(text + "\n", encoding="utf-8")
        return str(path)

    return _write


def _alldiff_3x2():
    neq = frozenset({(0, 0), (1, 1)})
    return CspInstance.build([[0, 1]] * 3, {(0, 1): neq, (0, 2): neq, (1, 2): neq})


def _xor_instance():
    return CspInstance.build([[0, 1]] * 2, {(0, 1): {(0, 0), (1, 1)}})


def _cherry_instance():
    # The allowed pair (0, 0) on (0, 1) plus two clashes makes Negtrans occur.
    return CspInstance.build(
        [[0, 1]] * 3,
        {(0, 1): {(1, 1)}, (0, 2): {(0, 0)}, (1, 2): {(0, 0)}},
    )


def test_solve_auto_reports_class_and_assignment(write, capsys):
    path = write("equal.json", CspInstance.build([[0, 1]] * 2, {(0, 1): {(0, 1), (1, 0)}}))
    assert main(["solve", path]) == 0
    out = capsys.readouterr().out
    assert "class: tree" in out
    assert "status: solution" in out
    assert re.search(r"assignment: 0=\d 1=\d", out)


def test_solve_negtrans_pigeonhole_exits_unsat(write, capsys):
    path = write("alldiff.json", _alldiff_3x2())
    assert main(["solve", "--class", "negtrans", path]) == 1
    assert "status: unsatisfiable" in capsys.readouterr().out


def test_solve_class_rejection_prints_witness(write, capsys):
    path = write("cherry.json", _cherry_instance())
    assert main(["solve", "--class", "negtrans", path]) == 2
    out = capsys.readouterr().out
    assert "status: not-in-class" in out
    assert "varmap:" in out and "pointmap:" in out


def test_solve_tree_rejects_cycle_with_cycle_witness(write, capsys):
    neq = frozenset({(0, 0), (1, 1)})
    triangle = CspInstance.build([[0, 1]] * 3, {(0, 1): neq, (0, 2): neq, (1, 2): neq})
    assert main(["solve", "--class", "tree", write("tri.json", triangle)]) == 2
    assert "cycle:" in capsys.readouterr().out


def test_solve_generic_handles_any_instance(write, capsys):
    path = write("cherry.json", _cherry_instance())
    assert main(["solve", "--class", "generic", path]) == 0
    assert "status: solution" in capsys.readouterr().out


def test_check_pn_forbids_pivot(write, capsys):
    path = write("pn3.json", gen_pn_family(3))
    assert main(["check", path, "pivot:1"]) == 0
    assert "forbids: true" in capsys.readouterr().out


def test_check_reports_first_occurrence(write, capsys):
    path = write("cherry.json", _cherry_instance())
    assert main(["check", path, "negtrans"]) == 2
    out = capsys.readouterr().out
    assert "forbids: false" in out
    assert "pattern-index: 0" in out
    assert "varmap:" in out


def test_occurs_pattern_in_instance(write, capsys):
    pattern = write("max2.json", max2_pattern())
    target = write("xor.json", _xor_instance())
    assert main(["occurs", pattern, target]) == 0
    out = capsys.readouterr().out
    assert "occurs: true" in out
    assert "pointmap:" in out


def test_occurs_none(write, capsys):
    target = write("pn4.json", gen_pn_family(4))
    assert main(["occurs", "pivot:1", target]) == 2
    assert "occurs: none" in capsys.readouterr().out


def test_occurs_pattern_in_pattern_by_catalog_name(capsys):
    assert main(["occurs", "tree", "btp"]) == 0
    assert "occurs: true" in capsys.readouterr().out


def test_occurs_ordered_pattern_needs_order(write, capsys):
    target = write("chain.json", _cherry_instance())
    assert main(["occurs", "tree", target, "--order", "2,0,1"]) in (0, 2)
    capsys.readouterr()


def test_classify_catalog_cycle(capsys):
    assert main(["classify-pattern", "cycle:3"]) == 0
    out = capsys.readouterr().out
    assert "verdict: intractable" in out
    assert "family: cycle" in out
    assert "parameter: 3" in out


def test_classify_pivot_embeddable(write, capsys):
    path = write("negged.json", neg(negtrans_pattern()))
    assert main(["classify-pattern", path]) == 0
    out = capsys.readouterr().out
    assert "verdict: pivot-embeddable" in out
    assert "parameter: 1" in out


def test_classify_rejects_non_negative_pattern(write, capsys):
    path = write("negtrans.json", negtrans_pattern())
    assert main(["classify-pattern", path]) == 3
    assert "error:" in capsys.readouterr().err


def test_generate_pn_writes_file(write, tmp_path, capsys):
    out = str(tmp_path / "pn.json")
    assert main(["generate", "pn", "--n", "3", "--out", out]) == 0
    assert "wrote:" in capsys.readouterr().out
    with open(out, encoding="utf-8") as fh:
        assert parse(fh.read()) == gen_pn_family(3)


def test_generate_random_to_stdout_is_json(capsys):
    assert main(["generate", "random", "--n", "4", "--d", "2", "--seed", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "instance"


def test_generate_random_seed_env(tmp_path, capsys, monkeypatch):
    a, b, c = (str(tmp_path / name) for name in ("a.json", "b.json", "c.json"))
    monkeypatch.setenv("CSPPAT_SEED", "7")
    main(["generate", "random", "--out", a])
    monkeypatch.delenv("CSPPAT_SEED")
    main(["generate", "random", "--seed", "7", "--out", b])
    main(["generate", "random", "--seed", "8", "--out", c])
    capsys.readouterr()
    texts = [open(p, encoding="utf-8").read() for p in (a, b, c)]
    assert texts[0] == texts[1]
    assert texts[0] != texts[2]


def test_generate_alldiff_with_domains(tmp_path, capsys):
    out = str(tmp_path / "ad.json")
    assert main(["generate", "alldiff", "--domains", "0,1;1,2;0,2", "--out", out]) == 0
    capsys.readouterr()
    with open(out, encoding="utf-8") as fh:
        p = parse(fh.read())
    assert p.domains[1] == frozenset({1, 2})


def test_generate_3sat_from_dimacs(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 2 2\n1 -2 2 0\n-1 2 2 0\n", encoding="utf-8")
    out = str(tmp_path / "sat.json")
    assert main(["generate", "3sat", "--cnf", str(cnf), "--ell", "2", "--out", out]) == 0
    capsys.readouterr()
    expected = gen_3sat_instance(Formula3Sat(2, [(1, -2, 2), (-1, 2, 2)]), 2).instance
    with open(out, encoding="utf-8") as fh:
        assert parse(fh.read()) == expected


def test_generate_3sat_requires_cnf(capsys):
    assert main(["generate", "3sat"]) == 3
    assert "usage error" in capsys.readouterr().err


def test_bench_emits_parseable_records(capsys):
    assert main(["bench", "alldiff", "--sizes", "3,4", "--runs", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
    for line in lines:
        assert re.fullmatch(
            r"family=alldiff n=\d+ d=\d+ run=\d+ seconds=\d+\.\d{6} status=\S+", line
        )


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["solve", "/nonexistent/instance.json"],
        ["check", "/nonexistent/instance.json", "pivot:1"],
        ["occurs", "pivot:xyz", "btp"],
        ["solve", "--class", "btp", "--order", "a,b", "no-file.json"],
    ],
)
def test_usage_errors_exit_three(argv, capsys):
    assert main(argv) == 3
    assert capsys.readouterr().err


def test_solve_rejects_pattern_file(write, capsys):
    path = write("tree.json", tree_pattern())
    assert main(["solve", path]) == 3
    assert "error:" in capsys.readouterr().err
