from __future__ import annotations

import json
import subprocess
import sys

import pytest

from finloc import __version__
from finloc.cli import main
from finloc.errors import UnknownSuite
from finloc.families import alternating
from finloc.formats import parse_system
from finloc.levine import solve
from finloc.suites import SUITES, SuiteReport, run_suite

Z3 = '{"family": "cyclic", "n": 3}'
Z2 = '{"family": "cyclic", "n": 2}'
ROOT = '{"parameters": ["a"], "variables": ["x"], "relators": ["x^2 a"], "parameter_values": {"a": 1}}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- suites ----------------------------------------------------------------------------

def test_run_suite_nerve():
    rep = run_suite("nerve", seed=1)
    assert rep.ok and rep.counterexamples == [] and rep.instances > 0
    assert rep.passed == rep.instances


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        run_suite("")
    with pytest.raises(UnknownSuite):
        run_suite("no-such-suite")


def test_levine_witness_embeds_the_a5_system():
    rep = run_suite("levine-witness")
    assert rep.ok
    a5 = [n for n in rep.notes if n["G"] == "A5"]
    assert len(a5) == 1 and a5[0]["H"] == 60 and a5[0]["solutions"] >= 2
    # the embedded system is complete: re-parse it and solve it again
    A5 = alternating(5)
    doc = {"variables": a5[0]["variables"], "relators": a5[0]["system"].split("; ")}
    sys_ = parse_system(json.dumps(doc), A5)
    assert len(solve(A5, sys_)) == a5[0]["solutions"]


def test_report_rendering():
    rep = SuiteReport("demo", 7, {"order_cap": 10, "lattice_cap": 5})
    rep.check("a", True, {"i": 0})
    rep.check("a", False, {"i": 1})
    rep.wall_time = 1.5
    d = rep.to_dict()
    assert d["status"] == "fail" and d["instances"] == 2 and d["passed"] == 1
    assert d["counterexamples"] == [{"check": "a", "instance": {"i": 1}}]
    assert d["version"] == __version__ and "wall_time" not in d
    assert rep.to_dict(timing=True)["wall_time"] == 1.5
    text = rep.render_text()
    assert "suite: demo\nseed: 7\ncaps: lattice_cap=5 order_cap=10\n" in text
    assert "  a: 1/2\n" in text and 'counterexample: {"check": "a", "instance": {"i": 1}}' in text
    assert json.loads(rep.render_json()) == d


def test_reports_are_reproducible():
    for name in ("nerve", "levine-systems", "lemma511", "equations"):
        a, b = run_suite(name, seed=5), run_suite(name, seed=5)
        assert a.render_json() == b.render_json()
        assert a.render_text() == b.render_text()


def test_seed_changes_sampled_instances():
    a, b = run_suite("levine-systems", seed=1), run_suite("levine-systems", seed=2)
    assert a.ok and b.ok
    assert a.render_json() != b.render_json()


def test_every_suite_is_registered():
    expected = {"nerve", "keune", "baumslag", "section4", "levine", "prop58", "prop510",
                "lemma511", "hr", "ns", "power-identity", "equations"}
    assert expected <= set(SUITES)


# -- verbs -----------------------------------------------------------------------------

def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", '{"family": "quaternion"}')
    d = json.loads(out)
    assert code == 0
    assert d["order"] == 8 and d["nilpotency_class"] == 2 and d["center_order"] == 2
    assert d["abelianization"] == [2, 2] and d["invisible_subgroup_orders"] == []


def test_analyze_file_and_stdin(capsys, tmp_path, monkeypatch):
    f = tmp_path / "g.json"
    f.write_text('{"family": "symmetric", "n": 3}')
    code, out, _ = run(capsys, "analyze", str(f))
    assert code == 0 and json.loads(out)["invisible_subgroup_orders"] == [3]
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO('{"family": "alternating", "n": 5}'))
    code, out, _ = run(capsys, "analyze", "-")
    assert code == 0 and json.loads(out)["derived_order"] == 60


def test_localize(capsys):
    code, out, _ = run(capsys, "localize", '{"family": "cyclic", "n": 6}', "--primes", "2")
    d = json.loads(out)
    assert code == 0 and d["local_order"] == 3 and d["primes"] == [2]
    assert d["eta"] == [0, 1, 2, 0, 1, 2] and d["local_table"] is None
    code, out, _ = run(capsys, "localize", '{"family": "quaternion"}', "--primes", "3", "--table")
    assert len(json.loads(out)["local_table"]) == 8


def test_localize_errors(capsys):
    code, _, err = run(capsys, "localize", '{"family": "symmetric", "n": 3}', "--primes", "2")
    assert code == 2 and "NotNilpotent" in err
    code, _, err = run(capsys, "localize", Z3, "--primes", "4")
    assert code == 2
    code, _, err = run(capsys, "localize", Z3, "--primes", "two")
    assert code == 2 and "comma-separated" in err


def test_solve_system_examples(capsys):
    code, out, _ = run(capsys, "solve-system", Z3, ROOT)
    assert code == 0 and json.loads(out) == {"group_order": 3, "count": 1, "solutions": [{"x": 1}]}
    code, out, _ = run(capsys, "solve-system", Z2, ROOT)
    assert code == 0 and json.loads(out)["count"] == 0
    code, out, _ = run(capsys, "solve-system", Z3, '{"variables": [], "relators": []}')
    assert json.loads(out) == {"group_order": 3, "count": 1, "solutions": [{}]}


def test_solve_system_over_all_parameters(capsys):
    doc = '{"parameters": ["a"], "variables": ["x"], "relators": ["x^2 a"]}'
    code, out, _ = run(capsys, "solve-system", Z3, doc)
    d = json.loads(out)
    assert code == 0 and d["solution_counts"] == [1, 1, 1] and d["satisfies"] is True
    code, out, _ = run(capsys, "solve-system", Z2, doc)
    assert json.loads(out)["solution_counts"] == [2, 0]


def test_search_cap_reports_the_bound(capsys):
    doc = '{"variables": ["x", "y", "z"], "relators": []}'
    code, _, err = run(capsys, "solve-system", '{"family": "cyclic", "n": 20}', doc, "--search-cap", "100")
    assert code == 2 and "8000" in err and "(bound 8000)" in err


def test_verify_exit_codes(capsys):
    code, out, err = run(capsys, "verify", "nerve")
    assert code == 0 and out.startswith("suite: nerve\n") and "status: pass" in out
    assert "wall time" in err
    code, out, _ = run(capsys, "verify", "equations", "--json", "--seed", "3")
    d = json.loads(out)
    assert code == 0 and d["seed"] == 3 and d["status"] == "pass"
    code, _, err = run(capsys, "verify", "nope")
    assert code == 2 and "unknown suite" in err


def test_verify_counterexample_exit_code(capsys, monkeypatch):
    def failing(rep, rng, caps):
        rep.check("always fails", False, {"id": 0})

    monkeypatch.setitem(SUITES, "failing", failing)
    code, out, _ = run(capsys, "verify", "failing")
    assert code == 1 and "status: fail" in out and "counterexample:" in out


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "verify", "nerve", "--seed", "x")[0] == 2
    code, _, err = run(capsys, "analyze", '{"family": "cyclic"')
    assert code == 2 and "ParseError" in err
    code, _, err = run(capsys, "analyze", "/no/such/file.json")
    assert code == 2
    code, _, err = run(capsys, "analyze", '{"family": "symmetric", "n": 8}')
    assert code == 2 and "OrderCapExceeded" in err
    code, _, _ = run(capsys, "--version")
    assert code == 0


def test_console_script_runs():
    out = subprocess.run([sys.executable, "-m", "finloc.cli", "analyze", Z3],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["order"] == 3
