import json

import pytest

from pjp.cli import EXIT_FAIL, EXIT_LIMIT, EXIT_OK, EXIT_USAGE, main, parse_size
from support import FIXTURES, fixture_paths

EX1 = [str(p) for p in fixture_paths("example1")]
EX2 = [str(p) for p in fixture_paths("example2")]
PLAN1 = str(FIXTURES / "example1" / "plan.txt")
PLAN2 = str(FIXTURES / "example2" / "plan.txt")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_g0(capsys, tmp_path):
    code, out, err = run(capsys, "solve", *map(str, fixture_paths("g0")), "--metrics")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["status"] == "solved" and len(doc["plan"]) == 2
    assert doc["metrics"]["length"] == 2
    assert "|gen|=" in err
    dest = tmp_path / "r.json"
    assert main(["solve", *map(str, fixture_paths("g0")), "--out", str(dest)]) == EXIT_OK
    assert json.loads(dest.read_text())["plan"] == doc["plan"]


def test_solve_timeout_exit(capsys):
    code, out, _ = run(capsys, "solve", *map(str, fixture_paths("g5")), "--timeout", "0.5")
    assert code == EXIT_LIMIT
    assert json.loads(out)["limit"] == "timeout"


def test_solve_depth_exit(capsys):
    code, out, _ = run(capsys, "solve", *map(str, fixture_paths("g3")), "--max-depth", "1")
    assert code == EXIT_FAIL
    assert json.loads(out)["status"] == "depth"


def test_malformed_domain(capsys, tmp_path):
    bad = tmp_path / "d.pddl"
    bad.write_text("(define (domain x) (:functions (f ?a - agent)")
    code, _, err = run(capsys, "solve", str(bad), EX1[1])
    assert code == EXIT_USAGE
    assert "error" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "solve", "/nonexistent/domain.pddl", EX1[1])
    assert code == EXIT_USAGE


def test_bad_arguments(capsys):
    assert main(["solve"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


@pytest.mark.parametrize("fn,code,value", [
    ("dom_1st_poly", EXIT_OK, "12"),
    ("linear_reg", EXIT_FAIL, "20.24"),
    ("1st_poly", EXIT_FAIL, "24"),
])
def test_validate_example2(capsys, fn, code, value):
    got, out, _ = run(capsys, "validate", *EX2, PLAN2, "--pr-override", f"1st_poly={fn}",
                      "--query", "b[b]:shared(sa)")
    assert got == code
    assert f"b[b]:shared(sa) = {value}" in out


def test_validate_empty_plan(capsys, tmp_path):
    empty = tmp_path / "plan.txt"
    empty.write_text("")
    code, out, _ = run(capsys, "validate", *EX2, str(empty))
    assert code == EXIT_FAIL
    assert "goal false" in out


def test_validate_inapplicable(capsys, tmp_path):
    plan = tmp_path / "plan.txt"
    plan.write_text("(stop)\n")
    code, out, _ = run(capsys, "validate", *EX1, str(plan))
    assert code == EXIT_FAIL and out.startswith("step 1:")


@pytest.mark.parametrize("item", ["1st_poly", "1st_poly=quartic"])
def test_bad_override(capsys, item):
    code, _, err = run(capsys, "validate", *EX2, PLAN2, "--pr-override", item)
    assert code == EXIT_USAGE


def test_trace_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "trace", *EX1, PLAN1, "--query", "b[b]:shared(sa)",
                       "--query", "o[b]:shared(sa)")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[2] == "b[b]:shared(sa),3,4,5,6,6.33,6.67,7,7.33"
    assert lines[3] == "o[b]:shared(sa),-,4,-,6,-,-,7,-"  # - marks an unseen cell
    dest = tmp_path / "t.csv"
    assert main(["trace", *EX1, PLAN1, "--query", "b[c]:shared(sa)", "--out", str(dest)]) == EXIT_OK
    assert dest.read_text().splitlines()[2] == "b[c]:shared(sa),3,4,5,6,7,8,9,10"


@pytest.mark.parametrize("query", ["q[b]:shared(sa)", "b[b]shared(sa)", "b[z]:shared(sa)", "b[b]:nothing(sa)"])
def test_trace_bad_query(capsys, query):
    code, _, err = run(capsys, "trace", *EX1, PLAN1, "--query", query)
    assert code == EXIT_USAGE


def test_check_model(capsys):
    code, out, _ = run(capsys, "check-model", *EX1, "--walks", "10", "--length", "6")
    assert code == EXIT_OK
    assert "1st_poly" in out and "FAIL" not in out


def test_check_model_broken_plugin(capsys):
    code, out, _ = run(capsys, "check-model", *EX1, "--walks", "10", "--length", "6",
                       "--pr-plugin", "1st_poly=support:broken_pr")
    assert code == EXIT_FAIL
    row = next(l for l in out.splitlines() if l.strip().startswith("1st_poly"))
    assert "broken_pr" in row and "FAIL" in row


def test_plugin_used_for_prediction(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", *EX2, PLAN2, "--pr-plugin", "1st_poly=support:doubling_pr",
                       "--query", "b[c]:secret(sa)")
    assert code in (EXIT_OK, EXIT_FAIL)
    assert "b[c]:secret(sa) = " in out


@pytest.mark.parametrize("item", ["1st_poly=support", "1st_poly=nosuchmodule:x", "1st_poly=support:nothing"])
def test_bad_plugin(capsys, item):
    code, _, _ = run(capsys, "check-model", *EX1, "--pr-plugin", item)
    assert code == EXIT_USAGE


def test_check_model_static_only(capsys, tmp_path):
    src = fixture_paths("example1")[0].read_text()
    start = src.index("(:rules")
    end = src.index("(:visibility")
    dom = tmp_path / "domain.pddl"
    dom.write_text(src[:start] + src[end:])
    code, out, _ = run(capsys, "check-model", str(dom), "--walks", "20")
    assert code == EXIT_OK
    rows = [l.split() for l in out.splitlines()[2:]]
    assert [r[0] for r in rows] == ["static"]
    assert rows[0][-1] == "pass"


@pytest.mark.parametrize("text,n", [("512", 512), ("2K", 2000), ("1GiB", 1024 ** 3), ("1.5MB", 1_500_000)])
def test_parse_size(text, n):
    assert parse_size(text) == n


def test_parse_size_rejects():
    with pytest.raises(Exception):
        parse_size("lots")
