import json
import subprocess
import sys

import pytest

from monoprune.cli import NO_SOLUTION, OK, USAGE, main


def test_solve_prints_program(capsys):
    assert main(["solve", "regex_matrix"]) == OK
    assert capsys.readouterr().out.strip() == "(accepts (neg (concat (neg c1) c0)))"


def test_stats_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve", "bitvec_toy", "--stats", str(a)]) == OK
    assert main(["solve", "bitvec_toy", "--stats", str(b)]) == OK
    assert a.read_bytes() == b.read_bytes()
    stats = json.loads(a.read_text())
    assert stats["solved"] and stats["mode"] == "gfa"
    assert {"dequeued", "pruned", "completeChecked", "solutionSize"} <= set(stats)
    assert "elapsedMs" not in stats


def test_analyze_then_solve_with_artifact(tmp_path, capsys):
    art = tmp_path / "swap.json"
    smt = tmp_path / "smt"
    assert main(["analyze", "bitvec_toy", "-o", str(art), "--emit-smt", str(smt)]) == OK
    assert json.loads(art.read_text())["problem"] == "bitvec_toy"
    assert any(smt.iterdir())
    capsys.readouterr()
    assert main(["solve", "bitvec_toy", "--artifact", str(art)]) == OK
    with_art = capsys.readouterr().out
    assert main(["solve", "bitvec_toy"]) == OK
    assert capsys.readouterr().out == with_art


def test_artifact_for_other_problem_rejected(tmp_path):
    art = tmp_path / "a.json"
    assert main(["analyze", "bitvec_toy", "--no-holes", "-o", str(art)]) == OK
    assert main(["solve", "regex_matrix", "--artifact", str(art)]) == USAGE


def test_fixed_orders(tmp_path):
    art = tmp_path / "a.json"
    assert main(["analyze", "bitvec_toy", "--no-holes", "--orders", "bv8=bvUnsignedLeq", "-o", str(art)]) == OK
    assert json.loads(art.read_text())["orders"] == {"bv8": "bvUnsignedLeq"}
    assert main(["analyze", "bitvec_toy", "--orders", "bv8"]) == USAGE


def test_no_solution_exit_code(capsys):
    assert main(["solve", "unrealizable", "--mode", "off", "--max-candidates", "100"]) == NO_SOLUTION
    assert "no solution" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "no_such_problem"],
        ["gen", "sql"],
        ["solve", "bitvec_toy", "--mode", "fast"],
        ["frobnicate"],
        ["solve", "bitvec_toy", "--artifact", "/nonexistent.json"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == USAGE
    capsys.readouterr()


def test_invalid_problem_file(tmp_path, capsys):
    f = tmp_path / "bad.problem"
    f.write_text("(problem bad)\n(start S)\n")
    assert main(["solve", str(f)]) == USAGE
    assert "monoprune:" in capsys.readouterr().err


def test_workers_env(monkeypatch, capsys):
    monkeypatch.setenv("MOITO_WORKERS", "two")
    assert main(["analyze", "bitvec_toy", "--no-holes"]) == USAGE
    monkeypatch.setenv("MOITO_WORKERS", "2")
    assert main(["analyze", "bitvec_toy", "--no-holes"]) == OK
    assert json.loads(capsys.readouterr().out)["problem"] == "bitvec_toy"


def test_gen_writes_files(tmp_path, capsys):
    out = tmp_path / "imp"
    assert main(["gen", "imp", "--seed", "3", "-o", str(out)]) == OK
    assert (out / "imp_swap.problem").exists()
    assert main(["bench", str(out / "imp_swap.problem"), "--modes", "gfa", "--max-size", "8"]) == OK
    assert capsys.readouterr().out.startswith("problem,mode,")


def test_module_entry_point_is_byte_stable():
    cmd = [sys.executable, "-m", "monoprune", "gen", "boolean", "--seed", "7"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and b"(problem" in a
