import io
import json
from pathlib import Path

import pytest

from pdmodcheck.cli import main

FIXTURES = Path(__file__).parent / "fixtures"
COFFEE = str(FIXTURES / "coffee.pms")
PHI1 = "A G (!reqw & !rej) -> <<br>> F black"
PHI2 = "A G !reqw -> <<br>> F black"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_satisfied_exit_zero():
    code, out = run("check", "--system", COFFEE, "--formula", PHI1)
    assert code == 0
    assert out.startswith("holds: G |=r ")


def test_not_satisfied_exit_one():
    code, out = run("check", "--system", COFFEE, "--formula", PHI2)
    assert code == 1
    assert out.startswith("fails: G |=r ")


def test_model_mode():
    assert run("check", "--system", COFFEE, "--formula", PHI2, "--mode", "model")[0] == 0
    code, out = run("check", "--system", COFFEE, "--formula", "A G (!reqw & !rej)",
                    "--mode", "model")
    assert code == 1 and out.startswith("fails: G |= ")


@pytest.mark.parametrize("argv", [
    ("--formula", "A G &"),
    ("--formula", "<<nobody>> X black"),
    ("--formula", "A G coffee"),
    ("--formula", "F black"),
])
def test_input_errors_exit_two(argv, capsys):
    code, _ = run("check", "--system", COFFEE, *argv)
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_missing_and_malformed_system(tmp_path):
    assert run("check", "--system", str(tmp_path / "none.pms"), "--formula", "true")[0] == 2
    bad = tmp_path / "bad.pms"
    bad.write_text("agents: env, a\ntrans q $ [env=x] -> q frobnicate\n")
    assert run("check", "--system", str(bad), "--formula", "true")[0] == 2


def test_resource_guard_exit_three(capsys):
    code, _ = run("check", "--system", COFFEE, "--formula", PHI2, "--max-positions", "3")
    assert code == 3
    assert "emptiness" in capsys.readouterr().err


def test_budget_exit_three():
    code, _ = run("check", "--system", COFFEE, "--formula",
                  "<<br>> (G F black & G F white & F G !rej & (reqb U (reqw U black)))",
                  "--budget", "2")
    assert code == 3


def test_formula_file_and_stats(tmp_path):
    ff = tmp_path / "props.txt"
    ff.write_text(f"# coffee properties\n{PHI1}\n\n{PHI2}\n")
    stats = tmp_path / "stats.json"
    code, out = run("check", "--system", COFFEE, "--formula-file", str(ff), "--stats", str(stats))
    assert code == 1
    assert out.splitlines()[0].startswith("holds") and out.splitlines()[1].startswith("fails")
    data = json.loads(stats.read_text())
    assert data["mode"] == "module"
    first, second = data["results"]
    assert first["satisfied"] is True and first["certificate"] is None
    assert second["satisfied"] is False and second["certificate"]["strategy"]
    for key in ("pms", "acg", "violation", "dpw", "pwf", "emptiness", "timings"):
        assert key in first["stats"]
    assert first["stats"]["pms"]["branching"] == 6


def test_dumps():
    code, out = run("check", "--system", COFFEE, "--formula", PHI1,
                    "--dump-acg", "--dump-npta", "--dump-dpw")
    assert code == 0
    assert "ACG states=" in out and "DPW" in out and "initial" in out


def test_oracle_depth():
    code, out = run("check", "--system", COFFEE, "--formula", "<<env>> X !black",
                    "--oracle-depth", "1")
    assert code == 0
    assert "oracle (depth 1, 63 prunings): True [agrees]" in out
