import json

import pytest

from tensorcert.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_canon_inline(capsys):
    assert run(capsys, "canon", "-e", "F_{ab}+F_{ba}")[:2] == (0, "0\n")


def test_canon_file_with_declarations(tmp_path, capsys):
    f = tmp_path / "e.txt"
    f.write_text("tensor Q rank=2 antisym=(1,2)\n# comment\nQ_{a b} + Q_{b a}\nQ_{b a}\n")
    code, out, _ = run(capsys, "canon", str(f), "--no-builtin")
    assert code == 0 and out.splitlines() == ["0", "-Q_{a b}"]
    code, out, _ = run(capsys, "canon", str(f), "--no-builtin", "--format", "json")
    assert json.loads(out)[1]["canonical"] == "-Q_{a b}"


def test_canon_bianchi_flag(capsys):
    expr = "R_{a b c d} + R_{a c d b} + R_{a d b c}"
    assert run(capsys, "canon", "-e", expr)[1].strip() != "0"
    assert run(capsys, "canon", "-e", expr, "--bianchi")[1].strip() == "0"


@pytest.mark.parametrize("argv", [
    ("canon", "-e", "F_{a b} +"),
    ("canon", "-e", "Nope_{a}"),
    ("verify", "missing.file"),
    ("paper-suite", "--bogus"),
    ("solve-lambdas", "--lambda", "oops"),
    ("canon",),
])
def test_usage_and_parse_errors_exit_2(capsys, argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_parse_error_prints_span(capsys):
    code, _, err = run(capsys, "canon", "-e", "F_{a b} * )")
    assert code == 2 and "^" in err and "at " in err


def test_verify_script(tmp_path, capsys):
    s = tmp_path / "s.script"
    s.write_text("tensor X rank=2 sym=(1,2)\nassert_equal X_{a b} == X_{b a}\n")
    code, out, _ = run(capsys, "verify", str(s))
    assert code == 0 and "1/1 assertions passed" in out
    s.write_text("tensor X rank=2\nassert_equal X_{a b} == X_{b a}\n")
    code, out, _ = run(capsys, "verify", str(s), "--format", "json", "--no-timings")
    assert code == 1 and json.loads(out)["passed"] is False
    s.write_text("x: eq @missing\n")
    assert run(capsys, "verify", str(s))[0] == 2


def test_solve_lambdas(capsys):
    code, out, _ = run(capsys, "solve-lambdas", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["product"] == "-1/12" and d["free"] == ["mu"]
    code, out, _ = run(capsys, "solve-lambdas", "--lambda", "mu=0")
    assert code == 0 and "lambda6 = 0" in out


def test_oracle_subcommand(capsys):
    code, out, _ = run(capsys, "oracle", "@curv.op - @curv.int.ref", "--trials", "2")
    assert code == 0 and out.startswith("PASS")
    code, out, _ = run(capsys, "oracle", "curv.op", "--trials", "1", "--format", "json")
    assert code == 1 and json.loads(out)["witness"]
    code, out, _ = run(capsys, "oracle", "curv.op", "--trials", "1", "--flat", "--neutral")
    assert code == 0


def test_paper_suite_mutation_fails(capsys):
    code, out, _ = run(capsys, "paper-suite", "--mutate", "drop-ricci", "--skip-oracle")
    assert code == 1 and "FAILED" in out
