import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from cardforge.cli import main, parse_fail_line, parse_inputs, parse_omit
from cardforge.errors import ParseError
from cardforge.primitives import copy_gadget_protocol
from cardforge.textio import format_protocol

from conftest import AND2

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture()
def and2_file(tmp_path, capsys):
    path = tmp_path / "and2.protocol"
    assert run(capsys, "compile", "--formula", AND2, "-o", path)[0] == 0
    return path


@pytest.fixture()
def mutated_copy(tmp_path):
    text = format_protocol(copy_gadget_protocol())
    text = text.replace("13,14,15,16,17,18 cyclic", "13,14,15,16,17,18 explicit:1,2,3,4,5,6")
    path = tmp_path / "mutated.protocol"
    path.write_text(text)
    return path


def test_input_syntax():
    assert parse_inputs("a=0110,b=1010") == ((0, 1, 1, 0), (1, 0, 1, 0))
    assert parse_omit("a=1,3,b=2,4") == {"A": {1, 3}, "B": {2, 4}}
    with pytest.raises(ParseError):
        parse_inputs("a=01")
    with pytest.raises(ParseError):
        parse_omit("1,3")


def test_compile_then_verify(and2_file, capsys):
    code, out, _ = run(capsys, "verify", "--protocol", and2_file, "--mode", "committed", "--formula", AND2,
                       "--also", "read-only", "--also", "correctness")
    assert code == 0
    assert out.splitlines() == ["security[committed]: PASS", "read-only: PASS", "correctness: PASS"]


def test_verify_with_truth_file(and2_file, capsys):
    code, out, _ = run(capsys, "verify", "--protocol", and2_file, "--truth", GOLDEN / "and2.truth",
                       "--mode", "output-aware", "--also", "correctness")
    assert code == 0 and out.endswith("correctness: PASS\n")


def test_mutated_gadget_fails_and_replays(mutated_copy, capsys):
    code, out, _ = run(capsys, "verify", "--protocol", mutated_copy)
    assert code == 2
    line = out.strip()
    first, second, prefix, p1, p2 = parse_fail_line(line)
    assert (first, second) == (((0,), (0,)), ((1,), (0,)))
    assert p1 != p2 and len(prefix) > 1
    code, out, _ = run(capsys, "inspect", "--protocol", mutated_copy, "--report", line)
    assert code == 0 and "confirmed" in out


def test_inspect_rejects_forged_report(mutated_copy, capsys):
    forged = "FAIL pair=(0,0)|(1,0) prefix=????HHHCCC........ p1=1/3 p2=0/1"
    code, out, _ = run(capsys, "inspect", "--protocol", mutated_copy, "--report", forged)
    assert code == 2 and "NOT reproduced" in out


def test_oracle_too_large(and2_file, capsys):
    code, out, _ = run(capsys, "oracle", "--protocol", and2_file, "--input", "a=1,b=1")
    assert code == 3 and out.startswith("TOO_LARGE")


def test_oracle_on_copy_gadget(tmp_path, capsys, monkeypatch):
    path = tmp_path / "copy.protocol"
    path.write_text(format_protocol(copy_gadget_protocol()))
    code, out, _ = run(capsys, "oracle", "--protocol", path, "--input", "a=1,b=0")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 6
    assert sum(Fraction(line.split()[0][2:]) for line in lines) == 1
    monkeypatch.setenv("CARDFORGE_ORACLE_CAP", "5")
    assert run(capsys, "oracle", "--protocol", path, "--input", "a=1,b=0")[0] == 3


def test_run_is_deterministic(and2_file, capsys):
    args = ("run", "--protocol", and2_file, "--input", "a=1,b=1", "--seed", 42, "--trace")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second
    lines = first[1].splitlines()
    assert lines[0].startswith("step 0 ") and lines[-1] == "output 1"
    assert len(lines) == 762 + 2


def test_bp_commands(tmp_path, capsys):
    code, out, _ = run(capsys, "bp-from-formula", "--formula", AND2)
    assert code == 0 and out == (GOLDEN / "and2.bp").read_text()
    bp = tmp_path / "and2.bp"
    bp.write_text(out)
    assert run(capsys, "bp-eval", "--bp", bp, "--input", "a=1,b=1")[1] == "1\n"
    assert run(capsys, "bp-eval", "--bp", bp, "--table")[1] == (GOLDEN / "and2.truth").read_text()


def test_formula_from_file(tmp_path, capsys):
    f = tmp_path / "and2.formula"
    f.write_text(AND2 + "\n")
    assert run(capsys, "bp-from-formula", "--formula", f"@{f}")[1] == (GOLDEN / "and2.bp").read_text()


def test_emit_plan(tmp_path, capsys):
    code, out, _ = run(capsys, "compile", "--formula", "(VAR a1)", "--emit-plan")
    assert code == 0 and out.startswith("# plan encoding=two_card")
    path = tmp_path / "p.protocol"
    path.write_text(out)
    assert run(capsys, "verify", "--protocol", path, "--formula", "(VAR a1)", "--also", "correctness")[0] == 0


def test_errors_exit_one(tmp_path, capsys):
    code, _, err = run(capsys, "bp-from-formula", "--formula", "(AND (VAR a1)")
    assert code == 1 and "unbalanced parenthesis" in err
    bad = tmp_path / "bad.bp"
    bad.write_text("bp width=5 length=2\nlayer 1 label=a1 perm0=1,2,3,4,5 perm1=1,1,3,4,5\nstart=1 accept=2 reject=1\n")
    code, _, err = run(capsys, "bp-eval", "--bp", bad, "--table")
    assert code == 1 and "VALIDATION_ERROR" in err
    code, _, err = run(capsys, "run", "--protocol", tmp_path / "missing", "--input", "a=1,b=1")
    assert code == 1


def test_half_card_run_with_omission(tmp_path, capsys):
    path = tmp_path / "half.protocol"
    assert run(capsys, "compile", "--formula", "(VAR a1)", "--encoding", "half_card", "--n", 2, "-o", path)[0] == 0
    code, out, _ = run(capsys, "run", "--protocol", path, "--input", "a=10,b=01", "--omit", "a=1,b=2",
                       "--seed", 5, "--trace")
    assert code == 0 and out.endswith("output 1\n")
    # a=10 with S={1}: (., C) (., H); b=01 with S={2}: (., H) (., C)
    assert out.splitlines()[0].startswith("step 0 .?.?.?.?HHHH")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cardforge", "bp-from-formula", "--formula", "(VAR b1)"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("bp width=5 length=2")
