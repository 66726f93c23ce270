import io
import subprocess
import sys

import pytest

from lifeworld.cli import main
from lifeworld.kitchen import scenario_path

EGG = scenario_path("egg.lw")
TWO = scenario_path("two-eggs.lw")
WHISK = scenario_path("egg-whisk.lw")


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_parse_ok():
    code, out = run("parse", EGG)
    assert code == 0 and "1 objects" in out


def test_parse_error_location(tmp_path, capsys):
    bad = tmp_path / "bad.lw"
    bad.write_text("material egg chain fresh -> broken ;\n\naction break egg: fresh broken ;\n")
    code, _ = run("parse", str(bad))
    assert code == 2
    assert capsys.readouterr().err.strip() == f"{bad}:3:25: error: expected '->', found 'broken'"


def test_unknown_flag_and_command(capsys):
    assert run("parse", EGG, "--bogus")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run()[0] == 2
    assert "usage" in capsys.readouterr().err


def test_missing_file(capsys):
    assert run("parse", "/no/such/file.lw")[0] == 2
    assert "error" in capsys.readouterr().err


def test_solve():
    code, out = run("solve", EGG)
    assert code == 0 and out.splitlines()[-1] == "reached in 3 steps"
    code, out = run("solve", EGG, "--from", "burnt")
    assert code == 1 and "unsolvable" in out
    code, out = run("solve", WHISK, "--from", "broken,dirty")
    assert code == 0 and "\twash\t" in out
    assert run("solve", EGG, "--max-steps", "2")[0] == 1
    assert run("solve", EGG, "--from", "raw")[0] == 2


def test_check_reduction():
    code, out = run("check-reduction", EGG, "--projection", "chain")
    assert code == 0 and "inc_5 -> advance" in out
    code, out = run("check-reduction", WHISK, "--projection", "tool:whisk")
    assert code == 0 and "beat -> beat" in out
    code, out = run("check-reduction", WHISK, "--projection", "tool:egg")
    assert code == 1 and "trichotomy" in out
    code, out = run("check-reduction", TWO, "--projection", "select:egg-2", "--target", EGG)
    assert code == 0 and "break -> break(egg-2)" in out
    assert run("check-reduction", TWO, "--projection", "select:egg-9", "--target", EGG)[0] == 2
    assert run("check-reduction", TWO, "--projection", "sideways")[0] == 2


def test_check_binding():
    code, out = run("check-binding", TWO, "--schematic", EGG)
    assert code == 0 and "2 bindings" in out


def test_check_binding_failure(tmp_path):
    f = tmp_path / "only-first.lw"
    f.write_text(open(TWO).read().replace("action break egg: fresh -> broken ;\n", ""))
    code, out = run("check-binding", str(f), "--schematic", EGG)
    assert code == 1 and "not uniformly reducible" in out


def test_verify_one_suite():
    code, out = run("verify", "--suite", "cor1")
    assert code == 0 and out.startswith("PASS cor1")
    assert run("verify", "--suite", "lemma99")[0] == 2


def test_toast_trace_file(tmp_path):
    target = tmp_path / "trace.txt"
    code, out = run("toast", scenario_path("two-pancakes.lw"), "--trace", str(target))
    assert code == 0 and out == ""
    code, out2 = run("toast", scenario_path("two-pancakes.lw"), "--trace", "-")
    assert out2 == target.read_text()
    code, out3 = run("toast", scenario_path("two-pancakes.lw"), "--seed-ticks", "5")
    assert out3.splitlines()[0].startswith("5\t")


def test_console_script_is_byte_stable():
    cmd = [sys.executable, "-m", "lifeworld.cli", "toast", scenario_path("breakfast.lw")]
    a = subprocess.run(cmd, capture_output=True, check=True)
    b = subprocess.run(cmd, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout
    assert b"completed" in a.stderr
