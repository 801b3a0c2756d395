import json
import subprocess
import sys

import pytest

from mddlog import textio
from mddlog.cli import RECORD_FIELDS, main

from conftest import DATA


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def d(name):
    return str(DATA / name)


def test_check_exit_codes(capsys):
    code, out, _ = run(capsys, "check", "--left", d("split_left.mddlog"), "--right", d("split_right.mddlog"))
    assert code == 1 and out.splitlines()[0] == "NOT_CONTAINED"
    code, out, _ = run(capsys, "check", "--left", d("split_left.mddlog"), "--right", d("split_left.mddlog"))
    assert code == 0 and out.strip() == "CONTAINED"


def test_check_mmsnp(capsys):
    args = ["check", "--mmsnp", "--left", d("three_col.mmsnp"), "--right", d("four_col.mmsnp")]
    assert run(capsys, *args)[0] == 0
    args[3], args[5] = args[5], args[3]
    assert run(capsys, *args)[0] == 1


def test_witness_dir(capsys, tmp_path):
    code, out, _ = run(capsys, "check", "--json", "--left", d("split_left.mddlog"),
                       "--right", d("split_right.mddlog"), "--witness-dir", str(tmp_path))
    rec = json.loads(out)
    assert code == 1 and rec["evidence"]["files"]
    for f in rec["evidence"]["files"]:
        textio.parse_instance(open(f).read())


def test_eval_prints_answers(capsys):
    code, out, _ = run(capsys, "eval", "--program", d("split_left.mddlog"),
                       "--instance", d("split_witness.facts"))
    assert code == 0 and out == "(a)\n"


def test_brute(capsys):
    code, out, _ = run(capsys, "brute", "--left", d("split_left.mddlog"),
                       "--right", d("split_right.mddlog"), "--max-size", "1")
    assert code == 1 and out.splitlines()[:2] == ["COUNTEREXAMPLE", "(c1)"]
    code, out, _ = run(capsys, "brute", "--left", d("split_left.mddlog"),
                       "--right", d("split_right.mddlog"), "--max-size", "2", "--min-girth", "inf")
    assert code == 0 and out.strip() == "NO_COUNTEREXAMPLE"
    assert run(capsys, "brute", "--left", d("split_left.mddlog"),
               "--right", d("split_right.mddlog"), "--max-size", "99")[0] == 2


def test_translate(capsys, tmp_path):
    out_file = tmp_path / "ex2.mddlog"
    code, out, _ = run(capsys, "translate", "--to", "mddlog", "--input", d("colour_guess.mmsnp"),
                       "--out", str(out_file))
    assert code == 0
    p = textio.parse_program(out_file.read_text())
    assert len(p.rules) == 10
    code, out, _ = run(capsys, "translate", "--to", "mmsnp", "--input", str(out_file))
    assert code == 0
    textio.parse_mmsnp("\n".join(out.splitlines()[1:]))


def test_gen_tiling(capsys, tmp_path):
    code, out, _ = run(capsys, "gen-tiling", "--json", "--problem", d("trivial.tiling"),
                       "--out", str(tmp_path))
    rec = json.loads(out)
    assert code == 0 and len(rec["evidence"]["files"]) == 3
    textio.parse_program((tmp_path / "program.mddlog").read_text())
    textio.parse_ucq((tmp_path / "query.mddlog").read_text())
    textio.parse_instance((tmp_path / "grid.facts").read_text())


def test_simplify(capsys, tmp_path):
    left, right = tmp_path / "l.mddlog", tmp_path / "r.mddlog"
    left.write_text("goal() :- r(X,Y), r(Y,Z), A(Z).\n")
    right.write_text("goal() :- r(X,Y).\n")
    code, _, _ = run(capsys, "simplify", "--left", str(left), "--right", str(right), "--out", str(tmp_path / "o"))
    assert code == 0
    for f in ("left.mddlog", "right.mddlog"):
        textio.parse_program((tmp_path / "o" / f).read_text(), strict=False)
    assert run(capsys, "simplify", "--left", d("split_left.mddlog"), "--right", d("split_right.mddlog"),
               "--out", str(tmp_path / "o"))[0] == 2


@pytest.mark.parametrize("text", ["goal( :- A(X).", "goal() :- A(X)", "P(X,Y) :- r(X,Y).\ngoal() :- P(X,Y)."])
def test_malformed_input(capsys, tmp_path, text):
    bad = tmp_path / "bad.mddlog"
    bad.write_text(text)
    code, out, err = run(capsys, "check", "--left", str(bad), "--right", d("split_right.mddlog"))
    assert code == 2 and out.strip() == "ERROR" and err.startswith("error: ")


def test_missing_file(capsys):
    code, _, err = run(capsys, "eval", "--program", "/nonexistent", "--instance", d("split_witness.facts"))
    assert code == 2 and "cannot read" in err


def test_json_record(capsys):
    code, out, _ = run(capsys, "check", "--json", "--left", d("split_left.mddlog"),
                       "--right", d("split_right.mddlog"))
    rec = json.loads(out)
    assert set(rec) == set(RECORD_FIELDS)
    assert rec["verdict"] == "NOT_CONTAINED" and rec["error"] is None
    assert rec["evidence"]["theta"] and rec["stages"][0]["branch"] == ["fresh$1"]
    assert isinstance(rec["timing_ms"], float)
    _, out2, _ = run(capsys, "check", "--json", "--no-timing", "--left", d("split_left.mddlog"),
                     "--right", d("split_right.mddlog"))
    assert json.loads(out2)["timing_ms"] is None


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mddlog", "eval", "--program", d("split_left.mddlog"),
                        "--instance", d("split_witness.facts")], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "(a)\n"
