"""Command-line front end.

Every command prints a short verdict line on stdout, or with ``--json`` a
single record with the fields listed in ``RECORD_FIELDS``. Exit codes:
0 for a positive outcome (contained, no counterexample, success), 1 for a
negative one (not contained, counterexample found), 2 for errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import textio
from .boolify import eliminate_constants
from .core import LimitExceeded, Program
from .driver import CONTAINED, brute_contains, contain, contain_mmsnp
from .evaluation import DEFAULT_MAX_GROUND_CLAUSES, MAX_ENUM_DOMAIN, ddlog_answers
from .mmsnp import mddlog_to_mmsnp, mmsnp_to_mddlog
from .simplify import simplify_pair
from .tilegen import gen_canonical_grid, gen_lower_bound

RECORD_FIELDS = ("command", "verdict", "evidence", "stages", "timing_ms", "error")


class _Fail(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _Fail(f"cannot read {path}: {e.strerror}") from None


def _parse(path: str, parser):
    try:
        return parser(_read(path))
    except textio.ParseError as e:
        raise _Fail(f"{path}: {e}") from None


def _write(out: Path, name: str, text: str) -> str:
    out.mkdir(parents=True, exist_ok=True)
    p = out / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def _fmt_tuple(t) -> str:
    return "(" + ",".join(t) + ")"


# ----------------------------------------------------------------- commands

def cmd_check(a) -> tuple[str, dict, list]:
    if a.mmsnp:
        d = contain_mmsnp(_parse(a.left, textio.parse_mmsnp), _parse(a.right, textio.parse_mmsnp),
                          max_ground_clauses=a.max_ground_clauses)
    else:
        d = contain(_parse(a.left, textio.parse_program), _parse(a.right, textio.parse_program),
                    max_ground_clauses=a.max_ground_clauses)
    ev = {}
    if d.evidence is not None:
        e = d.evidence
        ev = {"branch": list(e.branch), "theta": sorted(e.theta),
              "k_theta_elements": len(e.k_theta.domain), "certified": e.certified, "files": []}
        if a.witness_dir:
            out = Path(a.witness_dir)
            ev["files"].append(_write(out, "k_theta.facts", textio.print_instance(e.k_theta.stored())))
            if e.counterexample is not None:
                ev["files"].append(_write(out, "counterexample.facts",
                                          textio.print_instance(e.counterexample)))
        if e.counterexample is not None and e.certified:
            ev["counterexample"] = textio.print_instance(e.counterexample).split("\n")[:-1]
    return d.verdict, ev, d.stats


def cmd_eval(a):
    p = _parse(a.program, textio.parse_program)
    inst = _parse(a.instance, textio.parse_instance)
    ans = sorted(ddlog_answers(p, inst, max_ground_clauses=a.max_ground_clauses))
    return ("HOLDS" if ans else "FAILS"), {"answers": [_fmt_tuple(t) for t in ans]}, []


def cmd_brute(a):
    if a.max_size > MAX_ENUM_DOMAIN:
        raise _Fail(f"--max-size is limited to {MAX_ENUM_DOMAIN}")
    g = math.inf if a.min_girth in ("inf", "infinity") else int(a.min_girth)
    if a.mmsnp:
        f1, f2 = _parse(a.left, textio.parse_mmsnp), _parse(a.right, textio.parse_mmsnp)
        sch = f1.edb_schema.union(f2.edb_schema)
        p1, p2 = mmsnp_to_mddlog(f2, sch), mmsnp_to_mddlog(f1, sch)
    else:
        p1, p2 = _parse(a.left, textio.parse_program), _parse(a.right, textio.parse_program)
    r = brute_contains(p1, p2, a.max_size, g, max_ground_clauses=a.max_ground_clauses)
    if not r.found:
        return "NO_COUNTEREXAMPLE", {"max_size": a.max_size}, []
    return "COUNTEREXAMPLE", {"max_size": a.max_size, "answer": _fmt_tuple(r.answer),
                              "instance": textio.print_instance(r.instance).split("\n")[:-1]}, []


def cmd_translate(a):
    text = _read(a.input)
    try:
        if a.to == "mddlog":
            res = textio.print_program(mmsnp_to_mddlog(textio.parse_mmsnp(text)))
        else:
            res = textio.print_mmsnp(mddlog_to_mmsnp(textio.parse_program(text)))
    except textio.ParseError as e:
        raise _Fail(f"{a.input}: {e}") from None
    files = []
    if a.out:
        p = Path(a.out)
        files.append(_write(p.parent, p.name, res))
    return "OK", {"files": files, "text": res.split("\n")[:-1]}, []


def cmd_gen_tiling(a):
    prob = _parse(a.problem, textio.parse_tiling)
    lb = gen_lower_bound(prob, a.mode)
    out = Path(a.out)
    files = [_write(out, "program.mddlog", textio.print_program(lb.program)),
             _write(out, "query.mddlog", textio.print_ucq(lb.query))]
    if lb.n == 1:
        files.append(_write(out, "grid.facts", textio.print_instance(gen_canonical_grid(prob, a.mode))))
    return "OK", {"files": files, "rules": len(lb.program.rules)}, []


def _boolean_constant_free(p: Program, side: str) -> Program:
    if not p.is_boolean:
        raise _Fail(f"{side} program is not Boolean; simplify works on Boolean programs")
    return p


def cmd_simplify(a):
    p1 = _boolean_constant_free(_parse(a.left, textio.parse_program), "left")
    p2 = _boolean_constant_free(_parse(a.right, textio.parse_program), "right")
    p1, p2 = eliminate_constants(p1, p2)
    sp = simplify_pair(p1, p2)
    out = Path(a.out)
    lines = [f"{e.relation}({','.join(v.name for v in e.variables)}) := "
             f"{', '.join(map(str, e.atoms))}." for e in sorted(sp.cmap.entries.values(),
                                                                 key=lambda e: e.relation)]
    files = [_write(out, "left.mddlog", textio.print_program(sp.left)),
             _write(out, "right.mddlog", textio.print_program(sp.right)),
             _write(out, "edb_map.txt", "\n".join(lines) + "\n")]
    stats = [{"rules_simple": [len(sp.left.rules), len(sp.right.rules)],
              "edb_simple": len(sp.cmap.entries), "width": sp.width}]
    return "OK", {"files": files}, stats


COMMANDS = {"check": cmd_check, "eval": cmd_eval, "brute": cmd_brute, "translate": cmd_translate,
            "gen-tiling": cmd_gen_tiling, "simplify": cmd_simplify}
POSITIVE = {CONTAINED, "NO_COUNTEREXAMPLE", "OK", "HOLDS", "FAILS"}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mddlog", description="Containment for MDDLog and MMSNP.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print one JSON record")
    common.add_argument("--no-timing", action="store_true", help="omit wall-clock timing")
    common.add_argument("--max-ground-clauses", type=int, default=DEFAULT_MAX_GROUND_CLAUSES)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="decide containment")
    c.add_argument("--left", required=True)
    c.add_argument("--right", required=True)
    c.add_argument("--mmsnp", action="store_true", help="inputs are MMSNP sentences (implication)")
    c.add_argument("--witness-dir", help="write K_theta and counterexample facts here")

    e = sub.add_parser("eval", parents=[common], help="certain answers of a program")
    e.add_argument("--program", required=True)
    e.add_argument("--instance", required=True)

    b = sub.add_parser("brute", parents=[common], help="search small counterexamples")
    b.add_argument("--left", required=True)
    b.add_argument("--right", required=True)
    b.add_argument("--max-size", "--max-domain", dest="max_size", type=int, default=3)
    b.add_argument("--min-girth", default="0", help="only instances of girth above this (or inf)")
    b.add_argument("--mmsnp", action="store_true")

    t = sub.add_parser("translate", parents=[common], help="MMSNP <-> MDDLog")
    t.add_argument("--to", choices=("mddlog", "mmsnp"), required=True)
    t.add_argument("--input", required=True)
    t.add_argument("--out")

    g = sub.add_parser("gen-tiling", parents=[common], help="tiling lower-bound instances")
    g.add_argument("--problem", required=True)
    g.add_argument("--mode", choices=("ucq", "cq"), default="ucq")
    g.add_argument("--out", required=True)

    s = sub.add_parser("simplify", parents=[common], help="write the simplified pair")
    s.add_argument("--left", required=True)
    s.add_argument("--right", required=True)
    s.add_argument("--out", required=True)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    a = build_parser().parse_args(argv)
    start = time.perf_counter()
    record = dict.fromkeys(RECORD_FIELDS)
    record["command"] = [a.command] + argv[1:]
    try:
        verdict, evidence, stages = COMMANDS[a.command](a)
        code = 0 if verdict in POSITIVE else 1
    except (_Fail, ValueError, LimitExceeded) as e:
        verdict, evidence, stages, code = "ERROR", {}, [], 2
        record["error"] = str(e)
    record.update(verdict=verdict, evidence=evidence, stages=stages)
    if not a.no_timing:
        record["timing_ms"] = round((time.perf_counter() - start) * 1000, 3)
    if a.json:
        print(json.dumps(record, sort_keys=True))
    else:
        if a.command != "eval" or code == 2:
            print(verdict)
        for t in evidence.get("answers", []):
            print(t)
        if verdict == "COUNTEREXAMPLE":
            print(evidence["answer"])
            print("\n".join(evidence["instance"]))
        for line in evidence.get("counterexample", []):
            print(line)
        if a.command == "translate":
            print("\n".join(evidence["text"]))
    if code == 2:
        print(f"error: {record['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
