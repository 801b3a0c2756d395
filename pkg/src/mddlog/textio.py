"""Parsers and printers for the four file formats.

* ``.mddlog``  rules ``H1(X) | H2(X) :- B1(X,Y), B2(Y).`` and ``false :- ...``
* ``.facts``   ground atoms ``r(a,b).``
* ``.mmsnp``   ``exists X Y . forall x y . A(x) & X(x) -> Y(x) | false ; ...``
* ``.tiling``  lines ``tiles:``, ``h:``, ``v:``, ``word:``

``%`` starts a comment that runs to the end of the line. Variables begin
with an uppercase letter or ``_``; everything else is a constant.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .core import (CQ, GOAL, UCQ, Atom, DisjointnessSet, Instance, Program, Rule,
                   SchemaError, Term, validate_program)

QUERY_GOAL = "query$goal"

_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<arrow>:-|->)
  | (?P<name>[A-Za-z0-9_][A-Za-z0-9_$]*)
  | (?P<punct>[(),.|&;:])
""", re.VERBOSE)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, column {col}: {message}" if line else message)
        self.line = line
        self.col = col

    @property
    def span(self) -> "SourceSpan":
        return SourceSpan(self.line, self.col)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos, line, lstart = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        if kind != "ws":
            out.append(_Tok(kind, m.group(), line, pos - lstart + 1))
        nl = m.group().count("\n")
        if nl:
            line += nl
            lstart = pos + m.group().rfind("\n") + 1
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - lstart + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str):
        raise ParseError(msg, self.cur.line, self.cur.col)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        t = self.cur
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            self.error(f"expected {text or kind}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def peek(self, text: str) -> bool:
        return self.cur.text == text

    def term(self) -> Term:
        name = self.take(kind="name").text
        return Term(name, name[0].isupper() or name[0] == "_")

    def atom(self, term=None) -> Atom:
        rel = self.take(kind="name").text
        args = []
        if self.peek("("):
            self.take("(")
            if not self.peek(")"):
                args.append((term or self.term)())
                while self.peek(","):
                    self.take(",")
                    args.append((term or self.term)())
            self.take(")")
        else:
            self.error(f"expected '(' after relation {rel}")
        return Atom(rel, tuple(args))


def _check_arities(atoms, where: _Parser | None = None):
    seen: dict[str, int] = {}
    for a in atoms:
        if seen.setdefault(a.relation, a.arity) != a.arity:
            raise ParseError(f"relation {a.relation} used with arities {seen[a.relation]} and {a.arity}")


def _parse_rules(text: str) -> list[Rule]:
    p = _Parser(text)
    rules = []
    while p.cur.kind != "eof":
        line = p.cur.line
        head: list[Atom] = []
        if p.peek("false"):
            p.take("false")
        else:
            head.append(p.atom())
            while p.peek("|"):
                p.take("|")
                head.append(p.atom())
        p.take(":-")
        body = [p.atom()]
        while p.peek(","):
            p.take(",")
            body.append(p.atom())
        p.take(".")
        try:
            rules.append(Rule(tuple(head), tuple(body)))
        except ValueError as e:
            raise ParseError(str(e), line) from None
    _check_arities(a for r in rules for a in r.head + r.body)
    return rules


def parse_program(text: str, goal: str = GOAL, strict: bool = True) -> Program:
    """Parse a program. With ``strict`` the goal discipline is enforced; the
    simplified programs written by ``simplify`` need ``strict=False`` since
    split rules may carry goal() inside a disjunctive head."""
    rules = _parse_rules(text)
    try:
        prog = Program(tuple(rules), goal=goal)
    except SchemaError as e:
        raise ParseError(str(e)) from None
    rep = validate_program(prog)
    hard = [v for v in rep.violations if "goal relation" in v or "goal rule" in v]
    if hard and strict:
        raise ParseError("; ".join(hard))
    return prog


def parse_disjointness(text: str) -> DisjointnessSet:
    try:
        return DisjointnessSet(tuple(_parse_rules(text)))
    except ValueError as e:
        raise ParseError(str(e)) from None


def parse_ucq(text: str) -> UCQ:
    """A UCQ is written as a program whose rules all define ``query$goal``."""
    cqs = []
    for r in _parse_rules(text):
        if len(r.head) != 1 or r.head[0].relation != QUERY_GOAL:
            raise ParseError(f"query rules must have the single head {QUERY_GOAL}: {r}")
        if any(a.relation == QUERY_GOAL for a in r.body):
            raise ParseError(f"{QUERY_GOAL} occurs in a body")
        cqs.append(CQ(r.head[0].args, r.body))
    return UCQ(tuple(cqs))


def parse_instance(text: str) -> Instance:
    p = _Parser(text)
    facts = []
    while p.cur.kind != "eof":
        a = p.atom()
        if not a.is_ground():
            raise ParseError(f"fact {a} contains a variable")
        p.take(".")
        facts.append(a)
    _check_arities(facts)
    return Instance.of(facts)


def print_program(p: Program) -> str:
    return "".join(f"{r}\n" for r in p.rules)


def print_disjointness(d: DisjointnessSet) -> str:
    return "".join(f"{r}\n" for r in d.rules)


def print_ucq(q: UCQ) -> str:
    out = []
    for cq in q.disjuncts:
        out.append(f"{Atom(QUERY_GOAL, cq.answer_vars)} :- {', '.join(map(str, cq.atoms))}.\n")
    return "".join(out)


def print_instance(i: Instance) -> str:
    return "".join(f"{f}.\n" for f in sorted(i.facts))


# ---------------------------------------------------------------- MMSNP

def parse_mmsnp(text: str):
    from .mmsnp import Clause, MMSNPSentence

    p = _Parser(text)
    so, fo = [], []
    p.take("exists")
    while p.cur.kind == "name":
        so.append(p.take().text)
    p.take(".")
    p.take("forall")
    while p.cur.kind == "name":
        fo.append(p.take().text)
    p.take(".")
    declared = set(fo)

    def fo_term() -> Term:
        t = p.take(kind="name")
        if t.text not in declared:
            raise ParseError(f"undeclared first-order variable {t.text}", t.line, t.col)
        return Term(t.text, True)

    clauses = []
    while p.cur.kind != "eof":
        alphas, betas = [], []
        if p.peek("true"):
            p.take("true")
        else:
            alphas.append(p.atom(fo_term))
            while p.peek("&"):
                p.take("&")
                alphas.append(p.atom(fo_term))
        p.take("->")
        if p.peek("false"):
            p.take("false")
        else:
            betas.append(p.atom(fo_term))
            while p.peek("|"):
                p.take("|")
                betas.append(p.atom(fo_term))
        for b in betas:
            if b.relation not in so:
                raise ParseError(f"clause head atom {b} is not over a second-order variable")
        clauses.append(Clause(tuple(alphas), tuple(betas)))
        if p.peek(";"):
            p.take(";")
        elif p.cur.kind != "eof":
            p.error("expected ';' between clauses")
    _check_arities(a for c in clauses for a in c.alphas + c.betas)
    try:
        return MMSNPSentence(tuple(so), tuple(fo), tuple(clauses))
    except ValueError as e:
        raise ParseError(str(e)) from None


def print_mmsnp(phi) -> str:
    lines = [f"exists {' '.join(phi.so_vars)} .".replace("exists  .", "exists ."),
             f"forall {' '.join(phi.fo_vars)} .".replace("forall  .", "forall .")]
    for c in phi.clauses:
        lhs = " & ".join(map(str, c.alphas)) or "true"
        rhs = " | ".join(map(str, c.betas)) or "false"
        lines.append(f"  {lhs} -> {rhs} ;")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------- tiling

@dataclass(frozen=True)
class TilingProblem:
    tiles: tuple[str, ...]
    h: frozenset[tuple[str, str]]
    v: frozenset[tuple[str, str]]
    word: tuple[str, ...]

    def __post_init__(self):
        known = set(self.tiles)
        for a, b in set(self.h) | set(self.v):
            if a not in known or b not in known:
                raise ValueError(f"compatibility pair ({a},{b}) uses an unknown tile")
        if any(t not in known for t in self.word):
            raise ValueError("initial word uses an unknown tile")
        if len(known) != len(self.tiles):
            raise ValueError("duplicate tile name")


def parse_tiling(text: str) -> TilingProblem:
    fields: dict[str, list[str]] = {"tiles": [], "h": [], "v": [], "word": []}
    seen = set()
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep or key not in fields:
            raise ParseError("expected one of tiles:, h:, v:, word:", n)
        if key in seen and key in ("tiles", "word"):
            raise ParseError(f"duplicate {key}: line", n)
        seen.add(key)
        fields[key].extend(rest.replace(",", " ").split())
    for key in ("h", "v"):
        if len(fields[key]) % 2:
            raise ParseError(f"{key}: expects pairs of tiles")
    if not fields["tiles"] or not fields["word"]:
        raise ParseError("tiles: and word: are required")
    pairs = lambda xs: frozenset(zip(xs[0::2], xs[1::2]))  # noqa: E731
    try:
        return TilingProblem(tuple(fields["tiles"]), pairs(fields["h"]), pairs(fields["v"]),
                             tuple(fields["word"]))
    except ValueError as e:
        raise ParseError(str(e)) from None


def print_tiling(t: TilingProblem) -> str:
    return (f"tiles: {' '.join(t.tiles)}\n"
            f"h: {' '.join(f'{a} {b}' for a, b in sorted(t.h))}\n"
            f"v: {' '.join(f'{a} {b}' for a, b in sorted(t.v))}\n"
            f"word: {' '.join(t.word)}\n")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int


render_program = print_program
render_instance = print_instance
render_mmsnp = print_mmsnp
render_ucq = print_ucq
render_tiling = print_tiling
render_disjointness = print_disjointness
