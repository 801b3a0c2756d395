"""Reduce containment of programs with answer variables and constants to
containment of Boolean, constant-free programs."""
from __future__ import annotations

import itertools
from typing import Iterator

from .core import Atom, Instance, Program, Rule, Schema, Term, const, dedupe_rules, var

FRESH = "fresh$"
CST = "cst$"
ADOM = "adom$"


def program_constants(*ps: Program) -> list[str]:
    return sorted({t.name for p in ps for t in p.constants()})


def _bind_goal_rule(r: Rule, goal: str, a: tuple[str, ...]) -> Rule | None:
    head = r.head[0]
    m: dict[Term, Term] = {}
    for t, c in zip(head.args, a):
        if t.is_var:
            if m.setdefault(t, const(c)) != const(c):
                return None
        elif t.name != c:
            return None
    return Rule((Atom(goal),), tuple(x.substitute(m) for x in r.body))


def strip_answer_vars(p1: Program, p2: Program) -> Iterator[tuple[tuple[str, ...], Program, Program]]:
    """Yield, lazily and in lexicographic order, one Boolean pair per tuple of
    constants from C^k, where C holds the program constants plus k fresh ones."""
    if p1.arity != p2.arity:
        raise ValueError(f"arity mismatch: {p1.arity} vs {p2.arity}")
    k = p1.arity
    if k == 0:
        yield (), p1, p2
        return
    consts = program_constants(p1, p2) + [f"{FRESH}{i}" for i in range(1, k + 1)]
    schema = p1.edb_schema.union(p2.edb_schema)

    def bind(p: Program, a, guard: bool):
        rules = []
        for r in p.rules:
            if r.head and r.head[0].relation == p.goal:
                b = _bind_goal_rule(r, p.goal, a)
                if b is not None:
                    rules.append(b)
            elif guard and not r.head:
                rules.extend(_guard_constraint(r, p.goal, a, schema))
            else:
                rules.append(r)
        return Program(tuple(dedupe_rules(rules)), goal=p.goal, goal_arity=0, edb_extra=schema)

    for a in itertools.product(consts, repeat=k):
        yield a, bind(p1, a, True), bind(p2, a, False)


def _guard_constraint(r: Rule, goal: str, a: tuple[str, ...], schema: Schema) -> list[Rule]:
    """An inconsistent instance only yields the answer ``a`` when every
    constant of ``a`` is in its active domain, so on the left the constraint
    becomes a goal rule guarded by one adom$ atom per constant."""
    out = []
    for c in sorted(set(a)):
        for rel, n in sorted(schema.items()):
            for i in range(n):
                args = tuple(const(c) if j == i else var(f"V{j}") for j in range(n))
                out.append(Rule((Atom(ADOM + c),), (Atom(rel, args),)))
    if not out:
        return []
    guards = tuple(Atom(ADOM + c) for c in sorted(set(a)))
    return out + [Rule((Atom(goal),), r.body + guards)]


def _expand_rule(r: Rule, consts: list[str]) -> list[Rule]:
    vs = r.variables()
    cs = sorted({t for a in r.head + r.body for t in a.args if not t.is_var}, key=lambda t: t.name)
    taken = {v.name for v in vs}

    def fresh(base: str, n: int) -> Term:
        name = f"{base}_{n}"
        while name in taken:
            name += "_"
        taken.add(name)
        return var(name)

    out = []
    for choice in itertools.product([None] + consts, repeat=len(vs)):
        delta = {v: c for v, c in zip(vs, choice) if c is not None}
        delta.update({c: c.name for c in cs})
        taken = {v.name for v in vs}
        intro: dict[Term, list[Term]] = {t: [] for t in delta}
        guards = []
        body = []
        for a in r.body:
            args = []
            for t in a.args:
                if t in delta:
                    base = t.name if t.is_var else "K" + t.name
                    x = fresh(base, len(intro[t]) + 1)
                    intro[t].append(x)
                    guards.append(Atom(CST + delta[t], (x,)))
                    args.append(x)
                else:
                    args.append(t)
            body.append(Atom(a.relation, tuple(args)))
        # a constant that only occurs in the head still needs a witness variable
        for a in r.head:
            for t in a.args:
                if t in delta and not intro[t]:
                    x = fresh(t.name if t.is_var else "K" + t.name, 1)
                    intro[t].append(x)
                    guards.append(Atom(CST + delta[t], (x,)))
        slots = [(i, j, a.args[j]) for i, a in enumerate(r.head) for j in range(a.arity) if a.args[j] in delta]
        for pick in itertools.product(*(intro[t] for _, _, t in slots)):
            head = [list(a.args) for a in r.head]
            for (i, j, _), x in zip(slots, pick):
                head[i][j] = x
            out.append(Rule(tuple(Atom(a.relation, tuple(h)) for a, h in zip(r.head, head)),
                            tuple(body) + tuple(guards)))
    return out


def eliminate_constants(p1: Program, p2: Program) -> tuple[Program, Program]:
    """Constant-free Boolean programs over the schema extended by a unary
    relation ``cst$a`` per constant ``a``, preserving containment."""
    consts = program_constants(p1, p2)
    if not consts:
        return p1, p2
    edb = p1.edb_schema.union(p2.edb_schema).union({CST + c: 1 for c in consts})

    def conv(p: Program) -> list[Rule]:
        return [x for r in p.rules for x in _expand_rule(r, consts)]

    r1 = dedupe_rules(conv(p1))
    r2 = conv(p2)
    x = var("X")
    for a, b in itertools.combinations(consts, 2):
        r2.append(Rule((Atom(p2.goal),), (Atom(CST + a, (x,)), Atom(CST + b, (x,)))))
    r2 = dedupe_rules(r2)
    return (Program(tuple(r1), goal=p1.goal, goal_arity=0, edb_extra=edb),
            Program(tuple(r2), goal=p2.goal, goal_arity=0, edb_extra=edb))


def quotient(inst: Instance, schema: Schema | None = None) -> Instance | None:
    """Merge the elements marked ``cst$a`` into the constant ``a`` and drop the
    markers; None if an element carries two different markers."""
    label: dict[str, str] = {}
    for f in inst.facts:
        if f.relation.startswith(CST):
            a, c = f.args[0].name, f.relation[len(CST):]
            if label.setdefault(a, c) != c:
                return None
    facts = []
    for f in inst.facts:
        if f.relation.startswith(CST):
            continue
        facts.append(Atom(f.relation, tuple(const(label.get(t.name, t.name)) for t in f.args)))
    return Instance.of(facts, schema)
