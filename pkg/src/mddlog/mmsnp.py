"""Monadic SNP sentences and their translations to and from Boolean MDDLog.

A sentence is true on an instance iff its negation, written as a program,
has no certain goal. :func:`eval_mmsnp` decides truth with its own small
DPLL search so that it can serve as an oracle for the program side.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import (GOAL, Atom, Instance, LimitExceeded, Program, Rule, Schema, Term,
                   var, vars_of)

MAX_MMSNP_ADOM = 12


@dataclass(frozen=True)
class Clause:
    alphas: tuple[Atom, ...]
    betas: tuple[Atom, ...]

    def variables(self) -> list[Term]:
        return vars_of(self.alphas + self.betas)


@dataclass(frozen=True)
class MMSNPSentence:
    so_vars: tuple[str, ...]
    fo_vars: tuple[str, ...]
    clauses: tuple[Clause, ...]
    edb_extra: Schema = field(default_factory=Schema)

    def __post_init__(self):
        so = set(self.so_vars)
        fo = set(self.fo_vars)
        for c in self.clauses:
            for b in c.betas:
                if b.relation not in so:
                    raise ValueError(f"clause head atom {b} is not over a second-order variable")
            for a in c.alphas + c.betas:
                if a.relation in so and a.arity != 1:
                    raise ValueError(f"second-order variable {a.relation} must be unary")
                for t in a.args:
                    if not t.is_var or t.name not in fo:
                        raise ValueError(f"undeclared first-order variable {t.name}")

    @property
    def edb_schema(self) -> Schema:
        so = set(self.so_vars)
        return Schema([(a.relation, a.arity) for c in self.clauses for a in c.alphas
                       if a.relation not in so] + list(self.edb_extra.items()))


# ------------------------------------------------------------ evaluation

def _dpll(clauses: list[tuple[frozenset, frozenset]]) -> bool:
    """Satisfiability of clauses given as (negative vars, positive vars)."""
    lits = [frozenset(-v for v in n) | p for n, p in clauses]

    def solve(cls: list[frozenset], assign: dict) -> bool:
        while True:
            unit = None
            rest = []
            for c in cls:
                if any(assign.get(abs(l)) == (l > 0) for l in c):
                    continue
                live = [l for l in c if abs(l) not in assign]
                if not live:
                    return False
                if len(live) == 1 and unit is None:
                    unit = live[0]
                rest.append(c)
            if not rest:
                return True
            if unit is None:
                break
            assign = {**assign, abs(unit): unit > 0}
            cls = rest
        v = abs(next(l for c in rest for l in c if abs(l) not in assign))
        return solve(rest, {**assign, v: True}) or solve(rest, {**assign, v: False})

    return solve(lits, {})


def eval_mmsnp(phi: MMSNPSentence, inst: Instance) -> bool:
    adom = inst.adom
    if len(adom) > MAX_MMSNP_ADOM:
        raise LimitExceeded("eval_mmsnp adom", len(adom), MAX_MMSNP_ADOM)
    if phi.fo_vars and not adom:
        return True
    so = set(phi.so_vars)
    ids: dict[tuple[str, str], int] = {}

    def pid(rel, elem):
        return ids.setdefault((rel, elem), len(ids) + 1)

    tuples = inst.tuples
    ground = []
    for c in phi.clauses:
        vs = c.variables()
        for vals in itertools.product(adom, repeat=len(vs)):
            asg = dict(zip(vs, vals))
            neg, pos, ok = set(), set(), True
            for a in c.alphas:
                args = tuple(asg[t] for t in a.args)
                if a.relation in so:
                    neg.add(pid(a.relation, args[0]))
                elif args not in tuples.get(a.relation, ()):
                    ok = False
                    break
            if not ok:
                continue
            for b in c.betas:
                pos.add(pid(b.relation, asg[b.args[0]]))
            if neg & pos:
                continue
            if not neg and not pos:
                return False
            ground.append((frozenset(neg), frozenset(pos)))
    return _dpll(ground)


# ----------------------------------------------------------- translations

def _idb_names(phi: MMSNPSentence, edb: Schema) -> dict[str, str]:
    out = {}
    for x in phi.so_vars:
        clash = x in edb or x == GOAL or x.startswith("neg$")
        out[x] = f"gen${x}" if clash else x
    return out


def _var_names(fo_vars) -> dict[str, Term]:
    ups = [v[:1].upper() + v[1:] for v in fo_vars]
    if len(set(ups)) != len(ups):
        ups = [f"X{i}" for i in range(1, len(fo_vars) + 1)]
    return {v: var(u) for v, u in zip(fo_vars, ups)}


def mmsnp_to_mddlog(phi: MMSNPSentence, schema: Schema | None = None) -> Program:
    """Boolean program that holds on exactly the instances falsifying ``phi``."""
    edb = phi.edb_schema.union(schema or {})
    names = _idb_names(phi, edb)
    vmap = _var_names(phi.fo_vars)
    goal = Atom(GOAL)
    rules = []
    for x in phi.so_vars:
        for r, k in edb.items():
            args = tuple(var(f"V{i}") for i in range(1, k + 1))
            for v in args:
                rules.append(Rule((Atom(names[x], (v,)), Atom("neg$" + names[x], (v,))),
                                  (Atom(r, args),)))
    for c in phi.clauses:
        body = []
        for a in c.alphas:
            rel = names.get(a.relation, a.relation)
            body.append(Atom(rel, tuple(vmap[t.name] for t in a.args)))
        for b in c.betas:
            body.append(Atom("neg$" + names[b.relation], tuple(vmap[t.name] for t in b.args)))
        if c.variables() or not phi.fo_vars:
            if not body:
                raise ValueError("a variable-free clause 'true -> false' makes the sentence "
                                 "unsatisfiable even on the empty instance; not expressible")
            rules.append(Rule((goal,), tuple(body)))
            continue
        # variable-free clause under a nonempty quantifier prefix: it only
        # bites on instances with a nonempty active domain
        for r, k in edb.items():
            if k >= 1:
                guard = Atom(r, tuple(var(f"Z{i}") for i in range(1, k + 1)))
                rules.append(Rule((goal,), tuple(body) + (guard,)))
    return Program(tuple(dict.fromkeys(rules)), goal=GOAL, goal_arity=0, edb_extra=edb)


def mddlog_to_mmsnp(p: Program) -> MMSNPSentence:
    """Sentence that is true on exactly the instances where ``p`` fails.

    Nullary IDB atoms P() are encoded as X_P(z) for a fresh variable z; this
    is faithful whenever the active domain is nonempty.
    """
    if not p.is_boolean:
        raise ValueError("mddlog_to_mmsnp needs a Boolean program")
    if p.constants():
        raise ValueError("MMSNP sentences have no constants")
    so = sorted(r for r in p.idb if r != p.goal)
    so_set = set(so)
    clauses = []
    width = 0
    for r in p.rules:
        order = {v: i for i, v in enumerate(vars_of(r.body + r.head))}
        n = len(order)

        def conv(a: Atom):
            nonlocal n
            if a.relation in so_set and a.arity == 0:
                n += 1
                return Atom(a.relation, (var(f"x{n}"),))
            return Atom(a.relation, tuple(var(f"x{order[t] + 1}") for t in a.args))

        alphas = tuple(conv(a) for a in r.body)
        betas = tuple(conv(a) for a in r.head if a.relation != p.goal)
        width = max(width, n)
        clauses.append(Clause(alphas, betas))
    fo = tuple(f"x{i}" for i in range(1, width + 1))
    return MMSNPSentence(tuple(so), fo, tuple(clauses), edb_extra=p.edb_schema)
