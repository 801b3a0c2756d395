"""Reduce containment of simple programs to emptiness relative to
disjointness constraints.

Every rule of the left program is copied once per way of deciding, for each
IDB relation P of the right program and each variable, whether P or its
complement ``neg$P`` holds. A copy is dropped when some rule of the right
program applies inside it with every head disjunct decided false, because
such a copy describes a situation the right program rules out.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Atom, DisjointnessSet, LimitExceeded, Program, Rule, Schema, is_simple, var

NEG = "neg$"
P2 = "p2$"
MAX_SLOTS = 24


def neg(rel: str) -> str:
    return NEG + rel


def rename_idb(p: Program, prefix: str = P2) -> Program:
    m = {r: prefix + r for r in p.idb}
    rules = [Rule(tuple(Atom(m.get(a.relation, a.relation), a.args) for a in r.head),
                  tuple(Atom(m.get(a.relation, a.relation), a.args) for a in r.body)) for r in p.rules]
    return Program(tuple(rules), goal=m[p.goal], goal_arity=p.arity, edb_extra=p.edb_schema)


@dataclass(frozen=True)
class AnnotatedSchema:
    """The EDB schema of the reduced program: the original EDB relations plus
    every IDB relation of the right program and its complement."""

    base: Schema
    idb2: Schema

    @property
    def idb2_mirror(self) -> dict[str, str]:
        return {p: neg(p) for p in self.idb2}

    @property
    def schema(self) -> Schema:
        rels = dict(self.base)
        for p, k in self.idb2.items():
            rels[p] = rels[neg(p)] = k
        return Schema(rels)


def _edb_atom(r: Rule, edb) -> Atom | None:
    e = [a for a in r.body if a.relation in edb]
    return e[0] if e else None


def removal_conditions(r1: Rule, p2: Program, edb: set[str], slot: dict) -> list[tuple[int, int]]:
    """(mask, value) pairs over the annotation slots; an annotated copy of r1
    is removed iff its bit assignment matches one of them."""
    conds = []
    e1 = _edb_atom(r1, edb)
    v1 = r1.variables()
    for r2 in p2.rules:
        e2 = _edb_atom(r2, edb)
        sigmas: list[dict] = []
        if e2 is not None:
            if e1 is None or e1.relation != e2.relation:
                continue
            s = {}
            ok = True
            for a, b in zip(e2.args, e1.args):
                if s.setdefault(a, b) != b:
                    ok = False
            if ok:
                sigmas.append(s)
        else:
            vs = r2.variables()
            if not vs:
                sigmas.append({})
            else:
                sigmas.extend({vs[0]: x} for x in v1)
        for s in sigmas:
            mask = val = 0
            ok = True
            need = [(a, True) for a in r2.body if a.relation != (e2.relation if e2 else None)]
            need += [(a, False) for a in r2.head]
            for a, positive in need:
                key = (a.relation, s[a.args[0]] if a.args else None)
                if a.relation == p2.goal:
                    if positive:
                        ok = False
                        break
                    continue  # neg$goal2() is always present
                bit = 1 << slot[key]
                want = bit if positive else 0
                if mask & bit and (val & bit) != want:
                    ok = False
                    break
                mask |= bit
                val |= want
            if ok:
                conds.append((mask, val))
    return conds


def to_emptiness(p1: Program, p2: Program, *, rename: bool = True) -> tuple[Program, DisjointnessSet]:
    """Program Pi and constraints D with: p1 contained in p2 (on instances of
    girth above one) iff Pi is empty relative to D."""
    p1, p2 = prepare(p1, p2, rename)
    edb_schema = p1.edb_schema.union(p2.edb_schema)
    edb = set(edb_schema)
    idb2 = p2.idb_schema
    unary = sorted(r for r, k in idb2.items() if k == 1)
    nullary = sorted(r for r, k in idb2.items() if k == 0 and r != p2.goal)
    goal2_neg = Atom(neg(p2.goal))

    out: list[Rule] = []
    interned: dict[tuple, Atom] = {}

    def at(rel, args):
        key = (rel, args)
        a = interned.get(key)
        if a is None:
            a = interned[key] = Atom(rel, args)
        return a

    for r in p1.rules:
        vs = r.variables()
        slots = [(p, v) for v in vs for p in unary] + [(p, None) for p in nullary]
        slot = {k: i for i, k in enumerate(slots)}
        conds = removal_conditions(r, p2, edb, slot)
        n = len(slots)
        if n > MAX_SLOTS:
            raise LimitExceeded("annotation slots", n, MAX_SLOTS)
        masks = np.arange(1 << n, dtype=np.int64)
        keep = np.ones(1 << n, dtype=bool)
        for m, v in conds:
            keep &= (masks & m) != v
        pos = [at(p, (v,) if v is not None else ()) for p, v in slots]
        negs = [at(neg(p), (v,) if v is not None else ()) for p, v in slots]
        for code in np.nonzero(keep)[0].tolist():
            ann = tuple(pos[i] if code >> i & 1 else negs[i] for i in range(n))
            out.append(Rule(r.head, r.body + ann + (goal2_neg,)))

    # a left IDB relation that lost all its rules is empty in some model and
    # would otherwise be read as an EDB relation; drop the rules that use it
    idb1 = set(p1.idb)
    while True:
        derived = {a.relation for r in out for a in r.head}
        kept = [r for r in out if all(a.relation in derived for a in r.body if a.relation in idb1)]
        if len(kept) == len(out):
            break
        out = kept

    ann = AnnotatedSchema(edb_schema, idb2)
    prog = Program(tuple(out), goal=p1.goal, goal_arity=0, edb_extra=ann.schema)
    return prog, annotation_constraints(p2)


def annotation_constraints(p2: Program) -> DisjointnessSet:
    """P and neg$P never hold together, for every IDB relation P of p2."""
    idb2 = p2.idb_schema
    unary = sorted(r for r, k in idb2.items() if k == 1)
    nullary = sorted(r for r, k in idb2.items() if k == 0)
    d_rules = [Rule((), (Atom(p, (var("X"),)), Atom(neg(p), (var("X"),)))) for p in unary]
    d_rules += [Rule((), (Atom(p), Atom(neg(p)))) for p in nullary]
    return DisjointnessSet(tuple(d_rules))


def prepare(p1: Program, p2: Program, rename: bool = True) -> tuple[Program, Program]:
    if not (p1.is_boolean and p2.is_boolean):
        raise ValueError("to_emptiness needs Boolean programs")
    if not is_simple(p1) or not is_simple(p2):
        raise ValueError("to_emptiness needs simple programs")
    if rename:
        p2 = rename_idb(p2)
    if set(p1.idb) & set(p2.idb):
        raise ValueError("IDB schemas of the two programs overlap")
    return p1, p2
