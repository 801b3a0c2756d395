"""Emptiness of a semi-simple program relative to disjointness constraints.

A program is empty w.r.t. D if it fails on every instance satisfying D. It
suffices to look at one canonical instance per 0-type: the structure whose
elements are the 1-types, with every relation outside the constraints
interpreted as full. Templates give a second, homomorphism-based route to
the same answer.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from pysat.solvers import Solver

from .core import (Atom, DisjointnessSet, Instance, LimitExceeded, Program, Rule, Schema,
                   const, is_semi_simple)
from .evaluation import DEFAULT_MAX_GROUND_CLAUSES, SAT_BACKEND, find_hom, holds
from .reduce import (MAX_SLOTS, AnnotatedSchema, removal_conditions, annotation_constraints, neg,
                     prepare)

MAX_TYPE_ELEMENTS = 1 << 14

ZeroType = frozenset
OneType = frozenset


def _valid_types(rels: list[str], forbidden: list[frozenset]) -> list[frozenset]:
    out = []
    for k in range(len(rels) + 1):
        for combo in itertools.combinations(rels, k):
            t = frozenset(combo)
            if not any(f <= t for f in forbidden):
                out.append(t)
    return out


def _forbidden(d: DisjointnessSet, arity: int) -> list[frozenset]:
    return [frozenset(a.relation for a in r.body) for r in d.rules if r.body[0].arity == arity]


def one_types(d: DisjointnessSet) -> list[OneType]:
    rels = d.relations.of_arity(1)
    if 2 ** len(rels) > MAX_TYPE_ELEMENTS * 4:
        raise LimitExceeded("1-types", 2 ** len(rels), MAX_TYPE_ELEMENTS)
    return _valid_types(rels, _forbidden(d, 1))


def zero_types(d: DisjointnessSet) -> list[ZeroType]:
    return _valid_types(d.relations.of_arity(0), _forbidden(d, 0))


def maximal(types: list[frozenset]) -> list[frozenset]:
    return [t for t in types if not any(t < u for u in types)]


def type_name(i: int) -> str:
    return f"t{i}"


@dataclass
class KTheta:
    """Canonical instance for a 0-type; relations in ``full`` hold on every tuple."""

    theta: ZeroType
    types: list[OneType]
    full: Schema
    d_schema: Schema
    names: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.types) > MAX_TYPE_ELEMENTS:
            raise LimitExceeded("K_theta elements", len(self.types), MAX_TYPE_ELEMENTS)
        self.names = {t: type_name(i) for i, t in enumerate(self.types)}

    @property
    def domain(self) -> list[str]:
        return [self.names[t] for t in self.types]

    def stored(self) -> Instance:
        facts = [Atom(p, (const(self.names[t]),)) for t in self.types for p in sorted(t)]
        facts += [Atom(p) for p in sorted(self.theta)]
        return Instance.of(facts, self.d_schema)

    def materialize(self, limit: int = 1_000_000) -> Instance:
        facts = set(self.stored().facts)
        dom = [const(x) for x in self.domain]
        for r, k in self.full.items():
            if len(dom) ** k > limit:
                raise LimitExceeded("K_theta materialization", len(dom) ** k, limit)
            for tup in itertools.product(dom, repeat=k):
                facts.add(Atom(r, tup))
        return Instance.of(facts, self.full.union(self.d_schema))

    def holds(self, p: Program, **kw) -> bool:
        return holds(p, self.stored(), full=self.full, domain=self.domain, **kw)


def build_k_theta(schema: Schema, d: DisjointnessSet, theta: ZeroType,
                  types: list[OneType] | None = None) -> KTheta:
    dsch = d.relations
    full = schema.without(dsch)
    return KTheta(frozenset(theta), one_types(d) if types is None else types, full, dsch)


@dataclass
class EmptinessResult:
    empty: bool
    theta: ZeroType | None = None
    k_theta: KTheta | None = None
    model: set | None = None


def check_empty(p: Program, d: DisjointnessSet, *, max_ground_clauses: int | None = None,
                all_types: bool = False) -> EmptinessResult:
    """Decide emptiness of ``p`` relative to ``d``.

    Only maximal 0-types and maximal 1-types are used unless ``all_types``:
    every K_theta maps homomorphically into the one built from maximal types
    and vice versa, and larger 0-types only add facts.
    """
    if not is_semi_simple(p, d):
        raise ValueError("program is not semi-simple w.r.t. the disjointness set")
    kw = {} if max_ground_clauses is None else {"max_ground_clauses": max_ground_clauses}
    schema = p.edb_schema.union(d.relations)
    ts = one_types(d)
    thetas = zero_types(d)
    if not all_types:
        ts, thetas = maximal(ts), maximal(thetas)
    for theta in sorted(thetas, key=sorted):
        k = build_k_theta(schema, d, theta, ts)
        if k.holds(p, **kw):
            return EmptinessResult(False, theta, k)
    return EmptinessResult(True)


# ----------------------------------------------------------------- templates

def _single_var_rules(p: Program, sigma: set[str]) -> list[Rule]:
    return [r for r in p.rules if all(a.relation in sigma for a in r.body)]


def _satisfies(t: frozenset, rules: list[Rule]) -> bool:
    for r in rules:
        if all(a.relation in t for a in r.body) and not any(a.relation in t for a in r.head):
            return False
    return True


def build_templates(p: Program, d: DisjointnessSet, theta: ZeroType) -> list[Instance]:
    """One template per goal-free 0-type over IDB and constraint relations that
    agrees with ``theta`` on the constraint relations."""
    if not is_semi_simple(p, d):
        raise ValueError("program is not semi-simple w.r.t. the disjointness set")
    dsch = d.relations
    sigma = p.idb_schema.union(dsch)
    un = sigma.of_arity(1)
    nu = sigma.of_arity(0)
    simple_rules = _single_var_rules(p, set(sigma))
    edb_rules = [r for r in p.rules if r not in simple_rules]
    full = p.edb_schema.without(dsch)
    if 2 ** len(un) > MAX_TYPE_ELEMENTS:
        raise LimitExceeded("template elements", 2 ** len(un), MAX_TYPE_ELEMENTS)
    out = []
    for k in range(len(nu) + 1):
        for delta in itertools.combinations(nu, k):
            delta = frozenset(delta)
            if p.goal in delta or (delta & set(dsch)) != set(theta) & set(dsch):
                continue
            if not _satisfies(delta, [r for r in simple_rules if not r.variables()]):
                continue
            elems = []
            for j in range(len(un) + 1):
                for combo in itertools.combinations(un, j):
                    t = delta | frozenset(combo)
                    if _satisfies(t, simple_rules):
                        elems.append(t)
            names = {t: f"s{i}" for i, t in enumerate(elems)}
            facts = [Atom(q, (const(names[t]),)) for t in elems for q in sorted(t & set(dsch)) if q in un]
            facts += [Atom(q) for q in sorted(delta & set(dsch))]
            for rel, ar in full.items():
                rules = [r for r in edb_rules if any(a.relation == rel for a in r.body)]
                for tup in itertools.product(elems, repeat=ar):
                    if not any(_violated(r, rel, tup, delta) for r in rules):
                        facts.append(Atom(rel, tuple(const(names[t]) for t in tup)))
            out.append(Instance.of(facts, full.union(dsch)))
    return out


def _violated(r: Rule, rel: str, tup: tuple, delta: frozenset) -> bool:
    e = next(a for a in r.body if a.relation == rel)
    asg = dict(zip(e.args, tup))
    for a in r.body:
        if a is e:
            continue
        if a.args:
            if a.relation not in asg[a.args[0]]:
                return False
        elif a.relation not in delta:
            return False
    for a in r.head:
        if a.args:
            if a.relation in asg[a.args[0]]:
                return False
        elif a.relation in delta:
            return False
    return True


def check_empty_via_templates(p: Program, d: DisjointnessSet) -> bool:
    schema = p.edb_schema.union(d.relations)
    for theta in zero_types(d):
        k = build_k_theta(schema, d, theta).materialize()
        if not any(find_hom(k, t) is not None for t in build_templates(p, d, theta)):
            return False
    return True


def zero_type_of(inst: Instance, d: DisjointnessSet) -> ZeroType:
    return frozenset(f.relation for f in inst.facts if f.arity == 0 and f.relation in d.relations)


# ---------------------------------------------------- implicit annotation

def check_empty_annotated(p1: Program, p2: Program, *, rename: bool = True,
                          max_ground_clauses: int = DEFAULT_MAX_GROUND_CLAUSES) -> EmptinessResult:
    """Same answer as ``check_empty(*to_emptiness(p1, p2))`` without writing
    out the annotated program.

    On K_theta built from maximal types every element carries a complete
    choice between P and neg$P, so an annotated copy of a rule matches a
    variable assignment exactly when its annotation equals the types of
    the assigned elements. Grounding therefore ranges over assignments of
    types to the variables of each rule of p1, minus those ruled out by p2.
    """
    p1, p2 = prepare(p1, p2, rename)
    edb = set(p1.edb_schema.union(p2.edb_schema))
    idb2 = p2.idb_schema
    unary = sorted(r for r, k in idb2.items() if k == 1)
    nullary = sorted(r for r, k in idb2.items() if k == 0 and r != p2.goal)
    u = len(unary)
    d = annotation_constraints(p2)
    schema = AnnotatedSchema(p1.edb_schema.union(p2.edb_schema), idb2).schema

    compiled = []
    for r in p1.rules:
        vs = r.variables()
        k = len(vs)
        if u * k > MAX_SLOTS:
            raise LimitExceeded("annotation slots", u * k + len(nullary), MAX_SLOTS)
        slots = [(p, v) for v in vs for p in unary] + [(p, None) for p in nullary]
        conds = removal_conditions(r, p2, edb, {s: i for i, s in enumerate(slots)})
        compiled.append((r, vs, conds))

    for bits in range(1 << len(nullary)):
        theta = frozenset([neg(p2.goal)] + [p if bits >> i & 1 else neg(p) for i, p in enumerate(nullary)])
        ids: dict = {}
        clauses = []
        count = 0
        for r, vs, conds in compiled:
            k = len(vs)
            shift = u * k
            low = (1 << shift) - 1
            codes = np.arange(1 << shift, dtype=np.int64)
            keep = np.ones(1 << shift, dtype=bool)
            for m, v in conds:
                if (bits & (m >> shift)) == (v >> shift):
                    keep &= (codes & (m & low)) != (v & low)
            sel = np.nonzero(keep)[0].tolist()
            count += len(sel)
            if count > max_ground_clauses:
                raise LimitExceeded("grounding", count, max_ground_clauses)
            umask = (1 << u) - 1
            for code in sel:
                asg = {v: code >> (u * j) & umask for j, v in enumerate(vs)}
                cl = [-_atom_id(ids, a, asg) for a in r.body if a.relation not in edb]
                cl += [_atom_id(ids, a, asg) for a in r.head]
                clauses.append(cl)
        goal = ids.get((p1.goal, ()))
        with Solver(name=SAT_BACKEND, bootstrap_with=clauses) as s:
            # without a goal atom only inconsistency makes goal certain
            if not s.solve(assumptions=[] if goal is None else [-goal]):
                if u > MAX_TYPE_ELEMENTS.bit_length() - 1:
                    raise LimitExceeded("K_theta elements", 1 << u, MAX_TYPE_ELEMENTS)
                # the maximal 1-types pick exactly one of P, neg$P per unary relation
                types = [frozenset(p if c >> i & 1 else neg(p) for i, p in enumerate(unary))
                         for c in range(1 << u)]
                k_theta = build_k_theta(schema, d, theta, types)
                return EmptinessResult(False, theta, k_theta)
    return EmptinessResult(True)


def _atom_id(ids: dict, a: Atom, asg: dict) -> int:
    key = (a.relation, tuple(asg[t] for t in a.args))
    i = ids.get(key)
    if i is None:
        i = ids[key] = len(ids) + 1
    return i
