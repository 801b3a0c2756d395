"""Turn a pair of Boolean MDDLog programs into a pair of simple programs.

Three stages:

1. close every rule under identification of its variables;
2. split rule bodies until they are biconnected and reflexive EDB atoms
   stand alone, linking the fragments through fresh IDB relations;
3. replace the EDB part of every rule by one atom over a fresh EDB relation
   ``R_q`` that stands for the whole conjunction ``q``, adding a copy of the
   rule for every injective homomorphism of ``q`` into another stored
   conjunction.

Stage 3 is done jointly for both programs so that they end up over the
same EDB schema.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import (Atom, Instance, LimitExceeded, Program, Rule, Schema, Term,
                   canonical_cq, canonical_rule, const, dedupe_rules, metrics, var, vars_of)
from .evaluation import eval_cq, find_hom

MAX_IDENTIFY_VARS = 8


# ------------------------------------------------------- identification

def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def close_under_identification(p: Program) -> Program:
    out = []
    for r in p.rules:
        vs = r.variables()
        if len(vs) > MAX_IDENTIFY_VARS:
            raise LimitExceeded("close_under_identification", len(vs), MAX_IDENTIFY_VARS)
        for part in _set_partitions(vs):
            m: dict[Term, Term] = {}
            for block in part:
                rep = min(block, key=vs.index)
                for v in block:
                    m[v] = rep
            out.append(r.substitute(m))
    return p.with_rules(dedupe_rules(out))


# -------------------------------------------------------------- pruning

def _frozen(r: Rule) -> Instance:
    facts = [Atom("b:" + a.relation, tuple(const(t.name) for t in a.args)) for a in r.body]
    facts += [Atom("h:" + a.relation, tuple(const(t.name) for t in a.args)) for a in r.head]
    return Instance.of(facts)


def subsumes(r: Rule, s: Rule) -> bool:
    """True if some substitution maps the body of r into that of s and the
    head of r into that of s, which makes s redundant next to r."""
    if len(r.body) > len(s.body) or len(r.head) > len(s.head):
        return False
    return find_hom(_frozen(r), _frozen(s)) is not None


def prune(p: Program, subsume: bool = True) -> Program:
    """Drop rules that cannot matter for certain answers: rules whose head
    mentions an IDB relation no body uses (make it true everywhere), rules
    whose body mentions an IDB relation no head derives (make it false
    everywhere) and, if ``subsume``, rules subsumed by another rule.

    The first two removals keep a program closed under identification of
    variables; subsumption does not, so it is only applied once the EDB
    parts have been consolidated."""
    rules = list(p.rules)
    while True:
        in_body = {a.relation for r in rules for a in r.body}
        in_head = {a.relation for r in rules for a in r.head}
        idb = p.idb
        keep = [r for r in rules
                if not any(a.relation != p.goal and a.relation not in in_body for a in r.head)
                and not any(a.relation in idb and a.relation not in in_head for a in r.body)]
        out: list[Rule] = []
        for i, r in enumerate(keep):
            if subsume and any(subsumes(s, r) and (not subsumes(r, s) or j < i)
                   for j, s in enumerate(keep) if j != i):
                continue
            out.append(r)
        if len(out) == len(rules):
            return p.with_rules(out)
        rules = out


# ------------------------------------------------------------ splitting

class _Fresh:
    """Fresh IDB relations, shared between splits with identical definitions."""

    def __init__(self, prefix: str = "gen$q"):
        self.prefix = prefix
        self.by_key: dict[str, str] = {}

    def get(self, key: str) -> str:
        if key not in self.by_key:
            self.by_key[key] = f"{self.prefix}{len(self.by_key) + 1}"
        return self.by_key[key]


def _components(atoms: list[Atom], ignore: Term | None = None) -> list[list[int]]:
    """Indices of atoms grouped by shared variables other than ``ignore``;
    atoms without such variables are left out."""
    parent: dict[Term, Term] = {}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    live = []
    for i, a in enumerate(atoms):
        vs = [t for t in a.variables() if t != ignore]
        if not vs:
            continue
        live.append((i, vs))
        for v in vs:
            parent.setdefault(v, v)
        for v in vs[1:]:
            parent[find(v)] = find(vs[0])
    groups: dict[Term, list[int]] = {}
    for i, vs in live:
        groups.setdefault(find(vs[0]), []).append(i)
    return list(groups.values())


def _head_part(head, frag_vars: set[Term]):
    return tuple(a for a in head if not a.args or any(t in frag_vars for t in a.args))


def _split_once(r: Rule, edb: set[str], fresh: _Fresh) -> list[Rule] | None:
    body = list(r.body)
    # (b) variable-disjoint parts, linked by a fresh nullary relation
    comps = _components(body)
    if len(comps) >= 2:
        first = set(comps[0])
        q1 = [a for i, a in enumerate(body) if i in first or not a.variables()]
        q2 = [a for i, a in enumerate(body) if i not in first and a.variables()]
        return _link(r, q1, q2, (), fresh)
    # (c) reflexive EDB atoms next to other EDB atoms are detached
    edb_atoms = [a for a in body if a.relation in edb]
    if len(edb_atoms) > 1:
        for a in edb_atoms:
            vs = set(a.args)
            if a.arity == 0 or (len(vs) == 1 and next(iter(vs)).is_var):
                rest = list(body)
                rest.remove(a)
                args = a.args[:1]
                q = Atom(fresh.get(f"refl:{a.relation}/{a.arity}"), args)
                return [Rule((q,), (a,)), Rule(r.head, (q,) + tuple(rest))]
    # a nullary EDB atom next to atoms with variables is detached the same way
    for a in edb_atoms:
        if a.arity == 0 and any(b.variables() for b in body):
            rest = [b for b in body if b != a]
            q = Atom(fresh.get(f"refl:{a.relation}/0"), ())
            return [Rule((q,), (a,)), Rule(r.head, (q,) + tuple(rest))]
    # (a) split at a cut variable, linked by a fresh monadic relation
    for x in r.variables():
        comps = _components(body, ignore=x)
        if len(comps) >= 2:
            first = set(comps[0])
            q1 = [a for i, a in enumerate(body) if i in first or not
                  [t for t in a.variables() if t != x]]
            q2 = [a for i, a in enumerate(body) if a not in q1]
            return _link(r, q1, q2, (x,), fresh)
    return None


def _link(r: Rule, q1: list[Atom], q2: list[Atom], xs: tuple, fresh: _Fresh) -> list[Rule]:
    p1 = _head_part(r.head, set(vars_of(q1)))
    p2 = _head_part(r.head, set(vars_of(q2)))
    mark = [Atom("mark$", xs)]
    key = canonical_rule(Rule(tuple(p1) + tuple(mark), tuple(q1) + tuple(mark)))
    q = Atom(fresh.get(key), xs)
    return [Rule(tuple(p1) + (q,), tuple(q1)), Rule(tuple(p2), (q,) + tuple(q2))]


def biconnect(p: Program, fresh: _Fresh | None = None) -> Program:
    fresh = fresh or _Fresh()
    edb = set(p.edb_schema)
    todo = list(p.rules)
    out = []
    while todo:
        r = todo.pop(0)
        parts = _split_once(r, edb, fresh)
        if parts is None:
            out.append(r)
        else:
            todo[:0] = parts
    return p.with_rules(dedupe_rules(out))


# ---------------------------------------------------------- consolidation

@dataclass(frozen=True)
class ConsolidationEntry:
    relation: str
    variables: tuple[Term, ...]
    atoms: tuple[Atom, ...]

    @property
    def arity(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class ConsolidationMap:
    entries: dict  # canonical string -> ConsolidationEntry

    @property
    def schema(self) -> Schema:
        return Schema({e.relation: e.arity for e in self.entries.values()})

    def by_relation(self) -> dict[str, ConsolidationEntry]:
        return {e.relation: e for e in self.entries.values()}


def injective_homs(src: list[Atom], dst: list[Atom]):
    """All injective variable maps sending every atom of src onto an atom of dst."""
    src = sorted(src, key=lambda a: -a.arity)
    dst_by_rel: dict[str, list[Atom]] = {}
    for a in dst:
        dst_by_rel.setdefault(a.relation, []).append(a)
    h: dict[Term, Term] = {}
    used: set[Term] = set()
    out = []

    def rec(i):
        if i == len(src):
            out.append(dict(h))
            return
        a = src[i]
        for b in dst_by_rel.get(a.relation, ()):
            added = []
            ok = True
            for s, t in zip(a.args, b.args):
                if not s.is_var:
                    ok = s == t
                elif s in h:
                    ok = h[s] == t
                elif t in used:
                    ok = False
                else:
                    h[s] = t
                    used.add(t)
                    added.append(s)
                if not ok:
                    break
            if ok:
                rec(i + 1)
            for s in added:
                used.discard(h.pop(s))

    rec(0)
    return out


def consolidate(p1: Program, p2: Program) -> tuple[Program, Program, ConsolidationMap]:
    edb = set(p1.edb_schema) | set(p2.edb_schema)
    parts: dict[str, list[Atom]] = {}
    for r in p1.rules + p2.rules:
        q = [a for a in r.body if a.relation in edb]
        if q:
            parts.setdefault(canonical_cq(q), list(dict.fromkeys(q)))
    entries = {}
    for k, key in enumerate(sorted(parts), 1):
        q = parts[key]
        entries[key] = ConsolidationEntry(f"edb$q{k}", tuple(vars_of(q)), tuple(q))
    cmap = ConsolidationMap(entries)
    stored = [entries[k] for k in sorted(entries)]

    def rewrite(p: Program) -> Program:
        out = []
        for r in p.rules:
            q1 = [a for a in r.body if a.relation in edb]
            idb_part = tuple(a for a in r.body if a.relation not in edb)
            if not q1:
                out.append(r)
                continue
            taken = {t.name for t in r.variables()}
            for e in stored:
                for h in injective_homs(q1, list(e.atoms)):
                    inv = {t: s for s, t in h.items()}
                    args = []
                    n = 0
                    for v in e.variables:
                        if v in inv:
                            args.append(inv[v])
                        else:
                            n += 1
                            while f"F{n}" in taken:
                                n += 1
                            args.append(var(f"F{n}"))
                    out.append(Rule(r.head, (Atom(e.relation, tuple(args)),) + idb_part))
        return Program(tuple(dedupe_rules(out)), goal=p.goal, goal_arity=p.arity,
                       edb_extra=cmap.schema)

    return rewrite(p1), rewrite(p2), cmap


@dataclass(frozen=True)
class SimplifiedPair:
    left: Program
    right: Program
    cmap: ConsolidationMap
    width: int


def simplify_pair(p1: Program, p2: Program) -> SimplifiedPair:
    """Simple Boolean programs whose containment reflects that of p1, p2 on
    instances of girth above the returned atom width."""
    for p in (p1, p2):
        if not p.is_boolean:
            raise ValueError("simplify_pair needs Boolean programs")
        if p.constants():
            raise ValueError("simplify_pair needs constant-free programs")
    edb = p1.edb_schema.union(p2.edb_schema)
    p1 = p1.with_rules(p1.rules, edb_extra=edb)
    p2 = p2.with_rules(p2.rules, edb_extra=edb)
    w = max(metrics(p1).atom_width, metrics(p2).atom_width)
    fresh = _Fresh()
    b1 = prune(biconnect(close_under_identification(p1), fresh), subsume=False)
    b2 = prune(biconnect(close_under_identification(p2), fresh), subsume=False)
    s1, s2, cmap = consolidate(b1, b2)
    return SimplifiedPair(prune(s1), prune(s2), cmap, w)


# -------------------------------------------- instance translations

def edb_to_consolidated(inst: Instance, cmap: ConsolidationMap) -> Instance:
    """All facts R_q(a) such that the instance satisfies q(a)."""
    from .core import CQ
    facts = []
    for e in cmap.entries.values():
        for t in eval_cq(CQ(e.variables, e.atoms), inst):
            facts.append(Atom(e.relation, tuple(const(c) for c in t)))
    return Instance.of(facts, cmap.schema)


def consolidated_to_edb(inst: Instance, cmap: ConsolidationMap, schema: Schema | None = None) -> Instance:
    """Unfold every R_q fact into the atoms of q."""
    rel = cmap.by_relation()
    facts = []
    for f in inst.facts:
        e = rel[f.relation]
        m = dict(zip(e.variables, f.args))
        facts.extend(a.substitute(m) for a in e.atoms)
    return Instance.of(facts, schema)
