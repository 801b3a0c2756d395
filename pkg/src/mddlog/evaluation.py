"""Certain answers, query evaluation, homomorphisms and instance enumeration.

Disjunctive programs are decided by grounding against the instance and
handing the ground clauses to a SAT solver. Grounding only materialises
IDB atoms that can possibly be derived: a relaxed fixpoint that fires every
head disjunct is computed first, and every model of the program restricted
to that set is still a model, so nothing outside it matters.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from pysat.solvers import Solver

from .core import CQ, UCQ, Atom, Instance, LimitExceeded, Program, Schema, Term, const

DEFAULT_MAX_GROUND_CLAUSES = 10_000_000
SAT_BACKEND = "minisat22"

GroundAtom = tuple[str, tuple[str, ...]]


class ResourceLimitError(LimitExceeded):
    pass


# ------------------------------------------------------------------ store

class _Store:
    """Relation tuples with per-position indexes; some relations may be 'full'
    (every tuple over ``domain``) without being materialised."""

    def __init__(self, tuples: Mapping[str, Iterable[tuple]] = (), full: Iterable[str] = (),
                 domain: Iterable[str] = ()):
        self.rel: dict[str, set[tuple]] = {}
        self.idx: dict[tuple[str, int, str], list[tuple]] = {}
        self.full = frozenset(full)
        self.domain = list(domain)
        for r, ts in dict(tuples).items():
            for t in ts:
                self.add(r, t)

    def add(self, r: str, t: tuple) -> bool:
        s = self.rel.setdefault(r, set())
        if t in s:
            return False
        s.add(t)
        for i, v in enumerate(t):
            self.idx.setdefault((r, i, v), []).append(t)
        return True

    def has(self, r: str, t: tuple) -> bool:
        if r in self.full:
            return all(v in self._domset for v in t)
        return t in self.rel.get(r, ())

    @property
    def _domset(self):
        ds = getattr(self, "_ds", None)
        if ds is None:
            ds = self._ds = set(self.domain)
        return ds

    def size(self, r: str, arity: int) -> int:
        if r in self.full:
            return len(self.domain) ** arity
        return len(self.rel.get(r, ()))

    def candidates(self, r: str, args: tuple, binding: list) -> Iterable[tuple]:
        best = None
        for i, a in enumerate(args):
            v = a if isinstance(a, str) else binding[a]
            if v is not None:
                lst = self.idx.get((r, i, v), ())
                if best is None or len(lst) < len(best):
                    best = lst
                    if not lst:
                        return ()
        if best is None:
            return self.rel.get(r, ())
        return best


def _compile_atoms(atoms: Iterable[Atom], index: dict[Term, int]) -> list[tuple[str, tuple]]:
    out = []
    for a in atoms:
        args = []
        for t in a.args:
            if t.is_var:
                args.append(index.setdefault(t, len(index)))
            else:
                args.append(t.name)
        out.append((a.relation, tuple(args)))
    return out


def _plan(atoms: list[tuple[str, tuple]], store: _Store, bound: set[int]) -> list[tuple[str, tuple]]:
    """Greedy join order: most bound arguments first, then smallest relation."""
    rest = list(atoms)
    order = []
    bound = set(bound)
    while rest:
        def key(item):
            r, args = item
            nb = sum(1 for a in args if isinstance(a, str) or a in bound)
            full = r in store.full
            return (full and nb < len(args), -(nb == len(args)), -nb, store.size(r, len(args)))
        best = min(rest, key=key)
        rest.remove(best)
        order.append(best)
        bound.update(a for a in best[1] if not isinstance(a, str))
    return order


def _matches(plan: list[tuple[str, tuple]], store: _Store, binding: list) -> Iterator[list]:
    n = len(plan)

    def rec(i: int):
        if i == n:
            yield binding
            return
        r, args = plan[i]
        if r in store.full:
            unbound = []
            for a in args:
                if isinstance(a, str):
                    if a not in store._domset:
                        return
                elif binding[a] is None and a not in unbound:
                    unbound.append(a)
            if not unbound:
                yield from rec(i + 1)
                return
            for combo in itertools.product(store.domain, repeat=len(unbound)):
                for a, v in zip(unbound, combo):
                    binding[a] = v
                yield from rec(i + 1)
            for a in unbound:
                binding[a] = None
            return
        for tup in store.candidates(r, args, binding):
            newly = []
            ok = True
            for a, v in zip(args, tup):
                if isinstance(a, str):
                    if a != v:
                        ok = False
                        break
                else:
                    b = binding[a]
                    if b is None:
                        binding[a] = v
                        newly.append(a)
                    elif b != v:
                        ok = False
                        break
            if ok:
                yield from rec(i + 1)
            for a in newly:
                binding[a] = None

    return rec(0)


def _inst(args: tuple, binding: list) -> tuple:
    return tuple(a if isinstance(a, str) else binding[a] for a in args)


# -------------------------------------------------------------- grounding

@dataclass
class GroundProgram:
    """Ground clauses ``body IDB atoms -> disjunction of head atoms``."""

    clauses: list[tuple[tuple[GroundAtom, ...], tuple[GroundAtom, ...]]]
    possible: set[GroundAtom]
    adom: list[str]
    unsat_trivially: bool = False


def ground(p: Program, inst: Instance, *, full: Iterable[str] = (), domain: Iterable[str] | None = None,
           max_ground_clauses: int = DEFAULT_MAX_GROUND_CLAUSES) -> GroundProgram:
    full = frozenset(full)
    dom = sorted(set(domain) if domain is not None else set(inst.adom))
    store = _Store(inst.tuples, full=full, domain=dom)
    idb = p.idb
    compiled = []
    for r in p.rules:
        index: dict[Term, int] = {}
        body = _compile_atoms(r.body, index)
        head = _compile_atoms(r.head, index)
        compiled.append((len(index), body, head))
    while True:
        clauses: dict = {}
        new: list[GroundAtom] = []
        newset = set()
        for nvars, body, head in compiled:
            plan = _plan(body, store, set())
            binding = [None] * nvars
            for b in _matches(plan, store, binding):
                bidb = tuple(sorted({(r, _inst(a, b)) for r, a in body if r in idb}))
                hd = tuple(sorted({(r, _inst(a, b)) for r, a in head}))
                clauses[(bidb, hd)] = None
                if len(clauses) > max_ground_clauses:
                    raise ResourceLimitError("grounding", len(clauses), max_ground_clauses)
                for h in hd:
                    if h not in newset and not store.has(*h):
                        newset.add(h)
                        new.append(h)
        if not new:
            break
        for r, t in new:
            store.add(r, t)
    possible = {(r, t) for r in idb for t in store.rel.get(r, ())}
    cl = list(clauses)
    return GroundProgram(cl, possible, dom, any(not b and not h for b, h in cl))


class _SatTheory:
    def __init__(self, g: GroundProgram):
        self.g = g
        self.ids: dict[GroundAtom, int] = {a: i + 1 for i, a in enumerate(sorted(g.possible))}
        self.solver = Solver(name=SAT_BACKEND, bootstrap_with=[
            [-self.ids[a] for a in b] + [self.ids[a] for a in h] for b, h in g.clauses])
        self.consistent = self.solver.solve()

    def entails(self, a: GroundAtom) -> bool:
        if not self.consistent:
            return True
        i = self.ids.get(a)
        if i is None:
            return False
        return not self.solver.solve(assumptions=[-i])

    def model(self) -> set[GroundAtom] | None:
        if not self.consistent:
            return None
        m = self.solver.get_model() or []
        inv = {v: k for k, v in self.ids.items()}
        return {inv[x] for x in m if x > 0 and x in inv}

    def close(self):
        self.solver.delete()


def ddlog_answers(p: Program, inst: Instance, *, full: Iterable[str] = (),
                  domain: Iterable[str] | None = None,
                  max_ground_clauses: int = DEFAULT_MAX_GROUND_CLAUSES) -> set[tuple[str, ...]]:
    """Certain answers of ``p`` on ``inst`` as tuples of constant names."""
    g = ground(p, inst, full=full, domain=domain, max_ground_clauses=max_ground_clauses)
    adom = g.adom
    k = p.arity
    th = _SatTheory(g)
    try:
        if not th.consistent:
            return set(itertools.product(adom, repeat=k))
        aset = set(adom)
        out = set()
        for r, t in sorted(g.possible):
            if r == p.goal and all(v in aset for v in t) and th.entails((r, t)):
                out.add(t)
        return out
    finally:
        th.close()


def holds(p: Program, inst: Instance, **kw) -> bool:
    """Boolean certain answer."""
    if not p.is_boolean:
        raise ValueError("holds() needs a Boolean program")
    return () in ddlog_answers(p, inst, **kw)


def countermodel(p: Program, inst: Instance, **kw) -> set[GroundAtom] | None:
    """A model of ``p`` extending ``inst`` without goal(), or None."""
    g = ground(p, inst, **kw)
    th = _SatTheory(g)
    try:
        gid = th.ids.get((p.goal, ()))
        if not th.consistent:
            return None
        if gid is not None and not th.solver.solve(assumptions=[-gid]):
            return None
        m = th.solver.get_model() or []
        inv = {v: k for k, v in th.ids.items()}
        return {inv[x] for x in m if x > 0 and x in inv}
    finally:
        th.close()


# ---------------------------------------------------------------- queries

def eval_cq(q: CQ, inst: Instance, *, first_only: bool = False) -> set[tuple[str, ...]]:
    store = _Store(inst.tuples)
    index: dict[Term, int] = {}
    body = _compile_atoms(q.atoms, index)
    plan = _plan(body, store, set())
    ans_spec = tuple(index[v] if v.is_var else v.name for v in q.answer_vars)
    out = set()
    for b in _matches(plan, store, [None] * len(index)):
        out.add(_inst(ans_spec, b))
        if first_only:
            break
    return out


def eval_ucq(q: UCQ, inst: Instance) -> set[tuple[str, ...]]:
    out: set = set()
    for cq in q.disjuncts:
        out |= eval_cq(cq, inst, first_only=not cq.answer_vars)
    return out


# ------------------------------------------------------------ homomorphism

def find_hom(src: Instance, dst: Instance) -> dict[str, str] | None:
    """A homomorphism from ``src`` to ``dst`` as a constant map, or None."""
    dt = dst.tuples
    for f in src.facts:
        if f.arity == 0 and () not in dt.get(f.relation, ()):
            return None
    # candidates filtered by relation/position profile
    prof_dst: dict[str, set] = {}
    for r, ts in dt.items():
        for t in ts:
            for i, v in enumerate(t):
                prof_dst.setdefault(v, set()).add((r, i))
    occ: dict[str, list[Atom]] = {}
    for f in src.facts:
        for t in f.args:
            occ.setdefault(t.name, []).append(f)
    elems = sorted(occ)
    cand = {}
    for a in elems:
        need = {(f.relation, i) for f in occ[a] for i, t in enumerate(f.args) if t.name == a}
        cand[a] = sorted(b for b, pr in prof_dst.items() if need <= pr)
        if not cand[a]:
            return None
    # connectivity-guided order
    order = []
    placed = set()
    remaining = set(elems)
    while remaining:
        frontier = [a for a in remaining if any(t.name in placed for f in occ[a] for t in f.args)]
        pool = frontier or list(remaining)
        a = min(pool, key=lambda x: (len(cand[x]), x))
        order.append(a)
        placed.add(a)
        remaining.discard(a)
    pos = {a: i for i, a in enumerate(order)}
    checks: list[list[Atom]] = [[] for _ in order]
    for f in src.facts:
        if f.args:
            checks[max(pos[t.name] for t in f.args)].append(f)
    h: dict[str, str] = {}

    def rec(i: int) -> bool:
        if i == len(order):
            return True
        a = order[i]
        for b in cand[a]:
            h[a] = b
            if all(tuple(h[t.name] for t in f.args) in dt.get(f.relation, ()) for f in checks[i]):
                if rec(i + 1):
                    return True
        del h[a]
        return False

    return dict(h) if rec(0) else None


# ------------------------------------------------------------------ girth

def girth(inst: Instance) -> float:
    """Length of a shortest cycle; 1 if a fact repeats an element; inf if acyclic.

    Cycles only run through facts of arity at least two. Away from repeated
    elements a cycle of facts is a cycle of the fact/element incidence graph
    of half its length.
    """
    facts = [f for f in inst.facts if f.arity >= 2]
    for f in facts:
        if len(set(f.args)) < f.arity:
            return 1
    adj: dict = {}
    for f in facts:
        for t in f.args:
            adj.setdefault(("f", f), []).append(("e", t.name))
            adj.setdefault(("e", t.name), []).append(("f", f))
    best = math.inf
    for s in adj:
        if s[0] != "e":
            continue
        dist = {s: 0}
        parent = {s: None}
        queue = [s]
        for u in queue:
            if 2 * dist[u] >= best:
                break
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best / 2 if best != math.inf else math.inf


def _fact_cycle_len(adj: dict, f: tuple[str, tuple], bound: float) -> float:
    """Shortest cycle through a new fact f, given the incidence adjacency of
    the current facts; only lengths up to ``bound`` are searched."""
    elems = list(dict.fromkeys(f[1]))
    if len(elems) < len(f[1]):
        return 1
    if len(elems) < 2:
        return math.inf
    best = math.inf
    targets = set(elems)
    for s in elems:
        dist = {s: 0}
        queue = [s]
        for u in queue:
            d = dist[u]
            if d + 1 > bound:
                break
            for g in adj.get(u, ()):
                for w in g[1]:
                    if w not in dist:
                        dist[w] = d + 1
                        if w in targets and w != s:
                            best = min(best, d + 2)
                        queue.append(w)
        targets.discard(s)
    return best


# ----------------------------------------------------------- enumeration

MAX_ENUM_DOMAIN = 4
MAX_FREE_FACTS = 22
MAX_SEARCH_NODES = 5_000_000


def enum_instances(schema: Mapping[str, int], max_domain_size: int,
                   min_girth_exclusive: float = 0, fixed: Iterable[str] = ()) -> Iterator[Instance]:
    """All instances over ``schema`` with at most ``max_domain_size`` constants
    and girth strictly above ``min_girth_exclusive``, one per isomorphism class.

    The ``fixed`` constants are always available and never renamed; the rest
    of the domain is filled with c1, c2, ... Output order is deterministic."""
    if max_domain_size > MAX_ENUM_DOMAIN:
        raise LimitExceeded("enum_instances", max_domain_size, MAX_ENUM_DOMAIN)
    fixed = list(dict.fromkeys(fixed))
    generic = [f"c{i}" for i in range(1, max(max_domain_size - len(fixed), 0) + 1)]
    consts = fixed + generic
    facts: list[tuple[str, tuple]] = []
    for r, k in sorted(schema.items()):
        for t in itertools.product(consts, repeat=k):
            if min_girth_exclusive >= 1 and k >= 2 and len(set(t)) < k:
                continue
            facts.append((r, t))
    facts.sort(key=lambda f: (max((consts.index(c) for c in f[1]), default=-1), f))
    F = len(facts)
    if min_girth_exclusive <= 0 and F > MAX_FREE_FACTS:
        raise LimitExceeded("enum_instances facts", F, MAX_FREE_FACTS)
    fidx = {f: i for i, f in enumerate(facts)}
    perms = []
    nf = len(fixed)
    for p in itertools.permutations(range(nf, len(consts))):
        if list(p) == list(range(nf, len(consts))):
            continue
        m = {c: c for c in fixed}
        m.update({consts[nf + i]: consts[j] for i, j in enumerate(p)})
        perms.append([fidx.get((r, tuple(m[c] for c in t)), -1) for r, t in facts])

    def canonical(mask: int) -> bool:
        bits = [i for i in range(F) if mask >> i & 1]
        for pm in perms:
            other = 0
            for i in bits:
                other |= 1 << pm[i]
            if other < mask:
                return False
        return True

    nodes = 0
    adj: dict[str, list] = {}

    def build(mask: int) -> Instance:
        return Instance.of([Atom(r, tuple(const(c) for c in t))
                            for i, (r, t) in enumerate(facts) if mask >> i & 1], schema)

    if min_girth_exclusive <= 0:
        for mask in range(1 << F):
            if canonical(mask):
                yield build(mask)
        return

    # depth-first with girth pruning; girth can only drop when facts are added
    results = []

    def rec(i: int, mask: int):
        nonlocal nodes
        nodes += 1
        if nodes > MAX_SEARCH_NODES:
            raise LimitExceeded("enum_instances search", nodes, MAX_SEARCH_NODES)
        if i == F:
            results.append(mask)
            return
        rec(i + 1, mask)
        f = facts[i]
        if len(f[1]) >= 2:
            cyc = _fact_cycle_len(adj, f, min_girth_exclusive)
            if cyc < math.inf and cyc <= min_girth_exclusive:
                return
            for c in set(f[1]):
                adj.setdefault(c, []).append(f)
            rec(i + 1, mask | 1 << i)
            for c in set(f[1]):
                adj[c].pop()
        else:
            rec(i + 1, mask | 1 << i)

    rec(0, 0)
    for mask in sorted(results):
        if canonical(mask):
            yield build(mask)


def all_models_brute(p: Program, inst: Instance) -> bool:  # pragma: no cover - debugging aid
    return holds(p, inst)


@dataclass
class Counterexample:
    instance: Instance
    answer: tuple[str, ...]


def brute_contains(p1: Program, p2: Program, max_size: int, min_girth_exclusive: float = 0,
                   schema: Mapping[str, int] | None = None,
                   max_ground_clauses: int = DEFAULT_MAX_GROUND_CLAUSES) -> Counterexample | None:
    """First instance (in enumeration order) where p1 has a certain answer p2 lacks."""
    if p1.arity != p2.arity:
        raise ValueError("programs have different arities")
    sch = Schema(schema) if schema is not None else joint_edb_schema(p1, p2)
    fixed = sorted({t.name for p in (p1, p2) for t in p.constants()})
    for inst in enum_instances(sch, max_size, min_girth_exclusive, fixed):
        a1 = ddlog_answers(p1, inst, max_ground_clauses=max_ground_clauses)
        if not a1:
            continue
        a2 = ddlog_answers(p2, inst, max_ground_clauses=max_ground_clauses)
        diff = sorted(a1 - a2)
        if diff:
            return Counterexample(inst, diff[0])
    return None


def joint_edb_schema(p1: Program, p2: Program) -> Schema:
    edb = p1.edb_schema.union(p2.edb_schema)
    clash = set(edb) & (set(p1.idb) | set(p2.idb))
    if clash:
        raise ValueError(f"relations used as EDB in one program and IDB in the other: {sorted(clash)}")
    return edb
