"""Core data types: schemas, terms, atoms, rules, programs and instances.

Everything here is immutable. Programs are plain containers; structural
checks that a caller may want to inspect rather than catch live in
:func:`validate_program`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

GOAL = "goal"
RESERVED_PREFIXES = ("edb$", "neg$", "cst$", "gen$", "p2$", "fresh$", "query$", "adom$")


class SchemaError(ValueError):
    """Raised when relation arities are used inconsistently."""


class LimitExceeded(RuntimeError):
    """Raised when a documented size guard is hit."""

    def __init__(self, stage: str, measured, limit):
        super().__init__(f"{stage}: {measured} exceeds limit {limit}")
        self.stage = stage
        self.measured = measured
        self.limit = limit


class Schema(Mapping[str, int]):
    """A finite map from relation names to arities."""

    __slots__ = ("_rels",)

    def __init__(self, relations: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = relations.items() if isinstance(relations, Mapping) else relations
        rels: dict[str, int] = {}
        for name, arity in items:
            if arity < 0:
                raise SchemaError(f"negative arity for {name}")
            if rels.get(name, arity) != arity:
                raise SchemaError(f"relation {name} used with arities {rels[name]} and {arity}")
            rels[name] = arity
        self._rels = dict(sorted(rels.items()))

    def __getitem__(self, name: str) -> int:
        return self._rels[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._rels)

    def __len__(self) -> int:
        return len(self._rels)

    def __hash__(self) -> int:
        return hash(tuple(self._rels.items()))

    def __eq__(self, other) -> bool:
        if isinstance(other, Schema):
            return self._rels == other._rels
        return NotImplemented

    def __repr__(self) -> str:
        return "Schema(" + ", ".join(f"{k}/{v}" for k, v in self._rels.items()) + ")"

    def union(self, other: Mapping[str, int]) -> "Schema":
        return Schema(list(self.items()) + list(other.items()))

    def restrict(self, names: Iterable[str]) -> "Schema":
        keep = set(names)
        return Schema({k: v for k, v in self._rels.items() if k in keep})

    def without(self, names: Iterable[str]) -> "Schema":
        drop = set(names)
        return Schema({k: v for k, v in self._rels.items() if k not in drop})

    def of_arity(self, *arities: int) -> list[str]:
        return [k for k, v in self._rels.items() if v in arities]


@dataclass(frozen=True, order=True, slots=True)
class Term:
    name: str
    is_var: bool = True

    def __str__(self) -> str:
        return self.name


def var(name: str) -> Term:
    return Term(name, True)


def const(name: str) -> Term:
    return Term(name, False)


@dataclass(frozen=True, order=True, slots=True)
class Atom:
    relation: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> list[Term]:
        return [t for t in dict.fromkeys(self.args) if t.is_var]

    def constants(self) -> list[Term]:
        return [t for t in dict.fromkeys(self.args) if not t.is_var]

    def is_ground(self) -> bool:
        return all(not t.is_var for t in self.args)

    def substitute(self, mapping: Mapping[Term, Term]) -> "Atom":
        return Atom(self.relation, tuple(mapping.get(t, t) for t in self.args))

    def __str__(self) -> str:
        return f"{self.relation}({','.join(t.name for t in self.args)})"


def atom(relation: str, *args: str) -> Atom:
    """Build an atom from strings: uppercase or '_' first letter means variable."""
    return Atom(relation, tuple(Term(a, a[:1].isupper() or a[:1] == "_") for a in args))


def vars_of(atoms: Iterable[Atom]) -> list[Term]:
    seen: dict[Term, None] = {}
    for a in atoms:
        for t in a.args:
            if t.is_var:
                seen.setdefault(t)
    return list(seen)


@dataclass(frozen=True, slots=True)
class Rule:
    head: tuple[Atom, ...]
    body: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(dict.fromkeys(self.head)))
        object.__setattr__(self, "body", tuple(dict.fromkeys(self.body)))
        if not self.body:
            raise ValueError("rule bodies must be non-empty")
        bvars = set(vars_of(self.body))
        for a in self.head:
            for t in a.args:
                if t.is_var and t not in bvars:
                    raise ValueError(f"head variable {t} does not occur in body of {self}")

    def variables(self) -> list[Term]:
        return vars_of(self.body)

    def constants(self) -> set[Term]:
        return {t for a in self.head + self.body for t in a.args if not t.is_var}

    def substitute(self, mapping: Mapping[Term, Term]) -> "Rule":
        return Rule(tuple(a.substitute(mapping) for a in self.head),
                    tuple(a.substitute(mapping) for a in self.body))

    def __str__(self) -> str:
        head = " | ".join(map(str, self.head)) if self.head else "false"
        return f"{head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class Program:
    """A disjunctive Datalog program with a distinguished goal relation.

    ``edb_extra`` lets a program carry EDB relations that none of its rules
    mention, so that two programs can be compared over a shared schema.
    """

    rules: tuple[Rule, ...]
    goal: str = GOAL
    goal_arity: int | None = None
    edb_extra: Schema = field(default_factory=Schema)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        sch = self.schema  # raises on arity clashes
        if self.goal_arity is not None and self.goal in sch and sch[self.goal] != self.goal_arity:
            raise SchemaError("declared goal arity disagrees with rules")

    @cached_property
    def schema(self) -> Schema:
        pairs = [(a.relation, a.arity) for r in self.rules for a in r.head + r.body]
        pairs += list(self.edb_extra.items())
        if self.goal_arity is not None:
            pairs.append((self.goal, self.goal_arity))
        return Schema(pairs)

    @cached_property
    def idb(self) -> frozenset[str]:
        return frozenset({a.relation for r in self.rules for a in r.head} | {self.goal})

    @cached_property
    def edb_schema(self) -> Schema:
        return self.schema.without(self.idb)

    @cached_property
    def idb_schema(self) -> Schema:
        s = self.schema.restrict(self.idb)
        return s if self.goal in s else s.union({self.goal: self.arity})

    @property
    def arity(self) -> int:
        if self.goal in self.schema:
            return self.schema[self.goal]
        return self.goal_arity or 0

    @property
    def is_boolean(self) -> bool:
        return self.arity == 0

    def constants(self) -> set[Term]:
        return set().union(*(r.constants() for r in self.rules)) if self.rules else set()

    def with_rules(self, rules: Iterable[Rule], **kw) -> "Program":
        args = dict(goal=self.goal, goal_arity=self.arity, edb_extra=self.edb_schema)
        args.update(kw)
        return Program(tuple(rules), **args)

    def __str__(self) -> str:
        return "\n".join(map(str, self.rules))


@dataclass(frozen=True)
class DisjointnessSet:
    """Rules of the form  false :- P1(x), ..., Pn(x)  or  false :- P1(), ..., Pn()."""

    rules: tuple[Rule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        for r in self.rules:
            if r.head:
                raise ValueError("disjointness rules have empty heads")
            ar = {a.arity for a in r.body}
            vs = r.variables()
            if len(ar) != 1 or ar.pop() > 1 or len(vs) > 1 or r.constants():
                raise ValueError(f"not a disjointness rule: {r}")

    @cached_property
    def relations(self) -> Schema:
        return Schema((a.relation, a.arity) for r in self.rules for a in r.body)


@dataclass(frozen=True)
class Instance:
    facts: frozenset[Atom]
    extra_schema: Schema = field(default_factory=Schema)

    def __post_init__(self):
        object.__setattr__(self, "facts", frozenset(self.facts))
        for f in self.facts:
            if not f.is_ground():
                raise ValueError(f"instance fact {f} is not ground")
        self.schema  # noqa: B018  (arity check)

    @classmethod
    def of(cls, facts: Iterable[Atom], schema: Mapping[str, int] | None = None) -> "Instance":
        return cls(frozenset(facts), Schema(schema or {}))

    @cached_property
    def schema(self) -> Schema:
        return Schema([(f.relation, f.arity) for f in self.facts] + list(self.extra_schema.items()))

    @cached_property
    def adom(self) -> list[str]:
        return sorted({t.name for f in self.facts for t in f.args})

    @cached_property
    def tuples(self) -> dict[str, set[tuple[str, ...]]]:
        out: dict[str, set[tuple[str, ...]]] = {}
        for f in self.facts:
            out.setdefault(f.relation, set()).add(tuple(t.name for t in f.args))
        return out

    def restrict(self, relations: Iterable[str]) -> "Instance":
        keep = set(relations)
        return Instance(frozenset(f for f in self.facts if f.relation in keep))

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self):
        return iter(sorted(self.facts))

    def __str__(self) -> str:
        return "\n".join(f"{f}." for f in sorted(self.facts))


def fact(relation: str, *args: str) -> Atom:
    return Atom(relation, tuple(const(a) for a in args))


@dataclass(frozen=True)
class CQ:
    answer_vars: tuple[Term, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "answer_vars", tuple(self.answer_vars))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        bvars = set(vars_of(self.atoms))
        if any(v not in bvars for v in self.answer_vars if v.is_var):
            raise ValueError("answer variable missing from query body")


@dataclass(frozen=True)
class UCQ:
    disjuncts: tuple[CQ, ...]

    def __post_init__(self):
        object.__setattr__(self, "disjuncts", tuple(self.disjuncts))
        if len({len(q.answer_vars) for q in self.disjuncts}) > 1:
            raise ValueError("UCQ disjuncts differ in arity")

    @property
    def arity(self) -> int:
        return len(self.disjuncts[0].answer_vars) if self.disjuncts else 0


# ---------------------------------------------------------------- metrics

@dataclass(frozen=True)
class Metrics:
    rules: int
    size: int
    rule_size: int
    atom_width: int
    variable_width: int

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("rules", "size", "rule_size", "atom_width", "variable_width")}


def atom_size(a: Atom) -> int:
    return 1 + a.arity


def rule_size(r: Rule) -> int:
    """Symbols to write the rule: relation and term names count one each,
    plus one connective between neighbouring atoms and one for the arrow."""
    atoms = r.head + r.body
    return sum(atom_size(a) for a in atoms) + max(len(r.head) - 1, 0) + len(r.body) - 1 + 1


def metrics(p: Program) -> Metrics:
    rs = [rule_size(r) for r in p.rules]
    return Metrics(
        rules=len(p.rules),
        size=sum(rs),
        rule_size=max(rs, default=0),
        atom_width=max((len(r.body) for r in p.rules), default=0),
        variable_width=max((len(r.variables()) for r in p.rules), default=0),
    )


# ------------------------------------------------------------- validation

@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]
    metrics: Metrics
    is_monadic: bool
    is_boolean: bool


def validate_program(p: Program) -> ValidationReport:
    """Check goal discipline and monadicity; violations are returned, not raised."""
    v: list[str] = []
    monadic = True
    for i, r in enumerate(p.rules):
        for a in r.body:
            if a.relation == p.goal:
                v.append(f"rule {i}: goal relation occurs in a body")
        goal_heads = [a for a in r.head if a.relation == p.goal]
        if goal_heads and len(r.head) > 1:
            v.append(f"rule {i}: goal rule has a disjunctive head")
        for a in r.head:
            if a.relation != p.goal and a.arity > 1:
                monadic = False
                v.append(f"rule {i}: non-goal head relation {a.relation} has arity {a.arity}")
    return ValidationReport(not v, tuple(v), metrics(p), monadic, p.is_boolean)


# ------------------------------------------------------- canonical forms

MAX_CANONICAL_VARS = 12


def _canonical(tagged: list[tuple[str, Atom]]) -> str:
    vs = vars_of(a for _, a in tagged)
    if len(vs) > MAX_CANONICAL_VARS:
        raise LimitExceeded("canonical_cq", len(vs), MAX_CANONICAL_VARS)
    idx = {v: i for i, v in enumerate(vs)}
    color = [0] * len(vs)
    occ: list[list] = [[] for _ in vs]
    for tag, a in tagged:
        for pos, t in enumerate(a.args):
            if t.is_var:
                occ[idx[t]].append((tag, a))
    for _ in range(len(vs) + 1):
        sigs = []
        for i, v in enumerate(vs):
            s = []
            for tag, a in occ[i]:
                s.append((tag, a.relation, tuple(
                    ("v", color[idx[t]], t == v) if t.is_var else ("c", t.name) for t in a.args)))
            sigs.append((color[i], tuple(sorted(s))))
        ranks = {s: k for k, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        stable = len(set(new)) == len(set(color))
        color = new
        if stable:
            break
    cells: dict[int, list[Term]] = {}
    for v in vs:
        cells.setdefault(color[idx[v]], []).append(v)
    ordered = [cells[c] for c in sorted(cells)]
    best = None
    for perm in itertools.product(*(itertools.permutations(c) for c in ordered)):
        names = {v: f"V{i}" for i, v in enumerate(itertools.chain.from_iterable(perm))}
        rendered = ",".join(sorted(
            tag + a.relation + "(" + ",".join(names[t] if t.is_var else t.name for t in a.args) + ")"
            for tag, a in tagged))
        if best is None or rendered < best:
            best = rendered
    if best is None:
        best = ",".join(sorted(tag + str(a) for tag, a in tagged))
    return best


def canonical_cq(atoms: Iterable[Atom]) -> str:
    """Rendering of a conjunction that is invariant under variable renaming
    and atom reordering."""
    return _canonical([("", a) for a in dict.fromkeys(atoms)])


def canonical_rule(r: Rule) -> str:
    return _canonical([("^", a) for a in dict.fromkeys(r.head)] + [("", a) for a in dict.fromkeys(r.body)])


def dedupe_rules(rules: Iterable[Rule]) -> list[Rule]:
    seen: set[str] = set()
    out = []
    for r in rules:
        key = canonical_rule(r)
        if key not in seen:
            seen.add(key)
            out.append(r)
    return out


# -------------------------------------------------------- shape predicates

def is_simple(p: Program, treat_as_idb: Iterable[str] = ()) -> bool:
    """Every rule has at most one EDB atom; that atom carries every body
    variable exactly once; EDB-free rules have at most one variable."""
    idb = set(p.idb) | set(treat_as_idb)
    for r in p.rules:
        edb = [a for a in r.body if a.relation not in idb]
        if len(edb) > 1:
            return False
        if edb:
            a = edb[0]
            if any(not t.is_var for t in a.args) or len(set(a.args)) != a.arity:
                return False
            if set(a.args) != set(r.variables()):
                return False
        elif len(r.variables()) > 1:
            return False
    return True


def is_semi_simple(p: Program, d: DisjointnessSet) -> bool:
    return is_simple(p, treat_as_idb=d.relations)


def bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


INF = math.inf
