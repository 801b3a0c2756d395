"""End-to-end containment decisions and the brute-force oracle."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import evaluation
from .boolify import eliminate_constants, quotient, strip_answer_vars
from .core import Instance, LimitExceeded, Program, validate_program
from .emptiness import KTheta, ZeroType, check_empty, check_empty_annotated
from .evaluation import DEFAULT_MAX_GROUND_CLAUSES, ddlog_answers, joint_edb_schema
from .mmsnp import MMSNPSentence, mmsnp_to_mddlog
from .reduce import to_emptiness
from .simplify import consolidated_to_edb, simplify_pair

CONTAINED = "CONTAINED"
NOT_CONTAINED = "NOT_CONTAINED"

MAX_WITNESS_FACTS = 5000
MAX_SHRINK_FACTS = 300


@dataclass
class Evidence:
    branch: tuple[str, ...]
    theta: ZeroType
    k_theta: KTheta
    # instance over the original schema, when the back-translation succeeds
    counterexample: Instance | None = None
    # True/False once the counterexample was evaluated, None if not attempted
    certified: bool | None = None


@dataclass
class Decision:
    verdict: str
    evidence: Evidence | None = None
    stats: list[dict] = field(default_factory=list)

    @property
    def contained(self) -> bool:
        return self.verdict == CONTAINED

    def __post_init__(self):
        if self.verdict == NOT_CONTAINED and self.evidence is None:
            raise ValueError("a negative decision needs evidence")


def _check_inputs(p1: Program, p2: Program):
    for side, p in (("left", p1), ("right", p2)):
        rep = validate_program(p)
        if not rep.ok:
            raise ValueError(f"{side} program is not valid MDDLog: {'; '.join(rep.violations)}")
    if p1.arity != p2.arity:
        raise ValueError(f"arity mismatch: {p1.arity} vs {p2.arity}")
    return joint_edb_schema(p1, p2)


def _back_translate(p1: Program, p2: Program, branch, k: KTheta, cmap) -> tuple[Instance | None, bool | None]:
    n = len(k.domain)
    full = k.full.restrict(set(cmap.schema))
    if sum(n ** a for a in full.values()) > MAX_WITNESS_FACTS:
        return None, None
    try:
        j = k.materialize(MAX_WITNESS_FACTS).restrict(set(cmap.schema))
    except LimitExceeded:
        return None, None
    unfolded = consolidated_to_edb(j, cmap)
    inst = quotient(unfolded, joint_edb_schema(p1, p2))
    if inst is None:
        return None, None
    try:
        if branch not in ddlog_answers(p1, inst):
            return inst, False
        inst = _shrink(p1, inst, branch)
        return inst, branch not in ddlog_answers(p2, inst)
    except LimitExceeded:
        return inst, None


def _shrink(p: Program, inst: Instance, answer) -> Instance:
    """Drop facts one at a time while ``answer`` stays certain for p. The right
    program is monotone, so a smaller instance can only help certification."""
    if len(inst) > MAX_SHRINK_FACTS:
        return inst
    facts = sorted(inst.facts)
    i = 0
    while i < len(facts):
        trial = Instance.of(facts[:i] + facts[i + 1:], inst.extra_schema)
        if answer in ddlog_answers(p, trial):
            facts = facts[:i] + facts[i + 1:]
        else:
            i += 1
    return Instance.of(facts, inst.extra_schema)


def contain(p1: Program, p2: Program, *, max_ground_clauses: int = DEFAULT_MAX_GROUND_CLAUSES,
            witness: bool = True, explicit: bool = False) -> Decision:
    """Decide whether every certain answer of p1 is one of p2 on every instance.

    With ``explicit`` the annotated program of the emptiness reduction is
    written out and checked as such; by default the same check runs on the
    implicit form, which grounds identically but skips the rule listing.
    """
    schema = _check_inputs(p1, p2)
    p1 = p1.with_rules(p1.rules, edb_extra=schema)
    p2 = p2.with_rules(p2.rules, edb_extra=schema)
    stats = []
    for branch, b1, b2 in strip_answer_vars(p1, p2):
        c1, c2 = eliminate_constants(b1, b2)
        sp = simplify_pair(c1, c2)
        if explicit:
            prog, d = to_emptiness(sp.left, sp.right)
            res = check_empty(prog, d, max_ground_clauses=max_ground_clauses)
        else:
            res = check_empty_annotated(sp.left, sp.right, max_ground_clauses=max_ground_clauses)
        stats.append({
            "branch": list(branch),
            "rules_boolean": [len(c1.rules), len(c2.rules)],
            "rules_simple": [len(sp.left.rules), len(sp.right.rules)],
            "edb_simple": len(sp.cmap.entries),
            "width": sp.width,
            "empty": res.empty,
        })
        if not res.empty:
            ev = Evidence(branch, res.theta, res.k_theta)
            if witness:
                ev.counterexample, ev.certified = _back_translate(p1, p2, branch, res.k_theta, sp.cmap)
            return Decision(NOT_CONTAINED, ev, stats)
    return Decision(CONTAINED, None, stats)


def contain_mmsnp(phi1: MMSNPSentence, phi2: MMSNPSentence, **kw) -> Decision:
    """phi1 implies phi2 iff the complement of phi2 is contained in that of phi1."""
    schema = phi1.edb_schema.union(phi2.edb_schema)
    return contain(mmsnp_to_mddlog(phi2, schema), mmsnp_to_mddlog(phi1, schema), **kw)


@dataclass
class OracleResult:
    max_domain: int
    instance: Instance | None = None
    answer: tuple[str, ...] | None = None

    @property
    def kind(self) -> str:
        return "counterexample" if self.instance is not None else "no_counterexample"

    @property
    def found(self) -> bool:
        return self.instance is not None


def brute_contains(p1: Program, p2: Program, max_domain: int, min_girth_exclusive: float = 0,
                   **kw) -> OracleResult:
    ce = evaluation.brute_contains(p1, p2, max_domain, min_girth_exclusive, **kw)
    if ce is None:
        return OracleResult(max_domain)
    return OracleResult(max_domain, ce.instance, ce.answer)
