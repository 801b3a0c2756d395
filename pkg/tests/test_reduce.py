import random

import pytest
from hypothesis import given, settings, strategies as st

from mddlog import textio
from mddlog.core import is_semi_simple, metrics
from mddlog.emptiness import check_empty, check_empty_annotated
from mddlog.evaluation import brute_contains
from mddlog.reduce import MAX_SLOTS, AnnotatedSchema, prepare, to_emptiness
from mddlog.simplify import simplify_pair

from gen import random_program


def named(text, goal):
    return textio.parse_program(text.replace("goal", goal), goal=goal)


def test_edb_only_pair_keeps_annotated_rule():
    p1 = named("goal() :- E(X).", "goal1")
    p2 = named("goal() :- B(X).", "goal2")
    prog, d = to_emptiness(p1, p2, rename=False)
    assert [str(r) for r in prog.rules] == ["goal1() :- E(X), neg$goal2()."]
    assert [str(r) for r in d.rules] == ["false :- goal2(), neg$goal2()."]
    assert is_semi_simple(prog, d)
    assert not check_empty(prog, d).empty


def test_identical_bodies_remove_every_annotation():
    p1 = named("goal() :- B(X).", "goal1")
    p2 = named("goal() :- B(X).", "goal2")
    prog, d = to_emptiness(p1, p2, rename=False)
    assert prog.rules == ()
    assert check_empty(prog, d).empty


def test_unary_idb_doubles_annotations():
    p1 = named("goal() :- A(X).", "goal1")
    p2 = named("P(X) :- B(X).\ngoal() :- P(X), C(X).", "goal2")
    prog, d = to_emptiness(p1, p2, rename=False)
    # P or neg$P on the single variable; goal2 is always negated
    assert sorted(map(str, prog.rules)) == ["goal1() :- A(X), P(X), neg$goal2().",
                                            "goal1() :- A(X), neg$P(X), neg$goal2()."]
    assert {str(r) for r in d.rules} == {"false :- P(X), neg$P(X).",
                                          "false :- goal2(), neg$goal2()."}


def test_removal_with_idb_heads():
    # B(x) forces P(x) on the right, so the neg$P copy of the left rule goes
    p1 = named("goal() :- B(X).", "goal1")
    p2 = named("P(X) :- B(X).\ngoal() :- P(X), C(X).", "goal2")
    prog, _ = to_emptiness(p1, p2, rename=False)
    assert [str(r) for r in prog.rules] == ["goal1() :- B(X), P(X), neg$goal2()."]


def test_renaming_and_schema():
    p = textio.parse_program("P(X) :- A(X).\ngoal() :- P(X), r(X,Y).")
    sp = simplify_pair(p, p)
    prog, d = to_emptiness(sp.left, sp.right)
    assert all(r.startswith("p2$") for r in d.relations if not r.startswith("neg$"))
    sch = AnnotatedSchema(sp.left.edb_schema, prepare(sp.left, sp.right)[1].idb_schema).schema
    assert set(prog.edb_schema) <= set(sch)


def test_rejects_non_simple():
    p = textio.parse_program("goal() :- r(X,Y), r(Y,Z).")
    with pytest.raises(ValueError):
        to_emptiness(p, p)


def test_rejects_overlapping_idbs_without_renaming():
    p = textio.parse_program("P(X) :- A(X).\ngoal() :- P(X).")
    with pytest.raises(ValueError):
        to_emptiness(p, p, rename=False)


def test_slot_guard():
    many = "\n".join(f"P{i}(X) :- A(X)." for i in range(MAX_SLOTS + 1))
    uses = ", ".join(f"P{i}(X)" for i in range(MAX_SLOTS + 1))
    p2 = textio.parse_program(f"{many}\ngoal() :- {uses}.")
    p1 = textio.parse_program("goal() :- A(X).")
    with pytest.raises(Exception):
        to_emptiness(p1, p2)


# ------------------------------------------------------------- properties

def _pair(seed):
    rng = random.Random(seed)
    p1 = random_program(rng, max_rules=3, max_vars=2)
    p2 = random_program(rng, max_rules=3, max_vars=2)
    return p1, p2, simplify_pair(p1, p2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_reduction_invariants(seed):
    _, _, sp = _pair(seed)
    prog, d = to_emptiness(sp.left, sp.right)
    assert is_semi_simple(prog, d)
    m1, m2 = metrics(sp.left), metrics(sp.right)
    assert metrics(prog).variable_width <= max(m1.variable_width, m2.variable_width)
    idb2 = sp.right.idb_schema
    assert len(prog.rules) <= len(sp.left.rules) * 2 ** (len(idb2) * max(m1.variable_width, 1))
    assert len(d.rules) == len(idb2)
    if sp.right.rules:
        # goal2 and its complement are added even when the right program is empty
        assert len(prog.edb_schema) <= len(sp.left.edb_schema.union(sp.right.edb_schema)) + m2.size


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_implicit_check_agrees_with_explicit(seed):
    _, _, sp = _pair(seed)
    explicit = check_empty(*to_emptiness(sp.left, sp.right))
    implicit = check_empty_annotated(sp.left, sp.right)
    assert explicit.empty == implicit.empty
    if not implicit.empty:
        assert implicit.theta == explicit.theta


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_counterexample_means_non_empty(seed):
    p1, p2, sp = _pair(seed)
    if brute_contains(p1, p2, 2) is not None:
        assert not check_empty_annotated(sp.left, sp.right).empty
