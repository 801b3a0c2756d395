import random

import pytest
from hypothesis import given, settings, strategies as st

from mddlog import textio
from mddlog.core import Instance, Schema, fact
from mddlog.evaluation import enum_instances, holds
from mddlog.mmsnp import Clause, MMSNPSentence, eval_mmsnp, mddlog_to_mmsnp, mmsnp_to_mddlog

from conftest import load
from gen import random_sentence

TRIANGLE = Instance.of([fact("r", "a", "b"), fact("r", "b", "c"), fact("r", "c", "a")])
K4 = Instance.of([fact("r", x, y) for x in "abcd" for y in "abcd" if x != y])
R = Schema({"r": 2})


def sweep(n=3, schema=R):
    return list(enum_instances(schema, n))


def test_three_colourability(three_col):
    assert eval_mmsnp(three_col, TRIANGLE)
    assert not eval_mmsnp(three_col, K4)


def test_true_implies_false():
    phi = textio.parse_mmsnp("exists X . forall x . true -> false")
    assert eval_mmsnp(phi, Instance.of([]))
    assert not eval_mmsnp(phi, Instance.of([fact("A", "a")]))


def test_colour_guess_translation_is_the_ten_rule_program():
    p = mmsnp_to_mddlog(textio.parse_mmsnp(load("colour_guess.mmsnp")))
    assert len(p.rules) == 10
    expected = textio.parse_program("""
        R(X) | neg$R(X) :- r(X,Y).    R(Y) | neg$R(Y) :- r(X,Y).
        G(X) | neg$G(X) :- r(X,Y).    G(Y) | neg$G(Y) :- r(X,Y).
        B(X) | neg$B(X) :- r(X,Y).    B(Y) | neg$B(Y) :- r(X,Y).
        goal() :- neg$R(X), neg$G(X), neg$B(X).
        goal() :- R(X), r(X,Y), R(Y).
        goal() :- G(X), r(X,Y), G(Y).
        goal() :- B(X), r(X,Y), B(Y).""")
    from mddlog.core import canonical_rule
    assert {canonical_rule(r) for r in p.rules} == {canonical_rule(r) for r in expected.rules}
    assert p.is_boolean


def test_zero_clauses_never_derives_goal():
    phi = MMSNPSentence(("X",), ("x", "y"), (), edb_extra=R)
    p = mmsnp_to_mddlog(phi)
    assert all(r.head[0].relation != "goal" for r in p.rules)
    assert not any(holds(p, i) for i in sweep(2))


def test_forced_set_clause_matches_oracle():
    phi = textio.parse_mmsnp("exists X . forall x . true -> X(x)")
    p = mmsnp_to_mddlog(phi, R)
    for i in sweep():
        assert eval_mmsnp(phi, i)
        assert not holds(p, i)


def test_variable_free_false_clause_rejected_without_quantifiers():
    phi = MMSNPSentence(("X",), (), (Clause((), ()),))
    with pytest.raises(ValueError):
        mmsnp_to_mddlog(phi)


def test_colour_guess_program_back_to_sentence():
    phi = textio.parse_mmsnp(load("colour_guess.mmsnp"))
    back = mddlog_to_mmsnp(mmsnp_to_mddlog(phi))
    for i in sweep():
        assert eval_mmsnp(back, i) == eval_mmsnp(phi, i)


def test_single_goal_rule_to_sentence():
    phi = mddlog_to_mmsnp(textio.parse_program("goal() :- A(X)."))
    assert phi.so_vars == ()
    assert len(phi.clauses) == 1 and phi.clauses[0].betas == ()
    assert eval_mmsnp(phi, Instance.of([fact("B", "a")]))
    assert not eval_mmsnp(phi, Instance.of([fact("A", "a")]))


def test_mddlog_to_mmsnp_rejects_non_boolean(split_pair):
    with pytest.raises(ValueError):
        mddlog_to_mmsnp(split_pair[0])


def test_so_variable_named_like_edb_is_renamed():
    phi = textio.parse_mmsnp("exists r . forall x y . r(x) & s(x,y) -> false")
    with pytest.raises(ValueError):
        # r is a second-order variable here and cannot also be binary
        textio.parse_mmsnp("exists r . forall x y . r(x) & r(x,y) -> false")
    p = mmsnp_to_mddlog(phi, Schema({"s": 2, "r2": 2}))
    assert "r" in p.idb


# ------------------------------------------------------------- properties

SMALL = sweep(2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_complementation(seed):
    phi = random_sentence(random.Random(seed))
    p = mmsnp_to_mddlog(phi, R)
    for i in SMALL:
        assert eval_mmsnp(phi, i) != holds(p, i)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_round_trip(seed):
    phi = random_sentence(random.Random(seed))
    back = mddlog_to_mmsnp(mmsnp_to_mddlog(phi, R))
    for i in SMALL:
        assert eval_mmsnp(back, i) == eval_mmsnp(phi, i)
