import pytest

from mddlog import textio
from mddlog.boolify import eliminate_constants, quotient, strip_answer_vars
from mddlog.core import Instance, canonical_rule, fact, metrics
from mddlog.evaluation import brute_contains, holds

P = textio.parse_program


def test_strip_single_answer_variable():
    p = P("goal(X) :- A(X).")
    branches = list(strip_answer_vars(p, p))
    assert [b for b, _, _ in branches] == [("fresh$1",)]
    assert [str(r) for r in branches[0][1].rules] == ["goal() :- A(fresh$1)."]
    assert branches[0][1].is_boolean


def test_strip_discards_conflicting_repeats():
    p = P("goal(X,X) :- r(X,X).\ngoal(X,Y) :- s(X,Y).")
    out = {b: q for b, q, _ in strip_answer_vars(p, p)}
    assert len(out) == 4
    assert [str(r) for r in out[("fresh$1", "fresh$2")].rules] == ["goal() :- s(fresh$1,fresh$2)."]
    assert len(out[("fresh$1", "fresh$1")].rules) == 2


def test_strip_uses_program_constants_first():
    p = P("goal(X) :- r(X,b).\ngoal(a) :- A(a).")
    branches = [b for b, _, _ in strip_answer_vars(p, p)]
    assert branches == [("a",), ("b",), ("fresh$1",)]
    out = {b: q for b, q, _ in strip_answer_vars(p, p)}
    assert {str(r) for r in out[("a",)].rules} == {"goal() :- r(a,b).", "goal() :- A(a)."}
    assert [str(r) for r in out[("b",)].rules] == ["goal() :- r(b,b)."]


def test_strip_boolean_passthrough():
    p = P("goal() :- A(X).")
    assert list(strip_answer_vars(p, p)) == [((), p, p)]


def test_strip_arity_mismatch():
    with pytest.raises(ValueError):
        list(strip_answer_vars(P("goal(X) :- A(X)."), P("goal() :- A(X).")))


def test_strip_guards_left_constraints_by_answer_presence():
    p1 = P("false :- A(X).\ngoal(X) :- B(X).")
    p2 = P("goal(X) :- B(X).")
    (_, b1, b2), = strip_answer_vars(p1, p2)
    assert {str(r) for r in b1.rules} == {
        "adom$fresh$1() :- A(fresh$1).", "adom$fresh$1() :- B(fresh$1).",
        "goal() :- A(X), adom$fresh$1().", "goal() :- B(fresh$1)."}
    # an inconsistent instance without the answer constant is no counterexample
    assert not holds(b1, Instance.of([fact("A", "c")]))
    assert holds(b1, Instance.of([fact("A", "c"), fact("B", "fresh$1")]))
    assert [str(r) for r in b2.rules] == ["goal() :- B(fresh$1)."]


def test_multi_constant_expansion_is_present():
    p1 = P("P1(Y) | P2(Y) :- r(X,Y,Y), s(Y,Z).\ngoal() :- P1(X), A(a1), A(a2).")
    c1, c2 = eliminate_constants(p1, p1)
    want = P("P1(Y3) | P2(Y1) :- r(X1,Y1,Y2), s(Y3,Z), cst$a1(X1), cst$a2(Y1), cst$a2(Y2), "
             "cst$a2(Y3).").rules[0]
    assert canonical_rule(want) in {canonical_rule(r) for r in c1.rules}
    assert not c1.constants() and not c2.constants()


def test_no_constants_unchanged():
    p = P("goal() :- A(X).")
    assert eliminate_constants(p, p) == (p, p)


def test_single_constant_rule():
    p = P("P(a) :- A(a).\ngoal() :- P(X).")
    c1, c2 = eliminate_constants(p, p)
    want = P("P(X1) :- A(X1), cst$a(X1).").rules[0]
    p_rules = [r for r in c1.rules if r.head and r.head[0].relation == "P"]
    assert [canonical_rule(r) for r in p_rules] == [canonical_rule(want)]
    assert c1.edb_schema["cst$a"] == 1


def test_head_only_constant_gets_witness():
    p = P("P(a) :- A(X).\ngoal() :- P(X), B(X).")
    c1, _ = eliminate_constants(p, p)
    p_rules = [r for r in c1.rules if r.head and r.head[0].relation == "P"]
    assert any(any(a.relation == "cst$a" for a in r.body) for r in p_rules)
    assert all(set(r.head[0].args) <= set(r.variables()) for r in p_rules)


def test_right_program_gets_distinctness_rules():
    p1 = P("goal() :- r(a,b).")
    p2 = P("goal() :- A(X).")
    _, c2 = eliminate_constants(p1, p2)
    rules = {str(r) for r in c2.rules}
    assert "goal() :- cst$a(X), cst$b(X)." in rules


def test_rule_count_ceiling():
    p = P("P1(Y) | P2(Y) :- r(X,Y,Y), s(Y,Z).\ngoal() :- P1(X), A(a1), A(a2).")
    c1, _ = eliminate_constants(p, p)
    assert metrics(c1).size <= 2 ** (metrics(p).size ** 2)
    assert metrics(c1).rule_size <= 2 * metrics(p).rule_size + 2 * metrics(p).variable_width


def test_quotient():
    inst = Instance.of([fact("r", "e1", "e2"), fact("cst$a", "e1"), fact("A", "e2")])
    q = quotient(inst)
    assert q.facts == {fact("r", "a", "e2"), fact("A", "e2")}
    bad = Instance.of([fact("cst$a", "e"), fact("cst$b", "e"), fact("A", "e")])
    assert quotient(bad) is None


def test_constant_elimination_fidelity():
    p1 = P("goal() :- r(X,a).")
    p2 = P("goal() :- r(X,Y), A(Y).")
    c1, c2 = eliminate_constants(p1, p2)
    assert brute_contains(p1, p2, 2, schema={"r": 2, "A": 1}) is not None
    ce = brute_contains(c1, c2, 2)
    assert ce is not None
    q = quotient(ce.instance)
    assert holds(p1, q) and not holds(p2, q)
    # adding A(a) on the right makes them contained
    p3 = P("goal() :- r(X,Y), A(Y).\ngoal() :- r(X,a).")
    d1, d3 = eliminate_constants(p1, p3)
    assert brute_contains(d1, d3, 2) is None
