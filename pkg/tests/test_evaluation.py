import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mddlog import textio
from mddlog.core import CQ, UCQ, Atom, Instance, LimitExceeded, atom, const, fact, var
from mddlog.evaluation import (ddlog_answers, enum_instances, eval_cq, eval_ucq, find_hom, girth,
                               holds)
from mddlog.mmsnp import mmsnp_to_mddlog

from conftest import load
from gen import random_program


def I(*facts):
    return Instance.of(fact(r, *args) for r, *args in facts)


TRIANGLE = I(("r", "a", "b"), ("r", "b", "c"), ("r", "c", "a"))
K4 = I(*[("r", x, y) for x in "abcd" for y in "abcd" if x != y])


def test_eval_cq_examples():
    q = CQ((var("X"),), (atom("r", "X", "Y"),))
    assert eval_cq(q, I(("r", "a", "b"))) == {("a",)}
    cyc = CQ((), (atom("r", "X", "Y"), atom("r", "Y", "X")))
    assert eval_cq(cyc, I(("r", "a", "b"))) == set()
    assert eval_cq(cyc, I(("r", "a", "b"), ("r", "b", "a"))) == {()}


def test_eval_ucq_examples():
    qa = CQ((), (atom("A", "X"),))
    qb = CQ((), (atom("B", "X"),))
    assert eval_ucq(UCQ((qa,)), I(("A", "c"))) == eval_cq(qa, I(("A", "c")))
    assert eval_ucq(UCQ((qa, qb)), I(("B", "c"))) == {()}
    assert eval_ucq(UCQ((qa,)), I(("B", "c"))) == set()


def test_split_pair_answers(split_pair):
    p1, p2 = split_pair
    w = textio.parse_instance(load("split_witness.facts"))
    assert ddlog_answers(p1, w) == {("a",)}
    assert ddlog_answers(p2, w) == set()


def test_empty_instance(split_pair):
    for p in split_pair:
        assert ddlog_answers(p, Instance.of([])) == set()
    assert not holds(textio.parse_program("goal() :- A(X)."), Instance.of([]))


def _three_colourable(inst):
    dom = inst.adom
    edges = inst.tuples.get("r", set())
    for col in itertools.product(range(3), repeat=len(dom)):
        c = dict(zip(dom, col))
        if all(c[x] != c[y] for x, y in edges):
            return True
    return False


def test_colour_guess_program_against_colouring_oracle():
    p = mmsnp_to_mddlog(textio.parse_mmsnp(load("colour_guess.mmsnp")))
    assert not _three_colourable(K4) and _three_colourable(TRIANGLE)
    assert not holds(p, TRIANGLE)
    assert holds(p, K4)


def test_girth_examples():
    assert girth(I(("r", "a", "a"))) == 1
    assert girth(I(("r", "a", "b"), ("r", "b", "a"))) == 2
    assert girth(I(("r", "a", "b"), ("r", "a", "c"))) == math.inf
    assert girth(TRIANGLE) == 3
    assert girth(I(("A", "a"), ("B", "a"))) == math.inf
    # a ternary fact with a repeated constant is a cycle of length one
    assert girth(I(("s", "a", "b", "a"))) == 1


def test_find_hom_examples():
    h = find_hom(I(("r", "a", "b")), I(("r", "c", "c")))
    assert h == {"a": "c", "b": "c"}
    assert find_hom(I(("r", "a", "a")), I(("r", "c", "d"))) is None
    assert find_hom(TRIANGLE, K4) is not None
    assert find_hom(K4, TRIANGLE) is None


def test_find_hom_into_k_theta_of_colouring_constraints():
    from mddlog.emptiness import build_k_theta
    from mddlog.core import Schema
    d = textio.parse_disjointness("false :- R(X), G(X).\nfalse :- R(X), B(X).\nfalse :- G(X), B(X).")
    k = build_k_theta(Schema({"r": 2}).union(d.relations), d, frozenset()).materialize()
    assert len(k.adom) == 4
    h = find_hom(TRIANGLE, k)
    assert h is not None
    for x, y in TRIANGLE.tuples["r"]:
        assert (h[x], h[y]) in k.tuples["r"]


def test_enum_instances_examples():
    a = list(enum_instances({"A": 1}, 1))
    assert [set(i.facts) for i in a] == [set(), {fact("A", "c1")}]
    r = list(enum_instances({"r": 2}, 1))
    assert [set(i.facts) for i in r] == [set(), {fact("r", "c1", "c1")}]
    two = list(enum_instances({"r": 2}, 2, 1))
    assert two and all(f.args[0] != f.args[1] for i in two for f in i.facts)
    assert all(girth(i) > 1 for i in two)
    with pytest.raises(LimitExceeded):
        list(enum_instances({"r": 2}, 5))


def test_enum_instances_up_to_isomorphism():
    insts = list(enum_instances({"r": 2}, 2))
    # directed graphs with loops on two (possibly unused) vertices: 10 classes
    assert len(insts) == 10
    assert len({textio.print_instance(i) for i in insts}) == 10
    assert insts == list(enum_instances({"r": 2}, 2))


def test_grounding_guard():
    p = textio.parse_program("P(X) | P(W) :- r(X,Y), r(Y,Z), r(Z,W).\ngoal() :- P(X).")
    inst = I(*[("r", x, y) for x in "abcdef" for y in "abcdef"])
    with pytest.raises(LimitExceeded):
        ddlog_answers(p, inst, max_ground_clauses=10)


def test_inconsistent_instance_gives_every_tuple():
    p = textio.parse_program("false :- A(X).\ngoal(X) :- B(X).")
    assert ddlog_answers(p, I(("A", "a"), ("B", "b"))) == {("a",), ("b",)}


# ------------------------------------------------------------- properties

def _naive_cq(q: CQ, inst: Instance):
    vs = sorted({t for a in q.atoms for t in a.args if t.is_var})
    out = set()
    for vals in itertools.product(inst.adom, repeat=len(vs)):
        m = dict(zip(vs, (const(v) for v in vals)))
        if all(a.substitute(m) in inst.facts for a in q.atoms):
            out.add(tuple(m[v].name if v.is_var else v.name for v in q.answer_vars))
    return out


qvars = st.sampled_from(["X", "Y", "Z", "W"])
qatoms = st.one_of(st.builds(lambda a: atom("A", a), qvars),
                   st.builds(lambda a, b: atom("r", a, b), qvars, qvars))
consts = st.sampled_from(["a", "b", "c"])
facts = st.one_of(st.builds(lambda a: fact("A", a), consts),
                  st.builds(lambda a, b: fact("r", a, b), consts, consts))


@settings(max_examples=150, deadline=None)
@given(st.lists(qatoms, min_size=1, max_size=4), st.sets(facts, max_size=8), st.integers(0, 2))
def test_eval_cq_matches_naive(body, fs, k):
    vs = sorted({t for a in body for t in a.args}, key=lambda t: t.name)[:k]
    q = CQ(tuple(vs), tuple(body))
    inst = Instance.of(fs)
    assert eval_cq(q, inst) == _naive_cq(q, inst)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sets(facts, max_size=7), st.sets(facts, max_size=4))
def test_monotone_in_facts(seed, fs, more):
    p = random_program(random.Random(seed), arity=1)
    small = Instance.of(fs)
    big = Instance.of(fs | more)
    dom = set(small.adom)
    a_small = ddlog_answers(p, small)
    a_big = {t for t in ddlog_answers(p, big) if set(t) <= dom}
    assert a_small <= a_big


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sets(facts, max_size=7), st.dictionaries(consts, consts))
def test_preserved_under_homomorphisms(seed, fs, h):
    p = random_program(random.Random(seed))
    src = Instance.of(fs)
    dst = Instance.of(Atom(f.relation, tuple(const(h.get(t.name, t.name)) for t in f.args)) for f in fs)
    assert find_hom(src, dst) is not None
    if holds(p, src):
        assert holds(p, dst)
