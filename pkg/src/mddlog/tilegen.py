"""Hard instances for containment: from a 2-exp square tiling problem P and
an initial word w of length n, build a Boolean MDDLog program Pi and a
Boolean query q such that Pi is contained in q iff P admits a tiling for w.

Grid positions live in binary counters of 2^(n+1) bits, stored at the leaves
of counting trees of depth m = n + 1 hanging below every grid and step node.
The left half of the leaves holds the horizontal position, the right half
the vertical one, least significant bit first. Each leaf carries two bits:
B1 (the node's own value) and B2 (copied from its r-predecessor).

In ``cq`` mode the unary bit labels are replaced by bit gadgets over jump1
and jump2, self loops at grid nodes have length four, and q becomes a
single CQ.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import CQ, GOAL, UCQ, Atom, Instance, Program, Rule, Term, const, var
from .textio import TilingProblem

MAX_N = 2
MODES = ("ucq", "cq")
B1, B2, B1BAR, B2BAR = "B1", "B2", "B1bar", "B2bar"
RESERVED = {"r", "jump", "jump1", "jump2", B1, B2, B1BAR, B2BAR, "left", "right", "lrok",
            "gactive", "hactive", "vactive", GOAL}


def _a(rel: str, *args: Term) -> Atom:
    return Atom(rel, tuple(args))


class _Vars:
    def __init__(self):
        self.n = 0

    def __call__(self) -> Term:
        self.n += 1
        return var(f"G{self.n}")


def _bit(rel: str, x: Term, mode: str, fresh: _Vars) -> list[Atom]:
    """The label ``rel`` at x: a unary atom, or a bit gadget in cq mode."""
    if mode == "ucq":
        return [_a(rel, x)]
    jump = "jump1" if rel in (B1, B1BAR) else "jump2"
    xs = [x] + [fresh() for _ in range(4)]
    atoms = [_a("r", xs[i], xs[i + 1]) for i in range(4)]
    hits = (1, 4) if rel in (B1, B2) else (2, 3)
    return atoms + [_a(jump, x, xs[h]) for h in hits]


def _rule(head, body) -> Rule:
    return Rule(tuple(head), tuple(body))


@dataclass(frozen=True)
class LowerBound:
    program: Program
    query: UCQ
    mode: str
    n: int

    @property
    def m(self) -> int:
        return self.n + 1


def _check(problem: TilingProblem, mode: str) -> int:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    n = len(problem.word)
    if n < 1:
        raise ValueError("the initial word must be non-empty")
    if n > MAX_N:
        raise ValueError(f"n = {n} exceeds the output size guard ({MAX_N})")
    bad = [t for t in problem.tiles if t in RESERVED or t.startswith(("lev", "pos_", "bits_"))
           or "$" in t or not t[0].isalpha()]
    if bad:
        raise ValueError(f"tile names clash with generated relations: {bad}")
    return n


def _children(x: Term, fresh: _Vars, lhs: str, rhs: str, level: str) -> list[Atom]:
    y1, y2 = fresh(), fresh()
    return [_a("r", x, y1), _a(lhs + level, y1), _a("left", y1),
            _a("r", x, y2), _a(rhs + level, y2), _a("right", y2)]


def tree_rules(m: int, mode: str) -> list[Rule]:
    x, y, z = var("X"), var("Y"), var("Z")
    fresh = _Vars()
    rules = [
        _rule([_a("left", x)], [_a("r", x, y), _a("r", y, z), _a("jump", x, z)]),
        _rule([_a("right", x)], [_a("r", x, y), _a("jump", x, y)]),
        _rule([_a("lrok", x)], [_a("left", x)]),
        _rule([_a("lrok", x)], [_a("right", x)]),
    ]
    # counting trees below grid and self step nodes: both values agree
    for b1, b2 in ((B1, B2), (B1BAR, B2BAR)):
        rules.append(_rule([_a(f"levG_{m}", x)],
                           _bit(b1, x, mode, fresh) + _bit(b2, x, mode, fresh) + [_a("lrok", x)]))
    for i in range(m):
        rules.append(_rule([_a(f"levG_{i}", x)],
                           _children(x, fresh, "levG_", "levG_", str(i + 1))))
    # trees below step nodes: the leaf word lies in L1 = (0,1)*, L2 = L1 (1,0) L3
    # or L3 = ((0,0)+(1,1))*, read as (B1 bit, B2 bit) pairs
    leaves = {1: [(B1BAR, B2)], 2: [(B1, B2BAR)], 3: [(B1, B2), (B1BAR, B2BAR)]}
    for ell, labels in leaves.items():
        for b1, b2 in labels:
            rules.append(_rule([_a(f"levH{ell}_{m}", x)],
                               _bit(b1, x, mode, fresh) + _bit(b2, x, mode, fresh) + [_a("lrok", x)]))
    for i in range(1, m):
        for l1, l2, l3 in ((1, 1, 1), (1, 2, 2), (2, 3, 2), (3, 3, 3)):
            rules.append(_rule([_a(f"levH{l3}_{i}", x)], _children(x, fresh, f"levH{l1}_", f"levH{l2}_",
                                                                    str(i + 1))))
    # horizontal steps increment the left half, vertical ones the right half
    rules.append(_rule([_a("hactive", x)], _children(x, fresh, "levH2_", "levH3_", "1")))
    rules.append(_rule([_a("vactive", x)], _children(x, fresh, "levH3_", "levH2_", "1")))
    if mode == "ucq":
        rules.append(_rule([_a("gactive", x)], [_a("levG_0", x), _a("r", x, y), _a("levG_0", y),
                                                _a("r", y, x)]))
    else:
        ys = [x, var("Y1"), var("Y2"), var("Y3")]
        body = [_a("levG_0", x)]
        for i in range(1, 4):
            body += [_a("r", ys[i - 1], ys[i]), _a("levG_0", ys[i])]
        body.append(_a("r", ys[3], x))
        rules.append(_rule([_a("gactive", x)], body))
    return rules


def position_word(i: int, j: int, n: int) -> str:
    """B1 leaf word of grid position (i, j), least significant bit first."""
    half = 2 ** n
    return "".join(str(i >> k & 1) for k in range(half)) + "".join(str(j >> k & 1) for k in range(half))


def _bits_rules(word: str, mode: str, fresh: _Vars, seen: set) -> list[Rule]:
    if word in seen:
        return []
    seen.add(word)
    x = var("X")
    if len(word) == 1:
        return [_rule([_a(f"bits_{word}", x)], _bit(B1 if word == "1" else B1BAR, x, mode, fresh)
                      + [_a("lrok", x)])]
    h = len(word) // 2
    out = _bits_rules(word[:h], mode, fresh, seen) + _bits_rules(word[h:], mode, fresh, seen)
    y1, y2 = fresh(), fresh()
    out.append(_rule([_a(f"bits_{word}", x)],
                     [_a("r", x, y1), _a(f"bits_{word[:h]}", y1), _a("left", y1),
                      _a("r", x, y2), _a(f"bits_{word[h:]}", y2), _a("right", y2)]))
    return out


def tiling_rules(problem: TilingProblem, n: int, mode: str) -> list[Rule]:
    x, y, z = var("X"), var("Y"), var("Z")
    tiles = list(problem.tiles)
    rules = [_rule([_a(t, x) for t in tiles], [_a("gactive", x)])]
    for step, allowed in (("hactive", problem.h), ("vactive", problem.v)):
        for ti, tj in itertools.product(tiles, repeat=2):
            if (ti, tj) not in allowed:
                rules.append(_rule([_a(GOAL)], [_a(ti, x), _a("gactive", x), _a("r", x, y), _a(step, y),
                                                _a("r", y, z), _a(tj, z), _a("gactive", z)]))
    fresh = _Vars()
    seen: set = set()
    for j, want in enumerate(problem.word):
        word = position_word(j, 0, n)
        rules += _bits_rules(word, mode, fresh, seen)
        rules.append(_rule([_a(f"pos_{j}_0", x)], [_a("gactive", x), _a(f"bits_{word}", x)]))
        for t in tiles:
            if t != want:
                rules.append(_rule([_a(GOAL)], [_a(f"pos_{j}_0", x), _a(t, x)]))
    return rules


def gen_program(problem: TilingProblem, mode: str = "ucq") -> Program:
    n = _check(problem, mode)
    rules = tree_rules(n + 1, mode) + tiling_rules(problem, n, mode)
    return Program(tuple(rules), goal=GOAL, goal_arity=0)


def _path(rel_var: str, start: Term, length: int) -> tuple[list[Atom], Term]:
    atoms, cur = [], start
    for k in range(1, length + 1):
        nxt = var(f"{rel_var}_{k}")
        atoms.append(_a("r", cur, nxt))
        cur = nxt
    return atoms, cur


def q_m(m: int) -> tuple[list[Atom], Term, Term]:
    """Atoms of q_m(x_m, y_m): x_m and y_m sit at the same leaf position of
    two counting trees whose roots are joined by r."""
    xs = [var(f"X{i}") for i in range(m + 1)]
    ys = [var(f"Y{i}") for i in range(m + 1)]
    atoms = [_a("r", xs[0], ys[0])]
    for i in range(1, m + 1):
        z0 = var(f"Z{i}_0")
        near, zend = _path(f"Z{i}", z0, i + 2)
        far, wend = _path(f"W{i}", z0, i + 3)
        atoms += [_a("r", xs[i - 1], xs[i]), _a("r", ys[i - 1], ys[i]),
                  _a("jump", xs[i], zend), _a("jump", ys[i], wend)] + near + far
    return atoms, xs[m], ys[m]


def gen_query(n: int, mode: str = "ucq") -> UCQ:
    m = n + 1
    atoms, xm, ym = q_m(m)
    if mode == "ucq":
        return UCQ((CQ((), tuple(atoms + [_a(B1, xm), _a(B2BAR, ym)])),
                    CQ((), tuple(atoms + [_a(B1BAR, xm), _a(B2, ym)]))))
    u0 = var("U_0")
    near, uend = _path("U", u0, m + 2)
    far, vend = _path("V", u0, m + 5)
    extra = [_a("jump1", xm, uend), _a("jump2", ym, vend)] + near + far
    return UCQ((CQ((), tuple(atoms + extra)),))


def gen_lower_bound(problem: TilingProblem, mode: str = "ucq") -> LowerBound:
    n = _check(problem, mode)
    return LowerBound(gen_program(problem, mode), gen_query(n, mode), mode, n)


# ------------------------------------------------------- canonical grid

class _Grid:
    def __init__(self, n: int, mode: str):
        self.n, self.m, self.mode = n, n + 1, mode
        self.facts: list[Atom] = []

    def fact(self, rel: str, *names: str):
        self.facts.append(Atom(rel, tuple(const(a) for a in names)))

    def bit(self, rel: str, leaf: str):
        if self.mode == "ucq":
            self.fact(rel, leaf)
            return
        tag = "p" if rel in (B1, B1BAR) else "q"
        chain = [leaf] + [f"{leaf}_{tag}{k}" for k in range(1, 5)]
        for a, b in zip(chain, chain[1:]):
            self.fact("r", a, b)
        jump = "jump1" if tag == "p" else "jump2"
        for h in ((1, 4) if rel in (B1, B2) else (2, 3)):
            self.fact(jump, leaf, chain[h])

    def tree(self, root: str, word1: str, word2: str):
        """Counting tree below ``root``; leaf k carries bit k of each word."""
        for depth in range(1, self.m + 1):
            for path in itertools.product("LR", repeat=depth):
                path = "".join(path)
                node, parent = f"{root}_{path}", (f"{root}_{path[:-1]}" if depth > 1 else root)
                self.fact("r", parent, node)
                if path[-1] == "L":
                    self.fact("r", node, node + "_n1")
                    self.fact("r", node + "_n1", node + "_n2")
                    self.fact("jump", node, node + "_n2")
                else:
                    self.fact("r", node, node + "_n1")
                    self.fact("jump", node, node + "_n1")
                if depth == self.m:
                    k = int(path.replace("L", "0").replace("R", "1"), 2)
                    self.bit(B1 if word1[k] == "1" else B1BAR, node)
                    self.bit(B2 if word2[k] == "1" else B2BAR, node)


def grid_node(i: int, j: int) -> str:
    return f"g{i}_{j}"


def gen_canonical_grid(problem: TilingProblem, mode: str = "ucq") -> Instance:
    """The full grid with counting trees, free of counting defects."""
    n = _check(problem, mode)
    if n != 1:
        raise ValueError("the canonical grid is only generated for n = 1")
    size = 2 ** 2 ** n
    g = _Grid(n, mode)
    for i, j in itertools.product(range(size), repeat=2):
        a = grid_node(i, j)
        w = position_word(i, j, n)
        g.tree(a, w, w)
        loop = [f"s{i}_{j}"] if mode == "ucq" else [f"s{i}_{j}_{k}" for k in (1, 2, 3)]
        cycle = [a] + loop + [a]
        for s in loop:
            g.tree(s, w, w)
        for u, v in zip(cycle, cycle[1:]):
            g.fact("r", u, v)
        if i + 1 < size:
            h = f"h{i}_{j}"
            g.tree(h, position_word(i + 1, j, n), w)
            g.fact("r", a, h)
            g.fact("r", h, grid_node(i + 1, j))
        if j + 1 < size:
            v = f"v{i}_{j}"
            g.tree(v, position_word(i, j + 1, n), w)
            g.fact("r", a, v)
            g.fact("r", v, grid_node(i, j + 1))
    sch = {"r": 2, "jump": 2}
    sch.update({B1: 1, B2: 1, B1BAR: 1, B2BAR: 1} if mode == "ucq" else {"jump1": 2, "jump2": 2})
    return Instance.of(g.facts, sch)


def leaf_name(root: str, k: int, m: int) -> str:
    return f"{root}_{format(k, f'0{m}b').replace('0', 'L').replace('1', 'R')}"


def corrupt_b2(inst: Instance, root: str, leaf: int, m: int, mode: str = "ucq") -> Instance:
    """Flip the B2 bit at one leaf of the counting tree below ``root``."""
    node = leaf_name(root, leaf, m)
    facts = set(inst.facts)
    if mode == "ucq":
        for rel, other in ((B2, B2BAR), (B2BAR, B2)):
            f = Atom(rel, (const(node),))
            if f in facts:
                facts.discard(f)
                facts.add(Atom(other, (const(node),)))
                break
        else:
            raise ValueError(f"{node} carries no B2 label")
    else:
        chain = [node] + [f"{node}_q{k}" for k in range(1, 5)]
        hits = {f for f in facts if f.relation == "jump2" and f.args[0].name == node}
        if not hits:
            raise ValueError(f"{node} carries no B2 gadget")
        ones = {Atom("jump2", (const(node), const(chain[h]))) for h in (1, 4)}
        zeros = {Atom("jump2", (const(node), const(chain[h]))) for h in (2, 3)}
        facts -= hits
        facts |= zeros if hits == ones else ones
    return Instance.of(facts, inst.extra_schema)
