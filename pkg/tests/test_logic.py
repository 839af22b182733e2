import random

import pytest

from roundbound.logic import (FALSE, And, Atom, Impl, Not, Or, UnspecifiedHypothesis, decompose,
                              holds, prop_text, select_disjunct)
from roundbound.parser import parse

from conftest import load


def _texts(seq):
    return sorted(prop_text(h) for h in seq.hypotheses), prop_text(seq.goal)


def test_two_sequents():
    script = parse(load("two_sequents.g"))
    got = [_texts(s) for s in decompose(script.proposition)]
    assert got == [
        (["x - 2 in [-2, 0]", "x <= 1"], "(x + 1 in [0, 2] \\/ x + y in ?)"),
        (["x - 2 in [-2, 0]", "x <= 1", "y in [3, 4]"], "x + y in ?"),
    ]


def test_reversed_inequality_goal():
    script = parse("{ x in [2,3] -> (y in [4,5] /\\ z >= 6) }")
    got = [_texts(s) for s in decompose(script.proposition)]
    assert got == [(["x in [2, 3]"], "y in [4, 5]"),
                   (["x in [2, 3]", "z <= 6"], "z >= 6")]


def test_negated_goal_is_contradiction():
    (s,) = decompose(parse("{ not x in [0,1] }").proposition)
    assert _texts(s) == (["x in [0, 1]"], "false")
    assert s.goal is FALSE


def test_query_hypothesis_rejected():
    with pytest.raises(UnspecifiedHypothesis):
        decompose(parse("{ x in ? -> y in [0,1] }").proposition)


# -- truth-table soundness ---------------------------------------------------------

def _random_prop(rng, atoms, depth):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(atoms)
    k = rng.randrange(4)
    if k == 3:
        return Not(_random_prop(rng, atoms, depth - 1))
    cls = (And, Or, Impl)[k]
    return cls(_random_prop(rng, atoms, depth - 1), _random_prop(rng, atoms, depth - 1))


def _atoms():
    s = parse("{ a in [0,1] /\\ b in [0,1] /\\ c <= 1 /\\ d >= 2 }")
    out = []

    def rec(p):
        if isinstance(p, Atom):
            out.append(p)
        else:
            rec(p.left)
            rec(p.right)
    rec(s.proposition)
    return out


def _assignment(rng, atoms):
    truth = {a: rng.random() < 0.5 for a in atoms}
    for a in atoms:
        if a.kind in ("le", "ge"):
            # x <= c and x >= c cannot both be false
            truth[a.reversed()] = True if not truth[a] else rng.random() < 0.5
    return truth


def test_decompose_sound_on_truth_tables():
    rng = random.Random(7)
    atoms = _atoms()
    for _ in range(3000):
        p = _random_prop(rng, atoms, 4)
        seqs = decompose(p)
        for _ in range(8):
            truth = _assignment(rng, atoms)
            t = truth.__getitem__
            all_hold = all(not all(t(h) for h in s.hypotheses) or holds(s.goal, t) for s in seqs)
            if all_hold:
                assert holds(p, t), prop_text(p)


def test_decompose_idempotent():
    rng = random.Random(11)
    atoms = _atoms()
    for _ in range(1000):
        for s in decompose(_random_prop(rng, atoms, 4)):
            p = s.goal
            if s.hypotheses:
                h = s.hypotheses[0]
                for x in s.hypotheses[1:]:
                    h = And(h, x)
                p = Impl(h, s.goal)
            (again,) = decompose(p)
            assert set(again.hypotheses) == set(s.hypotheses)
            assert again.goal == s.goal


def test_no_negation_or_implication_left():
    rng = random.Random(3)
    atoms = _atoms()

    def clean(g):
        if isinstance(g, (And, Or)):
            return clean(g.left) and clean(g.right)
        return isinstance(g, Atom) or g is FALSE
    for _ in range(1000):
        for s in decompose(_random_prop(rng, atoms, 5)):
            assert clean(s.goal)
            assert all(isinstance(h, Atom) for h in s.hypotheses)


def test_select_disjunct():
    a, b, c, _ = _atoms()
    ok, w = select_disjunct(Or(a, b), lambda x: x is b and "proof")
    assert ok and w == ("or", 1, "proof")
    ok, w = select_disjunct(And(a, c), lambda x: "p")
    assert ok and w == ("and", "p", "p")
    ok, w = select_disjunct(Or(a, b), lambda x: None)
    assert not ok and w[1] is None
