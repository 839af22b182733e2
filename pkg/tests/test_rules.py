"""Every built-in rewriting rule is an identity wherever its guards hold.

The acceptance module runs the same check with 10**4 valuations per rule.
"""

import random
from fractions import Fraction

import pytest

from roundbound.rules import METAVARS, RULES, compiled

from conftest import ref_eval

VALID = 10 ** 4


def _value(rng, square):
    if rng.random() < 0.08:
        return Fraction(0)
    x = Fraction(rng.randint(-50, 50), rng.randint(1, 12))
    if square:
        return x * x
    return x


def _uses_sqrt(rule):
    return "sqrt" in rule.lhs or "sqrt" in rule.rhs


def _guard_ok(guard, env):
    kind = guard[0]
    if kind == "ne":
        return True  # syntactic; identities must hold regardless
    v = ref_eval(guard[1], env)
    return {"nz": v != 0, "ge0": v >= 0, "gt0": v > 0}[kind]


def rule_violations(rule, valid=VALID):
    """Valuations meeting the guards where the two sides differ."""
    lhs, rhs, guards = compiled(rule)
    rng = random.Random(rule.name)
    square = _uses_sqrt(rule)
    bad = []
    done = tries = 0
    while done < valid:
        tries += 1
        assert tries < 20 * valid, f"guards of {rule.name} almost never hold"
        env = {v: _value(rng, square) for v in METAVARS}
        if rng.random() < 0.1:
            # coinciding metavariables are legal whenever the guards allow it
            x, y = rng.sample(METAVARS, 2)
            env[x] = env[y]
        if not all(_guard_ok(g, env) for g in guards):
            continue
        if ref_eval(lhs, env) != ref_eval(rhs, env):
            bad.append(env)
        done += 1
    return bad


@pytest.mark.parametrize("rule", RULES, ids=lambda r: r.name)
def test_rule_identity(rule):
    assert not rule_violations(rule, 2000)


def test_rule_names_unique():
    assert len({r.name for r in RULES}) == len(RULES)


def test_guards_mention_known_metavariables():
    for r in RULES:
        _, _, guards = compiled(r)
        for g in guards:
            for p in g[1:]:
                names = {n.name for n in p.walk() if n.op == "var"}
                assert names <= set(METAVARS), r.name
