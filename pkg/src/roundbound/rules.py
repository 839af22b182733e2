"""Built-in rewriting rules, stored as data.

Patterns are written in the input language.  Lowercase ``a b c d`` match
any expression; an uppercase ``A`` only matches an expression that the
lowercase ``a`` is registered to approximate.  Guards are either
syntactic (``("ne", x, y)``: the two instances are different nodes) or
semantic (``nz``: nonzero, ``ge0``: nonnegative, ``gt0``: positive),
the latter being discharged by enclosures at application time.

The same table drives the prover and the certificate checker; the
checker instantiates patterns from recorded substitutions and never
needs to search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .expr import Expr, ExprTable

__all__ = ["Rule", "RULES", "RULES_BY_NAME", "METAVARS", "match", "instantiate",
           "guard_instances"]

METAVARS = ("a", "b", "c", "d", "A")


@dataclass(frozen=True)
class Rule:
    name: str
    lhs: str
    rhs: str
    guards: Tuple[Tuple[str, ...], ...] = ()
    # expanding rules introduce new intermediate terms; simplifying ones do not
    expanding: bool = False


def _r(name, lhs, rhs, *guards, expanding=False):
    return Rule(name, lhs, rhs, tuple(guards), expanding)


RULES: List[Rule] = [
    _r("opp_mibs", "-a - -b", "-(a - b)", ("ne", "a", "b")),
    _r("opp_mibs_q", "(-a - -b) / -b", "(a - b) / b", ("nz", "b"), ("ne", "a", "b")),
    _r("add_xals", "a + b", "(a - A) + (A + b)", expanding=True),
    _r("add_xars", "c + a", "(c + A) + (a - A)", expanding=True),
    _r("add_mibs", "(a + b) - (c + d)", "(a - c) + (b - d)", ("ne", "a", "c"), ("ne", "b", "d")),
    _r("add_fils", "(a + b) - (a + c)", "b - c", ("ne", "b", "c")),
    _r("add_firs", "(a + b) - (c + b)", "a - c", ("ne", "a", "c")),
    _r("sub_xals", "a - b", "(a - A) + (A - b)", ("ne", "a", "b"), ("ne", "A", "b"),
       expanding=True),
    _r("sub_xars", "b - a", "(b - A) + -(a - A)", ("ne", "b", "a"), expanding=True),
    _r("sub_mibs", "(a - b) - (c - d)", "(a - c) + -(b - d)", ("ne", "a", "c"), ("ne", "b", "d")),
    _r("sub_fils", "(a - b) - (a - c)", "-(b - c)", ("ne", "b", "c")),
    _r("sub_firs", "(a - b) - (c - b)", "a - c", ("ne", "a", "c")),
    _r("mul_xals", "a * b", "(a - A) * b + A * b", expanding=True),
    _r("mul_xars", "b * a", "b * (a - A) + b * A", expanding=True),
    _r("mul_fils", "a * b - a * c", "a * (b - c)", ("ne", "b", "c")),
    _r("mul_firs", "a * c - b * c", "(a - b) * c", ("ne", "a", "b")),
    _r("mul_mars", "a * b - c * d", "a * (b - d) + (a - c) * d", ("ne", "a", "c"), ("ne", "b", "d")),
    _r("mul_mals", "a * b - c * d", "(a - c) * b + c * (b - d)", ("ne", "a", "c"), ("ne", "b", "d")),
    _r("mul_mabs", "a * b - c * d", "a * (b - d) + (a - c) * b + -((a - c) * (b - d))",
       ("ne", "a", "c"), ("ne", "b", "d")),
    _r("mul_mibs", "a * b - c * d", "c * (b - d) + (a - c) * d + (a - c) * (b - d)",
       ("ne", "a", "c"), ("ne", "b", "d")),
    _r("mul_filq", "(a * b - a * c) / (a * c)", "(b - c) / c",
       ("nz", "a"), ("nz", "c"), ("ne", "b", "c")),
    _r("mul_firq", "(a * b - c * b) / (c * b)", "(a - c) / c",
       ("nz", "b"), ("nz", "c"), ("ne", "a", "c")),
    _r("div_mibq", "(a / b - c / d) / (c / d)",
       "((a - c) / c - (b - d) / d) / (1 + (b - d) / d)",
       ("nz", "b"), ("nz", "c"), ("nz", "d"), ("ne", "b", "d")),
    _r("div_firq", "(a / b - c / b) / (c / b)", "(a - c) / c",
       ("nz", "b"), ("nz", "c"), ("ne", "a", "c")),
    _r("sqrt_mibs", "sqrt(a) - sqrt(b)", "(a - b) / (sqrt(a) + sqrt(b))",
       ("ge0", "a"), ("ge0", "b"), ("ne", "a", "b")),
    _r("sqrt_mibq", "(sqrt(a) - sqrt(b)) / sqrt(b)", "sqrt(1 + (a - b) / b) - 1",
       ("ge0", "a"), ("gt0", "b"), ("ne", "a", "b")),
    _r("sub_xals_b", "b - A", "(b - a) + (a - A)", ("ne", "A", "b"), ("ne", "a", "b"),
       expanding=True),
    _r("err_fabq", "1 + (a - b) / b", "a / b", ("nz", "b"), ("ne", "a", "b")),
    _r("val_xabs", "a", "A + (a - A)", expanding=True),
    _r("val_xebs", "A", "a + -(a - A)", expanding=True),
    _r("val_xabq", "a", "A * (1 + (a - A) / A)", ("nz", "A"), expanding=True),
    _r("val_xebq", "A", "a / (1 + (a - A) / A)", ("nz", "a"), ("nz", "A"), expanding=True),
    _r("square_sqrt", "sqrt(a) * sqrt(a)", "a", ("ge0", "a")),
    _r("addf_1", "a / (a + b)", "1 / (1 + b / a)", ("nz", "a"), ("nz", "a + b"), ("ne", "a", "1")),
    _r("addf_2", "a / (a + b)", "1 - 1 / (1 + a / b)", ("nz", "b"), ("nz", "a + b"), ("ne", "a", "1")),
    _r("addf_3", "a / (a - b)", "1 / (1 - b / a)", ("nz", "a"), ("nz", "a - b"), ("ne", "a", "1")),
    _r("addf_4", "a / (a - b)", "1 + 1 / (a / b - 1)", ("nz", "b"), ("nz", "a - b"), ("ne", "a", "1")),
]

RULES_BY_NAME: Dict[str, Rule] = {r.name: r for r in RULES}


# -- compiled patterns -----------------------------------------------------------

_PATTERNS = ExprTable()
_COMPILED: Dict[str, Tuple[Expr, Expr, list]] = {}


def _pattern(text: str) -> Expr:
    from .parser import parse_expression
    return parse_expression(text, _PATTERNS, metavariables=True)


def compiled(rule: Rule) -> Tuple[Expr, Expr, list]:
    """``(lhs, rhs, guards)`` with guard operands parsed as patterns."""
    c = _COMPILED.get(rule.name)
    if c is None:
        guards = [(g[0],) + tuple(_pattern(x) for x in g[1:]) for g in rule.guards]
        c = (_pattern(rule.lhs), _pattern(rule.rhs), guards)
        _COMPILED[rule.name] = c
    return c


def _metavar(p: Expr) -> Optional[str]:
    if p.op == "var" and p.name in METAVARS:
        return p.name
    return None


def _match(p: Expr, e: Expr, env: Dict[str, Expr]) -> bool:
    name = _metavar(p)
    if name is not None:
        bound = env.get(name)
        if bound is None:
            env[name] = e
            return True
        return bound is e
    if p.op != e.op:
        return False
    if p.op == "const":
        return p.value == e.value
    if p.op == "var":
        return p.name == e.name
    if p.op == "round":
        return False
    return all(_match(pa, ea, env) for pa, ea in zip(p.args, e.args))


def match(rule: Rule, e: Expr, approximates: Dict[int, List[Expr]],
          approximated_by: Dict[int, List[Expr]]) -> Iterator[Dict[str, Expr]]:
    """Substitutions under which ``rule``'s left side is ``e``.

    ``approximates[uid]`` lists the expressions that node ``uid``
    approximates; ``approximated_by`` is the converse relation.
    Syntactic guards are enforced here, semantic ones are not.
    """
    lhs, rhs, guards = compiled(rule)
    env: Dict[str, Expr] = {}
    if not _match(lhs, e, env):
        return
    envs: Iterable[Dict[str, Expr]]
    if "A" in env:
        envs = [dict(env, a=x) for x in approximated_by.get(env["A"].uid, ())]
    elif _uses(rhs, "A") or any(_uses(g[1], "A") for g in guards if len(g) > 1):
        if "a" not in env:
            return
        envs = [dict(env, A=x) for x in approximates.get(env["a"].uid, ())]
    else:
        envs = [env]
    for s in envs:
        if _syntactic_ok(guards, s, e.table):
            yield s


def _uses(p: Expr, name: str) -> bool:
    return any(n.op == "var" and n.name == name for n in p.walk())


def _syntactic_ok(guards, env, table: ExprTable) -> bool:
    for g in guards:
        if g[0] == "ne" and instantiate(g[1], env, table) is instantiate(g[2], env, table):
            return False
    return True


def instantiate(p: Expr, env: Dict[str, Expr], table: ExprTable) -> Expr:
    """Build pattern ``p`` in ``table`` with metavariables replaced by ``env``."""
    memo: Dict[int, Expr] = {}
    for n in p.walk():
        name = _metavar(n)
        if name is not None:
            r = env[name]
        elif n.op == "const":
            r = table.const(n.value)
        elif n.op == "var":
            r = table.var(n.name)
        else:
            r = table.op(n.op, *(memo[a.uid] for a in n.args))
        memo[n.uid] = r
    return memo[p.uid]


def guard_instances(rule: Rule, env: Dict[str, Expr], table: ExprTable):
    """Semantic guards as ``(kind, expression)`` pairs; syntactic ones as ``("ne", x, y)``."""
    _, _, guards = compiled(rule)
    out = []
    for g in guards:
        out.append((g[0],) + tuple(instantiate(x, env, table) for x in g[1:]))
    return out


def rewrite_target(rule: Rule, env: Dict[str, Expr], table: ExprTable) -> Expr:
    return instantiate(compiled(rule)[1], env, table)


def rewrite_source(rule: Rule, env: Dict[str, Expr], table: ExprTable) -> Expr:
    return instantiate(compiled(rule)[0], env, table)


__all__ += ["compiled", "rewrite_target", "rewrite_source"]
