"""Propositions and their decomposition into sequents.

A sequent has a conjunction of atoms on the left and an and/or tree of
atoms on the right.  Negations and implications are eliminated with the
usual sequent-calculus moves; inequality goals that sit directly in the
top-level disjunction also contribute their reversal as a hypothesis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, Union

from .expr import Expr, to_text

__all__ = [
    "Atom",
    "And",
    "Or",
    "Impl",
    "Not",
    "Prop",
    "Sequent",
    "UnspecifiedHypothesis",
    "decompose",
    "select_disjunct",
    "prop_text",
    "holds",
]


@dataclass(frozen=True, eq=False)
class Atom:
    kind: str  # "in", "le", "ge" or "query"
    expr: Expr
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None

    def key(self):
        return (self.kind, self.expr.uid, self.lo, self.hi)

    def __eq__(self, other):
        return isinstance(other, Atom) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def reversed(self) -> "Atom":
        if self.kind == "le":
            return Atom("ge", self.expr, lo=self.hi)
        if self.kind == "ge":
            return Atom("le", self.expr, hi=self.lo)
        raise ValueError("only inequalities can be reversed")


@dataclass(frozen=True)
class And:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class Or:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class Impl:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class Not:
    arg: "Prop"


Prop = Union[Atom, And, Or, Impl, Not]


@dataclass(frozen=True)
class _False:
    def __repr__(self):
        return "False"


FALSE = _False()


class UnspecifiedHypothesis(ValueError):
    """A ``in ?`` atom would end up among the hypotheses."""


@dataclass
class Sequent:
    hypotheses: List[Atom]
    goal: object  # Atom, And, Or or FALSE
    notes: List[str] = field(default_factory=list)

    def goal_atoms(self) -> List[Atom]:
        out: List[Atom] = []

        def rec(g):
            if isinstance(g, Atom):
                out.append(g)
            elif isinstance(g, (And, Or)):
                rec(g.left)
                rec(g.right)

        rec(self.goal)
        return out

    def text(self, formats=None) -> str:
        hyps = " /\\ ".join(prop_text(h, formats) for h in self.hypotheses) or "true"
        return f"{hyps} |- {prop_text(self.goal, formats)}"


def _num(x: Fraction) -> str:
    d = x.denominator
    if d == 1:
        return str(x.numerator)
    if d & (d - 1) == 0:
        return f"{x.numerator}b-{d.bit_length() - 1}"
    return f"{x.numerator}/{d}"


def prop_text(p, formats=None) -> str:
    if isinstance(p, Atom):
        e = to_text(p.expr, formats=formats, top=False)
        if p.kind == "in":
            return f"{e} in [{_num(p.lo)}, {_num(p.hi)}]"
        if p.kind == "le":
            return f"{e} <= {_num(p.hi)}"
        if p.kind == "ge":
            return f"{e} >= {_num(p.lo)}"
        return f"{e} in ?"
    if isinstance(p, And):
        return f"({prop_text(p.left, formats)} /\\ {prop_text(p.right, formats)})"
    if isinstance(p, Or):
        return f"({prop_text(p.left, formats)} \\/ {prop_text(p.right, formats)})"
    if isinstance(p, Impl):
        return f"({prop_text(p.left, formats)} -> {prop_text(p.right, formats)})"
    if isinstance(p, Not):
        return f"not {prop_text(p.arg, formats)}"
    return "false"


# -- decomposition -------------------------------------------------------------

def _is_pure(p) -> bool:
    if isinstance(p, Atom):
        return True
    if isinstance(p, (And, Or)):
        return _is_pure(p.left) and _is_pure(p.right)
    return False


def _flatten_or(p, out: list):
    if isinstance(p, Or):
        _flatten_or(p.left, out)
        _flatten_or(p.right, out)
    else:
        out.append(p)


def _build_or(items: list):
    if not items:
        return FALSE
    g = items[0]
    for x in items[1:]:
        g = Or(g, x)
    return g


def decompose(p: Prop) -> List[Sequent]:
    """Sequents whose joint validity implies ``p``."""
    result: List[Sequent] = []
    _split([], [], [p], result)
    out = []
    for hyps, goals in result:
        out.append(_finish(hyps, goals))
    return out


def _split(hyps: list, todo_h: list, goals: list, result: list):
    """``hyps`` are atoms, ``todo_h`` formulas still on the left, ``goals`` a disjunction."""
    todo_h = list(todo_h)
    hyps = list(hyps)
    while todo_h:
        h = todo_h.pop(0)
        if isinstance(h, Atom):
            hyps.append(h)
        elif isinstance(h, And):
            todo_h[:0] = [h.left, h.right]
        elif isinstance(h, Not):
            goals = [h.arg] + goals
        elif isinstance(h, Or):
            _split(hyps, [h.left] + todo_h, goals, result)
            _split(hyps, [h.right] + todo_h, goals, result)
            return
        elif isinstance(h, Impl):
            _split(hyps, todo_h, [h.left] + goals, result)
            _split(hyps, [h.right] + todo_h, goals, result)
            return
        else:
            return  # a false hypothesis closes the branch
    # right-hand side: flatten disjunctions and move negations/implications
    flat: list = []
    for g in goals:
        _flatten_or(g, flat)
    for i, g in enumerate(flat):
        if isinstance(g, Not):
            rest = flat[:i] + flat[i + 1:]
            _split(hyps, [g.arg], rest, result)
            return
        if isinstance(g, Impl):
            rest = flat[:i] + [g.right] + flat[i + 1:]
            _split(hyps, [g.left], rest, result)
            return
        if isinstance(g, And) and not _is_pure(g):
            rest = flat[:i] + flat[i + 1:]
            _split(hyps, [], [g.left] + rest, result)
            _split(hyps, [], [g.right] + rest, result)
            return
    # top-level conjunction of the whole goal: one sequent per conjunct
    if len(flat) == 1 and isinstance(flat[0], And):
        _split(hyps, [], [flat[0].left], result)
        _split(hyps, [], [flat[0].right], result)
        return
    flat = [g for g in flat if g is not FALSE]
    result.append((hyps, flat))


def _finish(hyps: List[Atom], goals: list) -> Sequent:
    seen = []
    for h in hyps:
        if h.kind == "query":
            raise UnspecifiedHypothesis(
                f"'{prop_text(h)}' would become a hypothesis; '?' is only allowed in goals")
        if h not in seen:
            seen.append(h)
    for g in goals:
        if isinstance(g, Atom) and g.kind in ("le", "ge"):
            r = g.reversed()
            if r not in seen:
                seen.append(r)
    return Sequent(seen, _build_or(goals))


# -- goal selection ----------------------------------------------------------

def select_disjunct(goal, prove: Callable[[Atom], object]) -> Tuple[bool, object]:
    """Prove an and/or tree atom by atom.

    Returns ``(ok, witness)``.  The witness mirrors the tree: an atom maps
    to whatever ``prove`` returned, an ``Or`` to ``("or", index, child)``
    naming the chosen side (left first), an ``And`` to ``("and", l, r)``.
    On failure the witness collects the per-atom results for diagnostics.
    """
    if isinstance(goal, Atom):
        r = prove(goal)
        return bool(r), r
    if isinstance(goal, And):
        ok1, w1 = select_disjunct(goal.left, prove)
        ok2, w2 = select_disjunct(goal.right, prove)
        return ok1 and ok2, ("and", w1, w2)
    if isinstance(goal, Or):
        ok1, w1 = select_disjunct(goal.left, prove)
        if ok1:
            return True, ("or", 0, w1)
        ok2, w2 = select_disjunct(goal.right, prove)
        if ok2:
            return True, ("or", 1, w2)
        return False, ("or", None, (w1, w2))
    return False, None


# -- semantics, for testing decompositions -------------------------------------

def holds(p, truth: Callable[[Atom], bool]) -> bool:
    """Truth value of ``p`` given truth values of its atoms."""
    if isinstance(p, Atom):
        return truth(p)
    if isinstance(p, And):
        return holds(p.left, truth) and holds(p.right, truth)
    if isinstance(p, Or):
        return holds(p.left, truth) or holds(p.right, truth)
    if isinstance(p, Impl):
        return (not holds(p.left, truth)) or holds(p.right, truth)
    if isinstance(p, Not):
        return not holds(p.arg, truth)
    return False
