"""Hash-consed expression DAG over the reals.

Every structurally distinct expression exists once per :class:`ExprTable`,
so identity comparison is structural equality and rewriting can key
dictionaries on nodes directly.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Dict, Iterator, Optional

from .formats import RelOp, round_value

__all__ = ["Expr", "ExprTable", "evaluate", "to_text", "NotRational"]

ARITY = {"neg": 1, "abs": 1, "sqrt": 1, "add": 2, "sub": 2, "mul": 2, "div": 2, "fma": 3}


class Expr:
    """One node of the DAG.  Build nodes through an :class:`ExprTable`."""

    __slots__ = ("op", "args", "value", "name", "fmt", "uid", "table", "__weakref__")

    def __init__(self, table, uid, op, args=(), value=None, name=None, fmt=None):
        self.table = table
        self.uid = uid
        self.op = op
        self.args = args
        self.value = value
        self.name = name
        self.fmt = fmt

    def __repr__(self):
        return f"<Expr #{self.uid} {to_text(self)}>"

    def __lt__(self, other):
        return self.uid < other.uid

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    @property
    def is_rounded(self) -> bool:
        return self.op == "round"

    def walk(self) -> Iterator["Expr"]:
        """Post-order traversal visiting every shared node once."""
        seen = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                yield node
                continue
            if node.uid in seen:
                continue
            seen.add(node.uid)
            stack.append((node, True))
            for a in reversed(node.args):
                stack.append((a, False))

    # operator sugar, used mostly by tests and the rule table
    def __add__(self, o):
        return self.table.add(self, self.table.lift(o))

    def __radd__(self, o):
        return self.table.add(self.table.lift(o), self)

    def __sub__(self, o):
        return self.table.sub(self, self.table.lift(o))

    def __rsub__(self, o):
        return self.table.sub(self.table.lift(o), self)

    def __mul__(self, o):
        return self.table.mul(self, self.table.lift(o))

    def __rmul__(self, o):
        return self.table.mul(self.table.lift(o), self)

    def __truediv__(self, o):
        return self.table.div(self, self.table.lift(o))

    def __rtruediv__(self, o):
        return self.table.div(self.table.lift(o), self)

    def __neg__(self):
        return self.table.neg(self)


class ExprTable:
    """Interning factory; node ``uid`` is the creation index."""

    def __init__(self):
        self._nodes: Dict[tuple, Expr] = {}
        self.nodes: list[Expr] = []
        self.aliases: Dict[int, str] = {}

    def __len__(self):
        return len(self.nodes)

    def _make(self, key, op, args=(), value=None, name=None, fmt=None) -> Expr:
        node = self._nodes.get(key)
        if node is None:
            node = Expr(self, len(self.nodes), op, args, value, name, fmt)
            self._nodes[key] = node
            self.nodes.append(node)
        return node

    def const(self, value) -> Expr:
        value = Fraction(value)
        return self._make(("const", value), "const", value=value)

    def var(self, name: str) -> Expr:
        return self._make(("var", name), "var", name=name)

    def op(self, op: str, *args: Expr) -> Expr:
        if ARITY.get(op) != len(args):
            raise ValueError(f"bad arity for {op}")
        for a in args:
            if a.table is not self:
                raise ValueError("mixing nodes from different tables")
        return self._make((op,) + tuple(a.uid for a in args), op, tuple(args))

    def round(self, fmt, arg: Expr) -> Expr:
        return self._make(("round", fmt, arg.uid), "round", (arg,), fmt=fmt)

    def lift(self, x) -> Expr:
        return x if isinstance(x, Expr) else self.const(x)

    def neg(self, a):
        return self.op("neg", a)

    def abs(self, a):
        return self.op("abs", a)

    def sqrt(self, a):
        return self.op("sqrt", a)

    def add(self, a, b):
        return self.op("add", a, b)

    def sub(self, a, b):
        return self.op("sub", a, b)

    def mul(self, a, b):
        return self.op("mul", a, b)

    def div(self, a, b):
        return self.op("div", a, b)

    def fma(self, a, b, c):
        return self.op("fma", a, b, c)

    def alias_of(self, node: Expr) -> Optional[str]:
        return self.aliases.get(node.uid)

    def copy_into(self, node: Expr, other: "ExprTable") -> Expr:
        """Rebuild ``node`` (from another table) inside this table."""
        memo: Dict[int, Expr] = {}
        for n in node.walk():
            if n.op == "const":
                r = self.const(n.value)
            elif n.op == "var":
                r = self.var(n.name)
            elif n.op == "round":
                r = self.round(n.fmt, memo[n.args[0].uid])
            else:
                r = self.op(n.op, *(memo[a.uid] for a in n.args))
            memo[n.uid] = r
        return memo[node.uid]


# -- printing ----------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2}
_SYM = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def _const_text(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    d = v.denominator
    if d & (d - 1) == 0:
        return f"{v.numerator}b-{d.bit_length() - 1}"
    return f"({v.numerator}/{v.denominator})"


def _fmt_text(fmt, formats: Optional[dict]) -> str:
    if formats and fmt in formats:
        return formats[fmt]
    return str(fmt)


def to_text(e: Expr, aliases: bool = True, formats: Optional[dict] = None,
            top: bool = True) -> str:
    """Render ``e`` in the input syntax; alias names stand for their nodes."""
    if aliases and not top:
        name = e.table.alias_of(e)
        if name:
            return name
    op = e.op
    if op == "const":
        return _const_text(e.value)
    if op == "var":
        return e.name
    sub = lambda x: to_text(x, aliases, formats, top=False)  # noqa: E731
    if op == "neg":
        inner = sub(e.args[0])
        if e.args[0].op in _PREC or e.args[0].op == "neg":
            inner = f"({inner})"
        return "-" + inner
    if op == "abs":
        return f"|{sub(e.args[0])}|"
    if op == "sqrt":
        return f"sqrt({sub(e.args[0])})"
    if op == "fma":
        return "fma(" + ", ".join(sub(a) for a in e.args) + ")"
    if op == "round":
        child = e.args[0]
        if isinstance(e.fmt, RelOp):
            return f"{_fmt_text(e.fmt, formats)}({sub(child.args[0])}, {sub(child.args[1])})"
        return f"{_fmt_text(e.fmt, formats)}({sub(child)})"
    p = _PREC[op]
    left, right = e.args
    lt, rt = sub(left), sub(right)
    if left.op in _PREC and _PREC[left.op] < p and not (aliases and e.table.alias_of(left)):
        lt = f"({lt})"
    if right.op in _PREC and _PREC[right.op] <= p and not (aliases and e.table.alias_of(right)):
        rt = f"({rt})"
    if right.op == "neg" and not (aliases and e.table.alias_of(right)):
        rt = f"({rt})"
    return f"{lt} {_SYM[op]} {rt}"


# -- exact evaluation --------------------------------------------------------

class NotRational(ArithmeticError):
    """Square root of a non-square rational during exact evaluation."""


def _exact_sqrt(x: Fraction) -> Fraction:
    if x < 0:
        return Fraction(0)
    n, d = isqrt(x.numerator), isqrt(x.denominator)
    if n * n != x.numerator or d * d != x.denominator:
        raise NotRational(f"sqrt({x}) is irrational")
    return Fraction(n, d)


def evaluate(e: Expr, env: dict, relop_error=None) -> Fraction:
    """Exact value of ``e`` with every rounding applied exactly.

    Division by zero yields 0 and the square root of a negative number
    yields 0 (total functions).  ``relop_error`` maps an under-specified
    rounded node to its relative error; it defaults to 0.
    """
    memo: Dict[int, Fraction] = {}
    for n in e.walk():
        op = n.op
        if op == "const":
            v = n.value
        elif op == "var":
            v = Fraction(env[n.name])
        else:
            a = [memo[x.uid] for x in n.args]
            if op == "neg":
                v = -a[0]
            elif op == "abs":
                v = abs(a[0])
            elif op == "sqrt":
                v = _exact_sqrt(a[0])
            elif op == "add":
                v = a[0] + a[1]
            elif op == "sub":
                v = a[0] - a[1]
            elif op == "mul":
                v = a[0] * a[1]
            elif op == "div":
                v = a[0] / a[1] if a[1] else Fraction(0)
            elif op == "fma":
                v = a[0] * a[1] + a[2]
            elif op == "round":
                if isinstance(n.fmt, RelOp):
                    delta = Fraction(relop_error(n)) if relop_error else Fraction(0)
                    v = a[0] * (1 + delta)
                else:
                    v = round_value(a[0], n.fmt).to_fraction()
            else:
                raise ValueError(op)
        memo[n.uid] = v
    return memo[e.uid]
