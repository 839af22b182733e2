"""Lexer and recursive-descent parser for the script language.

A script has three parts: alias definitions, a proposition between braces
and a list of hints::

    @rnd = float<ieee_32, ne>;
    z rnd= x * (1 - x);
    { x in [0,1] -> z in ? }
    z ~ x * (1 - x);
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .dyadic import NumberSyntaxError, parse_number
from .expr import Expr, ExprTable, to_text
from .formats import DIRECTIONS, NAMED_FLOATS, RelOp, fixed_format, float_format
from .logic import And, Atom, Impl, Not, Or, UnspecifiedHypothesis, decompose, prop_text
from .poly import is_identically_zero, ring_equal

__all__ = [
    "ParseError",
    "Script",
    "RewriteHint",
    "ApproxHint",
    "BisectHint",
    "parse",
    "parse_expression",
    "lint",
]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, column {col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


@dataclass
class RewriteHint:
    lhs: Expr
    rhs: Expr
    line: int = 0
    verified: bool = False


@dataclass
class ApproxHint:
    approx: Expr
    exact: Expr
    line: int = 0


@dataclass
class BisectHint:
    targets: List[Expr]
    # (axis expression, mode, parameter): mode is "even" (n), "points"
    # (list of Fractions) or "dichotomy" (None)
    axes: List[Tuple[Expr, str, object]]
    line: int = 0


Hint = Union[RewriteHint, ApproxHint, BisectHint]


@dataclass
class Script:
    table: ExprTable
    aliases: Dict[str, Expr] = field(default_factory=dict)
    rounding_aliases: Dict[str, object] = field(default_factory=dict)
    proposition: object = None
    hints: List[Hint] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def rewrites(self) -> List[RewriteHint]:
        return [h for h in self.hints if isinstance(h, RewriteHint)]

    @property
    def approx_hints(self) -> List[ApproxHint]:
        return [h for h in self.hints if isinstance(h, ApproxHint)]

    @property
    def bisections(self) -> List[BisectHint]:
        return [h for h in self.hints if isinstance(h, BisectHint)]

    def format_names(self) -> Dict[object, str]:
        return {fmt: name for name, fmt in reversed(list(self.rounding_aliases.items()))}

    def text(self, e: Expr) -> str:
        return to_text(e, formats=self.format_names(), top=False)


# -- lexer ---------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eEbB][+-]?[0-9]+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>->|/\\|\\/|<=|>=|[{}\[\](),;<>=@|+\-*/?$~])
""", re.VERBOSE)

KEYWORDS = {"in", "not", "sqrt", "fma"}


@dataclass
class Token:
    kind: str  # "num", "id", "kw", "sym", "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> List[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "id" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        for i, ch in enumerate(text):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- parser ----------------------------------------------------------------------

_ROUNDING_OPS = {"add", "sub", "mul", "div", "sqrt", "fma"}


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, source: str, table: Optional[ExprTable] = None,
                 metavariables: bool = False):
        self.tokens = tokenize(source)
        self.pos = 0
        self.script = Script(table if table is not None else ExprTable())
        self.table = self.script.table
        self.free_used: Dict[str, Token] = {}
        self.metavariables = metavariables

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected '{text}' but found '{found}'")
        t = self.tok
        self.pos += 1
        return t

    def ident(self) -> Token:
        if self.tok.kind != "id":
            self.error(f"expected an identifier but found '{self.tok.text or 'end of input'}'")
        t = self.tok
        self.pos += 1
        return t

    # numbers
    def number(self) -> Fraction:
        t = self.tok
        if t.kind != "num":
            self.error(f"expected a number but found '{t.text or 'end of input'}'")
        self.pos += 1
        try:
            return parse_number(t.text)
        except NumberSyntaxError as exc:
            raise ParseError(str(exc), t.line, t.col) from None

    def snumber(self) -> Fraction:
        if self.accept("-"):
            return -self.number()
        self.accept("+")
        return self.number()

    # whole script
    def parse_script(self) -> Script:
        while not self.at("{"):
            if self.tok.kind == "eof":
                self.error("missing proposition block '{ ... }'")
            self.definition()
        self.expect("{")
        self.script.proposition = self.prop()
        self.expect("}")
        while self.tok.kind != "eof":
            self.hint()
        return self.script

    def definition(self):
        if self.accept("@"):
            name = self.ident()
            self.expect("=")
            fmt = self.function()
            self.expect(";")
            self._check_new_name(name)
            self.script.rounding_aliases[name.text] = fmt
            return
        name = self.ident()
        fmt = None
        if not self.at("="):
            fmt = self.function()
        self.expect("=")
        self._check_new_name(name)
        value = self.real(fmt)
        self.expect(";")
        self.script.aliases[name.text] = value
        old = self.table.alias_of(value)
        if old is not None:
            self.script.warnings.append(
                f"line {name.line}: {old} and {name.text} are two different names "
                f"for the same expression")
        else:
            self.table.aliases[value.uid] = name.text

    def _check_new_name(self, name: Token):
        n = name.text
        if n in self.script.aliases or n in self.script.rounding_aliases:
            self.error(f"'{n}' is aliased more than once", name)
        if n in self.free_used:
            used = self.free_used[n]
            self.error(f"'{n}' is aliased after being used as a free variable "
                       f"(line {used.line})", name)

    def function(self):
        """A rounding operator: builtin with parameters, or a rounding alias."""
        t = self.ident()
        params = []
        if self.accept("<"):
            while True:
                if self.tok.kind == "id":
                    params.append(self.ident().text)
                else:
                    params.append(self.snumber())
                if self.accept(">"):
                    break
                self.expect(",")
        return self._resolve_function(t, params)

    def _resolve_function(self, t: Token, params: list):
        name = t.text
        if name in self.script.rounding_aliases and not params:
            return self.script.rounding_aliases[name]

        def integer(x):
            if isinstance(x, str) or Fraction(x).denominator != 1:
                self.error(f"'{name}' expects an integer parameter", t)
            return int(x)

        def direction(x):
            if x not in DIRECTIONS:
                self.error(f"unknown rounding direction '{x}'", t)
            return x

        try:
            if name == "float":
                if len(params) == 2 and params[0] in NAMED_FLOATS:
                    return float_format(params[0], direction(params[1]))
                if len(params) == 3:
                    p = integer(params[0])
                    if p < 1:
                        self.error("float precision must be positive", t)
                    return float_format(p, integer(params[1]), direction(params[2]))
            elif name == "fixed" and len(params) == 2:
                return fixed_format(integer(params[0]), direction(params[1]))
            elif name == "int" and len(params) == 1:
                return fixed_format(0, direction(params[0]))
            elif name in ("add_rel", "sub_rel", "mul_rel") and len(params) in (1, 2):
                emin = integer(params[1]) if len(params) == 2 else None
                p = integer(params[0])
                if p < 1:
                    self.error("relative precision must be positive", t)
                return RelOp(name[:3], p, emin)
        except KeyError:
            pass
        self.error(f"unknown rounding operator '{name}' with {len(params)} parameter(s)", t)

    # expressions
    def reals(self, fmt=None) -> List[Expr]:
        out = [self.real(fmt)]
        while self.accept(","):
            out.append(self.real(fmt))
        return out

    def _wrap(self, fmt, op: str, node: Expr) -> Expr:
        if fmt is None or op not in _ROUNDING_OPS:
            return node
        if isinstance(fmt, RelOp):
            if fmt.kind != op:
                return node
        return self.table.round(fmt, node)

    def real(self, fmt=None) -> Expr:
        left = self.term(fmt)
        while self.at("+") or self.at("-"):
            op = "add" if self.tok.text == "+" else "sub"
            self.pos += 1
            right = self.term(fmt)
            left = self._wrap(fmt, op, self.table.op(op, left, right))
        return left

    def term(self, fmt) -> Expr:
        left = self.unary(fmt)
        while self.at("*") or self.at("/"):
            op = "mul" if self.tok.text == "*" else "div"
            self.pos += 1
            right = self.unary(fmt)
            left = self._wrap(fmt, op, self.table.op(op, left, right))
        return left

    def unary(self, fmt) -> Expr:
        if self.accept("-"):
            if self.tok.kind == "num":
                return self.table.const(-self.number())
            return self.table.neg(self.unary(fmt))
        if self.accept("+"):
            return self.unary(fmt)
        return self.primary(fmt)

    def primary(self, fmt) -> Expr:
        t = self.tok
        if t.kind == "num":
            return self.table.const(self.number())
        if self.accept("("):
            e = self.real(fmt)
            self.expect(")")
            return e
        if self.accept("|"):
            e = self.real(fmt)
            self.expect("|")
            return self.table.abs(e)
        if self.accept("sqrt"):
            self.expect("(")
            e = self.real(fmt)
            self.expect(")")
            return self._wrap(fmt, "sqrt", self.table.sqrt(e))
        if self.accept("fma"):
            self.expect("(")
            a = self.real(fmt)
            self.expect(",")
            b = self.real(fmt)
            self.expect(",")
            c = self.real(fmt)
            self.expect(")")
            return self._wrap(fmt, "fma", self.table.fma(a, b, c))
        if t.kind == "id":
            name = t.text
            nxt = self.peek()
            is_function = name in self.script.rounding_aliases or (
                nxt.kind == "sym" and nxt.text == "<")
            if is_function:
                f = self.function()
                self.expect("(")
                args = self.reals(fmt)
                self.expect(")")
                return self._apply(f, args, t)
            self.pos += 1
            if name in self.script.aliases:
                return self.script.aliases[name]
            if not self.metavariables:
                self.free_used.setdefault(name, t)
            return self.table.var(name)
        self.error(f"unexpected '{t.text or 'end of input'}' in expression")

    def _apply(self, f, args: List[Expr], t: Token) -> Expr:
        if isinstance(f, RelOp):
            if len(args) != 2:
                self.error(f"{f} takes two arguments", t)
            return self.table.round(f, self.table.op(f.kind, *args))
        if len(args) != 1:
            self.error(f"{f} takes one argument", t)
        return self.table.round(f, args[0])

    # propositions
    def prop(self):
        left = self.prop_or()
        if self.accept("->"):
            return Impl(left, self.prop())
        return left

    def prop_or(self):
        left = self.prop_and()
        while self.accept("\\/"):
            left = Or(left, self.prop_and())
        return left

    def prop_and(self):
        left = self.prop_not()
        while self.accept("/\\"):
            left = And(left, self.prop_not())
        return left

    def prop_not(self):
        if self.accept("not"):
            return Not(self.prop_not())
        if self.at("("):
            saved = self.pos
            try:
                self.pos += 1
                p = self.prop()
                if not self.at(")"):
                    raise _Backtrack
                self.pos += 1
                return p
            except (ParseError, _Backtrack):
                self.pos = saved
        return self.atom()

    def atom(self) -> Atom:
        e = self.real()
        t = self.tok
        if self.accept("in"):
            if self.accept("?"):
                return Atom("query", e)
            self.expect("[")
            lo = self.snumber()
            self.expect(",")
            hi = self.snumber()
            self.expect("]")
            if lo > hi:
                self.error("interval lower bound exceeds its upper bound", t)
            return Atom("in", e, lo, hi)
        if self.accept("<="):
            return Atom("le", e, hi=self.snumber())
        if self.accept(">="):
            return Atom("ge", e, lo=self.snumber())
        self.error(f"expected 'in', '<=' or '>=' but found '{t.text or 'end of input'}'")

    # hints
    def hint(self):
        line = self.tok.line
        if self.accept("$"):
            self.script.hints.append(BisectHint([], self.dvars(), line))
            self.expect(";")
            return
        exprs = self.reals()
        if self.accept("$"):
            self.script.hints.append(BisectHint(exprs, self.dvars(), line))
        elif len(exprs) == 1 and self.accept("->"):
            self.script.hints.append(RewriteHint(exprs[0], self.real(), line))
        elif len(exprs) == 1 and self.accept("~"):
            self.script.hints.append(ApproxHint(exprs[0], self.real(), line))
        else:
            self.error("expected '->', '~' or '$' in hint")
        self.expect(";")

    def dvars(self):
        out = [self.dvar()]
        while self.accept(","):
            out.append(self.dvar())
        return out

    def dvar(self):
        e = self.real()
        if self.accept("in"):
            if self.accept("("):
                points = [self.snumber()]
                while self.accept(","):
                    points.append(self.snumber())
                self.expect(")")
                return (e, "points", points)
            t = self.tok
            n = self.number()
            if n.denominator != 1 or n < 1:
                self.error("the number of sub-intervals must be a positive integer", t)
            return (e, "even", int(n))
        return (e, None, None)


def parse(source: str) -> Script:
    """Parse a whole script; raise :class:`ParseError` on bad input."""
    script = Parser(source).parse_script()
    for h in script.bisections:
        fixed = []
        for e, mode, param in h.axes:
            if mode is None:
                mode, param = ("dichotomy", None) if h.targets else ("even", 4)
            fixed.append((e, mode, param))
        h.axes = fixed
    for h in script.rewrites:
        h.verified = ring_equal(h.lhs, h.rhs)
    return script


def parse_expression(text: str, table: ExprTable, metavariables: bool = False) -> Expr:
    p = Parser(text, table, metavariables)
    e = p.real()
    if p.tok.kind != "eof":
        p.error(f"unexpected '{p.tok.text}' after expression")
    return e


# -- lint ----------------------------------------------------------------------

def automatic_approximations(script: Script) -> set:
    """Pairs ``(approx uid, exact uid)`` the prover detects by itself.

    Rounded nodes approximate their argument everywhere; a hypothesis on
    ``x - y`` or ``(x - y) / y`` only helps the sequents it lands in, so a
    pair counts when every sequent has it.
    """
    pairs = set()
    for node in script.table.nodes:
        if node.op == "round":
            pairs.add((node.uid, node.args[0].uid))
    try:
        sequents = decompose(script.proposition)
    except UnspecifiedHypothesis:
        return pairs
    common = None
    for seq in sequents:
        found = set()
        for a in seq.hypotheses:
            e = a.expr
            if e.op == "div" and e.args[0].op == "sub" and e.args[0].args[1] is e.args[1]:
                e = e.args[0]
            if e.op == "sub":
                found.add((e.args[0].uid, e.args[1].uid))
        common = found if common is None else common & found
    return pairs | (common or set())


def lint(script: Script) -> List[str]:
    """Warnings about suspicious aliases and hints."""
    warnings = list(script.warnings)
    for h in script.rewrites:
        where = f"line {h.line}: " if h.line else ""
        lhs, rhs = script.text(h.lhs), script.text(h.rhs)
        for side in (h.lhs, h.rhs):
            for n in side.walk():
                if n.op == "div" and is_identically_zero(n.args[1]):
                    warnings.append(f"{where}divisor {script.text(n.args[1])} in hint "
                                    f"'{lhs} -> {rhs}' is trivially zero")
        if not h.verified:
            warnings.append(f"{where}cannot check that {lhs} and {rhs} are equal; "
                            f"the rewriting is assumed")
    auto = automatic_approximations(script)
    for h in script.approx_hints:
        if (h.approx.uid, h.exact.uid) in auto:
            warnings.append(f"line {h.line}: hint '{script.text(h.approx)} ~ "
                            f"{script.text(h.exact)}' is useless and can be removed")
    return warnings


def script_text(script: Script) -> str:
    """Pretty-print a script back into the input language."""
    lines = []
    names = script.format_names()
    for name, fmt in script.rounding_aliases.items():
        lines.append(f"@{name} = {fmt};")
    # a definition may only mention aliases defined before it
    table = script.table
    saved = dict(table.aliases)
    table.aliases.clear()
    try:
        for name, e in script.aliases.items():
            lines.append(f"{name} = {to_text(e, formats=names)};")
            if saved.get(e.uid) == name:
                table.aliases[e.uid] = name
    finally:
        table.aliases.clear()
        table.aliases.update(saved)
    lines.append("{ " + _prop_src(script.proposition, names) + " }")

    def src(e):
        return to_text(e, formats=names, top=False)

    for h in script.hints:
        if isinstance(h, RewriteHint):
            lines.append(f"{src(h.lhs)} -> {src(h.rhs)};")
        elif isinstance(h, ApproxHint):
            lines.append(f"{src(h.approx)} ~ {src(h.exact)};")
        else:
            tg = ", ".join(src(t) for t in h.targets)
            axes = []
            for e, mode, param in h.axes:
                s = src(e)
                if mode == "even":
                    s += f" in {param}"
                elif mode == "points":
                    s += " in (" + ", ".join(_frac_src(x) for x in param) + ")"
                axes.append(s)
            lines.append(f"{tg} $ {', '.join(axes)};".lstrip())
    return "\n".join(lines) + "\n"


def _frac_src(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    if d & (d - 1) == 0:
        return f"{x.numerator}b-{d.bit_length() - 1}"
    # exact decimal when the denominator divides a power of ten
    k = 0
    while (10 ** k) % d and k < 64:
        k += 1
    if (10 ** k) % d == 0:
        n = x * 10 ** k
        return f"{n.numerator}e-{k}"
    raise ValueError(f"{x} has no literal in the input language")


def _prop_src(p, names) -> str:
    if isinstance(p, Atom):
        e = to_text(p.expr, formats=names, top=False)
        if p.kind == "in":
            return f"{e} in [{_frac_src(p.lo)}, {_frac_src(p.hi)}]"
        if p.kind == "le":
            return f"{e} <= {_frac_src(p.hi)}"
        if p.kind == "ge":
            return f"{e} >= {_frac_src(p.lo)}"
        return f"{e} in ?"
    if isinstance(p, Not):
        return f"not ({_prop_src(p.arg, names)})"
    sym = {And: "/\\", Or: "\\/", Impl: "->"}[type(p)]
    return f"({_prop_src(p.left, names)} {sym} {_prop_src(p.right, names)})"


__all__ += ["script_text", "automatic_approximations", "tokenize", "prop_text"]
