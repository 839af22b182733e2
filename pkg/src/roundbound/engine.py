"""Saturation prover over BND/ABS/FIX/FLT facts.

Proving a sequent has two stages.  Exploration walks backward from the
goals and builds a graph whose nodes are ``(predicate, expression)``
pairs and whose edges are theorem instances ("schemas") that could
produce a node from other nodes; rewriting rules add new expressions to
the graph on the way.  Saturation then runs breadth-first rounds over
the graph, applying every schema whose inputs changed and keeping, per
node, the tightest fact found so far.

Every fact records the theorem, the operand facts and the parameters
that produced it, so a proof is a DAG of facts ready to be turned into
a certificate.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .dyadic import Dyadic, floor_log2, rational_to_dyadic
from .expr import Expr, ExprTable
from .formats import (
    Format,
    RelOp,
    Undefined,
    abs_error_enclosure,
    rel_error_enclosure,
    representable_clip,
    round_interval,
)
from .interval import (
    EMPTY,
    DomainError,
    Interval,
    iv_abs,
    iv_add,
    iv_div,
    iv_hull,
    iv_intersect,
    iv_mul,
    iv_neg,
    iv_rel_compose,
    iv_sqrt,
    iv_sub,
    iv_subset,
)
from .logic import Atom, Sequent, select_disjunct
from .rules import RULES, guard_instances, match, rewrite_target

log = logging.getLogger(__name__)

__all__ = [
    "Config",
    "Fact",
    "EmptyGoalError",
    "Outcome",
    "SequentProver",
    "goal_interval",
]


@dataclass
class Config:
    precision: int = 128
    max_iterations: int = 100
    max_applications: int = 10**6
    rewrite_depth: int = 2
    max_nodes: int = 50000
    max_depth: int = 40
    dichotomy_depth: int = 32


class EmptyGoalError(ValueError):
    """A goal interval contains no number representable at the working precision."""


class Fact:
    """A proved predicate with its provenance."""

    __slots__ = ("kind", "expr", "value", "theorem", "operands", "params", "serial")

    _counter = 0

    def __init__(self, kind, expr, value, theorem, operands=(), params=None):
        self.kind = kind
        self.expr = expr
        self.value = value
        self.theorem = theorem
        self.operands = tuple(operands)
        self.params = params or {}
        Fact._counter += 1
        self.serial = Fact._counter

    @property
    def key(self):
        return (self.kind, self.expr.uid if self.expr is not None else -1)

    def __repr__(self):
        return f"<{self.kind} {self.expr} {self.value} by {self.theorem}>"


def goal_interval(atom: Atom, precision: int):
    """Inward dyadic version of a goal; ``(lo, hi)`` with ``None`` for open sides."""
    lo = hi = None
    if atom.kind in ("in", "ge"):
        lo = rational_to_dyadic(atom.lo, "up", precision)
    if atom.kind in ("in", "le"):
        hi = rational_to_dyadic(atom.hi, "down", precision)
    if lo is not None and hi is not None and lo > hi:
        raise EmptyGoalError(
            f"the goal interval [{_frac(atom.lo)}, {_frac(atom.hi)}] has no representable "
            f"subset: the empty set is the largest one, so the goal cannot be proved")
    return lo, hi


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def satisfies(fact: Optional[Fact], bounds) -> bool:
    if fact is None:
        return False
    lo, hi = bounds
    j = fact.value
    return (lo is None or j.lo >= lo) and (hi is None or j.hi <= hi)


# -- the exploration graph ---------------------------------------------------------

@dataclass
class Schema:
    theorem: str
    target: tuple
    operands: tuple
    data: dict = field(default_factory=dict)


# costs of expanding rewrites; peeling a literal rounding is free
_PEELING = {"sub_xals", "sub_xars", "sub_xals_b", "val_xabs"}


def _is_closed(e: Expr, memo: Dict[int, bool]) -> bool:
    r = memo.get(e.uid)
    if r is None:
        r = e.op != "var" and all(_is_closed(a, memo) for a in e.args)
        memo[e.uid] = r
    return r


class Graph:
    """Nodes and schemas reachable backward from a set of goals."""

    def __init__(self, table: ExprTable, config: Config,
                 approximates: Dict[int, List[Expr]],
                 user_rules: List[Tuple[Expr, Expr, bool]],
                 one_sided: Dict[int, set]):
        self.table = table
        self.config = config
        self.approximates = approximates
        self.approximated_by: Dict[int, List[Expr]] = defaultdict(list)
        for a_uid, exacts in approximates.items():
            a = table.nodes[a_uid]
            for x in exacts:
                if a not in self.approximated_by[x.uid]:
                    self.approximated_by[x.uid].append(a)
        self.user_rules = user_rules
        self.one_sided = one_sided
        self.schemas: Dict[tuple, List[Schema]] = {}
        self.signatures: Dict[tuple, set] = {}
        self.budget: Dict[tuple, int] = {}
        self.order: List[tuple] = []
        self.consumers: Dict[tuple, List[Schema]] = defaultdict(list)
        self._closed: Dict[int, bool] = {}
        self.truncated = False

    def expr(self, key) -> Expr:
        return self.table.nodes[key[1]]

    def explore(self, roots: Iterable[tuple], budget: Optional[int] = None):
        budget = self.config.rewrite_depth if budget is None else budget
        queue = [(k, budget, 0) for k in roots]
        head = 0
        while head < len(queue):
            key, b, depth = queue[head]
            head += 1
            if key in self.budget and self.budget[key] >= b:
                continue
            if len(self.budget) >= self.config.max_nodes or depth > self.config.max_depth:
                self.truncated = True
                continue
            first = key not in self.budget
            self.budget[key] = b
            if first:
                self.order.append(key)
            for schema, cost in self._generate(key, b, first):
                # a known schema still passes a larger budget down
                self._register(schema)
                for op in schema.operands:
                    queue.append((op, b - cost, depth + 1))
                if schema.target != key:
                    queue.append((schema.target, b, depth + 1))

    def _register(self, schema: Schema) -> bool:
        data = tuple(sorted((k, v if not isinstance(v, dict) else tuple(sorted(v.items())))
                            for k, v in schema.data.items()))
        sig = (schema.theorem, schema.operands, data)
        sigs = self.signatures.setdefault(schema.target, set())
        if sig in sigs:
            return False
        sigs.add(sig)
        self.schemas.setdefault(schema.target, []).append(schema)
        for op in set(schema.operands):
            self.consumers[op].append(schema)
        return True

    def _add(self, out, theorem, target, operands=(), cost=0, **data):
        out.append((Schema(theorem, target, tuple(operands), data), cost))

    def _generate(self, key, budget, first):
        kind, uid = key
        e = self.table.nodes[uid]
        out: list = []
        if kind == "BND":
            if first:
                self._bnd_structural(e, key, out)
            self._bnd_rewrites(e, key, budget, out)
        elif kind == "ABS" and first:
            self._abs_structural(e, key, out)
        elif kind == "FIX" and first:
            self._fix_structural(e, key, out)
        elif kind == "FLT" and first:
            self._flt_structural(e, key, out)
        return out

    # BND ------------------------------------------------------------------
    def _bnd_structural(self, e: Expr, key, out):
        B = lambda x: ("BND", x.uid)  # noqa: E731
        A = lambda x: ("ABS", x.uid)  # noqa: E731
        op = e.op
        if op == "const":
            self._add(out, "constant", key)
        elif op == "neg":
            self._add(out, "neg", key, [B(e.args[0])])
        elif op == "abs":
            self._add(out, "abs", key, [B(e.args[0])])
            self._add(out, "abs_to_bnd", key, [A(e.args[0])])
        elif op == "sqrt":
            self._add(out, "sqrt", key, [B(e.args[0])])
        elif op in ("add", "sub", "mul", "div"):
            a, b = e.args
            if a is b and op == "sub":
                self._add(out, "sub_refl", key)
            elif a is b and op == "div":
                self._add(out, "div_refl", key, [A(a)])
            elif a is b and op == "mul":
                self._add(out, "square", key, [B(a)])
            else:
                self._add(out, op, key, [B(a), B(b)])
            if op == "add" and a.op == "add" and b.op == "mul" and b.args[0] is a.args[0] \
                    and b.args[1] is a.args[1]:
                self._add(out, "compose", key, [B(a.args[0]), B(a.args[1])])
            if op == "sub" and a.op == "round" and a.args[0] is b:
                self._rounding_error(a, key, out)
            if op == "div" and a.op == "sub" and a.args[0].op == "round" \
                    and a.args[0].args[0] is a.args[1] and b is a.args[1]:
                self._relative_error(a.args[0], key, out)
        elif op == "fma":
            self._add(out, "fma", key, [B(x) for x in e.args])
        elif op == "round":
            if isinstance(e.fmt, RelOp):
                self._add(out, "rel_round", key, [B(e.args[0])])
            else:
                self._add(out, "rnd_bnd", key, [B(e.args[0])])
                self._add(out, "rnd_clip", key, [key])
        for kind in self.one_sided.get(e.uid, ()):
            theorem = "refine_le" if kind == "LE" else "refine_ge"
            self._add(out, theorem, key, [key, (kind, e.uid)])

    def _rounding_error(self, r: Expr, key, out):
        a = r.args[0]
        fmt = r.fmt
        if isinstance(fmt, RelOp):
            self._add(out, "rel_err_abs", key, [("BND", a.uid)])
            return
        if fmt.kind == "fixed":
            self._add(out, "err_fix", key)
        self._add(out, "err_bnd_arg", key, [("BND", a.uid)])
        self._add(out, "err_bnd_res", key, [("BND", r.uid)])
        self._add(out, "err_abs_arg", key, [("ABS", a.uid)])
        self._add(out, "err_abs_res", key, [("ABS", r.uid)])
        self._add(out, "err_exact", key, [("FIX", a.uid), ("FLT", a.uid)])

    def _relative_error(self, r: Expr, key, out):
        a = r.args[0]
        fmt = r.fmt
        if isinstance(fmt, RelOp):
            if fmt.min_exp is None:
                self._add(out, "rel_err_rel", key)
            else:
                self._add(out, "rel_err_rel", key, [("BND", a.uid)])
            return
        if fmt.kind != "float":
            return
        self._add(out, "relerr_bnd_arg", key, [("BND", a.uid)])
        self._add(out, "relerr_bnd_res", key, [("BND", r.uid)])
        self._add(out, "relerr_abs_arg", key, [("ABS", a.uid)])
        self._add(out, "relerr_abs_res", key, [("ABS", r.uid)])

    def _bnd_rewrites(self, e: Expr, key, budget, out):
        if e.op == "const" or _is_closed(e, self._closed):
            return
        for i, (lhs, rhs, _) in enumerate(self.user_rules):
            if lhs is e:
                self._add(out, "user", key, [("BND", rhs.uid)], index=i)
        for rule in RULES:
            for env in match(rule, e, self.approximates, self.approximated_by):
                cost = self._cost(rule, env)
                if cost > budget:
                    continue
                target = rewrite_target(rule, env, self.table)
                if target is e:
                    continue
                operands = [("BND", target.uid)]
                guards = []
                for g in guard_instances(rule, env, self.table):
                    if g[0] == "nz":
                        operands.append(("ABS", g[1].uid))
                        guards.append("nz")
                    elif g[0] in ("ge0", "gt0"):
                        operands.append(("BND", g[1].uid))
                        guards.append(g[0])
                self._add(out, "rewrite", key, operands, cost, rule=rule.name,
                          env={k: v.uid for k, v in env.items()}, guards=tuple(guards))

    def _cost(self, rule, env) -> int:
        if not rule.expanding:
            return 0
        if rule.name in _PEELING:
            a, A = env.get("a"), env.get("A")
            if a is not None and a.op == "round" and a.args[0] is A:
                return 0
        return 1

    # ABS ------------------------------------------------------------------
    def _abs_structural(self, e: Expr, key, out):
        A = lambda x: ("ABS", x.uid)  # noqa: E731
        self._add(out, "abs_of_bnd", key, [("BND", e.uid)])
        op = e.op
        if op in ("neg", "abs"):
            self._add(out, "abs_" + op, key, [A(e.args[0])])
        elif op == "sqrt":
            self._add(out, "abs_sqrt", key, [A(e.args[0])])
        elif op in ("add", "sub", "mul", "div") and e.args[0] is not e.args[1]:
            self._add(out, "abs_" + op, key, [A(e.args[0]), A(e.args[1])])
        # the reverse bridges live on the BND node of the same expression
        bkey = ("BND", e.uid)
        self._add(out, "bnd_of_abs", bkey, [key])
        self._add(out, "bnd_abs_refine", bkey, [bkey, key])

    # FIX / FLT ------------------------------------------------------------
    def _fix_structural(self, e: Expr, key, out):
        op = e.op
        F = lambda x: ("FIX", x.uid)  # noqa: E731
        if op == "const":
            self._add(out, "fix_const", key)
        elif op == "round" and isinstance(e.fmt, Format):
            self._add(out, "fix_rnd", key)
        elif op in ("add", "sub", "mul"):
            self._add(out, "fix_" + op, key, [F(e.args[0]), F(e.args[1])])
        elif op == "neg":
            self._add(out, "fix_neg", key, [F(e.args[0])])
        self._add(out, "fix_of_flt", key, [("FLT", e.uid), ("ABS", e.uid)])

    def _flt_structural(self, e: Expr, key, out):
        op = e.op
        F = lambda x: ("FLT", x.uid)  # noqa: E731
        if op == "const":
            self._add(out, "flt_const", key)
        elif op == "round" and isinstance(e.fmt, Format) and e.fmt.kind == "float":
            self._add(out, "flt_rnd", key)
        elif op == "mul":
            self._add(out, "flt_mul", key, [F(e.args[0]), F(e.args[1])])
        elif op == "neg":
            self._add(out, "flt_neg", key, [F(e.args[0])])
        self._add(out, "flt_of_fix", key, [("FIX", e.uid), ("ABS", e.uid)])


# -- theorem instances -----------------------------------------------------------

_ABSURD = object()
_ZERO = Dyadic(0)
_ONE = Dyadic(1)


def _rounded_fmt(e: Expr):
    """Format of the rounding in ``o(a) - a`` or ``(o(a) - a) / a``."""
    if e.op == "div":
        e = e.args[0]
    return e.args[0].fmt


def _info(kind, fact):
    return (kind, fact.value)


def _t_constant(p, e, ops, s):
    v = e.value
    return Interval(rational_to_dyadic(v, "down", p.precision),
                    rational_to_dyadic(v, "up", p.precision))


def _t_div(p, e, ops, s):
    return iv_div(ops[0].value, ops[1].value, p.precision)


def _t_sqrt(p, e, ops, s):
    return iv_sqrt(ops[0].value, p.precision)


def _t_div_refl(p, e, ops, s):
    return Interval(_ONE) if ops[0].value.lo.sign() > 0 else None


def _t_square(p, e, ops, s):
    j = iv_abs(ops[0].value)
    return iv_mul(j, j)


def _t_rnd_clip(p, e, ops, s):
    r = representable_clip(ops[0].value, e.fmt)
    return _ABSURD if r is EMPTY else r


def _t_err(on, kind, relative=False):
    def theorem(p, e, ops, s):
        fmt = _rounded_fmt(e)
        info = (kind, ops[0].value) if ops else None
        if relative:
            return rel_error_enclosure(fmt, info, on)
        return abs_error_enclosure(fmt, info, on)
    return theorem


def _t_err_exact(p, e, ops, s):
    fmt = _rounded_fmt(e)
    fix, flt = ops[0].value, ops[1].value
    if fix < fmt.min_exp:
        return None
    if fmt.kind == "float" and flt > fmt.precision:
        return None
    return Interval(_ZERO)


def _t_bnd_abs_refine(p, e, ops, s):
    j, k = ops[0].value, ops[1].value
    pos = iv_intersect(j, k)
    neg = iv_intersect(j, iv_neg(k))
    if pos is EMPTY and neg is EMPTY:
        return _ABSURD
    if pos is EMPTY:
        return neg
    if neg is EMPTY:
        return pos
    return iv_hull(pos, neg)


def _t_refine(side):
    def theorem(p, e, ops, s):
        j, u = ops[0].value, ops[1].value
        if side == "le":
            if j.lo > u:
                return _ABSURD
            return Interval(j.lo, min(j.hi, u))
        if j.hi < u:
            return _ABSURD
        return Interval(max(j.lo, u), j.hi)
    return theorem


def _t_compose(p, e, ops, s):
    return iv_rel_compose(ops[0].value, ops[1].value)


def _guards_hold(guards, facts) -> bool:
    for g, f in zip(guards, facts):
        j = f.value
        if g == "nz" and not j.lo.sign() > 0:
            return False
        if g == "ge0" and j.lo.sign() < 0:
            return False
        if g == "gt0" and not j.lo.sign() > 0:
            return False
    return True


def _t_rewrite(p, e, ops, s):
    if not _guards_hold(s.data["guards"], ops[1:]):
        return None
    return ops[0].value


def _t_abs_addsub(p, e, ops, s):
    j, k = ops[0].value, ops[1].value
    return iv_hull(iv_abs(iv_sub(j, k)), iv_add(j, k))


def _t_abs_div(p, e, ops, s):
    if ops[1].value.lo.sign() <= 0:
        return None
    return iv_div(ops[0].value, ops[1].value, p.precision)


def _t_fix_const(p, e, ops, s):
    v = e.value
    if v == 0 or v.denominator & (v.denominator - 1):
        return None
    return Dyadic.from_fraction(v).e


def _t_flt_const(p, e, ops, s):
    v = e.value
    if v == 0 or v.denominator & (v.denominator - 1):
        return None
    return Dyadic.from_fraction(v).bits()


def _t_fix_of_flt(p, e, ops, s):
    q, j = ops[0].value, ops[1].value
    if j.lo.sign() <= 0:
        return None
    return 1 + floor_log2(*j.lo.as_ratio()) - q


def _t_flt_of_fix(p, e, ops, s):
    f, j = ops[0].value, ops[1].value
    if j.hi.is_zero():
        return 1
    return max(1, floor_log2(*j.hi.as_ratio()) + 1 - f)


THEOREMS = {
    # BND
    "constant": _t_constant,
    "neg": lambda p, e, ops, s: iv_neg(ops[0].value),
    "abs": lambda p, e, ops, s: iv_abs(ops[0].value),
    "sqrt": _t_sqrt,
    "sub_refl": lambda p, e, ops, s: Interval(_ZERO),
    "div_refl": _t_div_refl,
    "square": _t_square,
    "add": lambda p, e, ops, s: iv_add(ops[0].value, ops[1].value),
    "sub": lambda p, e, ops, s: iv_sub(ops[0].value, ops[1].value),
    "mul": lambda p, e, ops, s: iv_mul(ops[0].value, ops[1].value),
    "div": _t_div,
    "fma": lambda p, e, ops, s: iv_add(iv_mul(ops[0].value, ops[1].value), ops[2].value),
    "compose": _t_compose,
    "rnd_bnd": lambda p, e, ops, s: round_interval(ops[0].value, e.fmt),
    "rnd_clip": _t_rnd_clip,
    "rel_round": lambda p, e, ops, s: round_interval(ops[0].value, e.fmt),
    "err_fix": _t_err("argument", None),
    "err_bnd_arg": _t_err("argument", "BND"),
    "err_bnd_res": _t_err("result", "BND"),
    "err_abs_arg": _t_err("argument", "ABS"),
    "err_abs_res": _t_err("result", "ABS"),
    "err_exact": _t_err_exact,
    "rel_err_abs": _t_err("argument", "BND"),
    "rel_err_rel": _t_err("argument", "BND", relative=True),
    "relerr_bnd_arg": _t_err("argument", "BND", relative=True),
    "relerr_bnd_res": _t_err("result", "BND", relative=True),
    "relerr_abs_arg": _t_err("argument", "ABS", relative=True),
    "relerr_abs_res": _t_err("result", "ABS", relative=True),
    "bnd_of_abs": lambda p, e, ops, s: Interval(-ops[0].value.hi, ops[0].value.hi),
    "bnd_abs_refine": _t_bnd_abs_refine,
    "abs_to_bnd": lambda p, e, ops, s: ops[0].value,
    "refine_le": _t_refine("le"),
    "refine_ge": _t_refine("ge"),
    "rewrite": _t_rewrite,
    "user": lambda p, e, ops, s: ops[0].value,
    # ABS
    "abs_of_bnd": lambda p, e, ops, s: iv_abs(ops[0].value),
    "abs_neg": lambda p, e, ops, s: ops[0].value,
    "abs_abs": lambda p, e, ops, s: ops[0].value,
    "abs_sqrt": _t_sqrt,
    "abs_add": _t_abs_addsub,
    "abs_sub": _t_abs_addsub,
    "abs_mul": lambda p, e, ops, s: iv_mul(ops[0].value, ops[1].value),
    "abs_div": _t_abs_div,
    # FIX / FLT
    "fix_const": _t_fix_const,
    "fix_rnd": lambda p, e, ops, s: e.fmt.min_exp,
    "fix_add": lambda p, e, ops, s: min(ops[0].value, ops[1].value),
    "fix_sub": lambda p, e, ops, s: min(ops[0].value, ops[1].value),
    "fix_mul": lambda p, e, ops, s: ops[0].value + ops[1].value,
    "fix_neg": lambda p, e, ops, s: ops[0].value,
    "fix_of_flt": _t_fix_of_flt,
    "flt_const": _t_flt_const,
    "flt_rnd": lambda p, e, ops, s: e.fmt.precision,
    "flt_mul": lambda p, e, ops, s: ops[0].value + ops[1].value,
    "flt_neg": lambda p, e, ops, s: ops[0].value,
    "flt_of_fix": _t_flt_of_fix,
}

# theorems whose absurd outcome gets a dedicated name in proofs
_ABSURD_NAMES = {"rnd_clip": "absurd_clip", "bnd_abs_refine": "absurd_abs",
                 "refine_le": "absurd", "refine_ge": "absurd"}


# -- saturation ----------------------------------------------------------------

@dataclass
class Outcome:
    status: str  # "proved", "unproved" or "budget"
    facts: Dict[tuple, Fact]
    witness: object = None
    proved: bool = False
    absurd: Optional[Fact] = None
    answers: Dict[Atom, Optional[Fact]] = field(default_factory=dict)
    iterations: int = 0
    applications: int = 0
    reason: str = ""

    def fact_for(self, atom: Atom) -> Optional[Fact]:
        return self.answers.get(atom)


def _outward(iv: Interval, precision: int) -> Interval:
    if iv.lo.bits() <= precision and iv.hi.bits() <= precision:
        return iv
    return Interval(rational_to_dyadic(iv.lo, "down", precision),
                    rational_to_dyadic(iv.hi, "up", precision))


def _significant(old: Interval, new: Interval) -> bool:
    if new.is_point():
        return True
    if old.lo.sign() != new.lo.sign() or old.hi.sign() != new.hi.sign():
        return True
    w = old.width()
    return (w - new.width()).shift(30) > w


class SequentProver:
    """Prove one sequent; the exploration graph is reused across runs."""

    def __init__(self, table: ExprTable, sequent: Sequent, config: Optional[Config] = None,
                 approx_hints: Iterable[Tuple[Expr, Expr]] = (),
                 user_rules: Iterable[Tuple[Expr, Expr, bool]] = ()):
        self.table = table
        self.sequent = sequent
        self.config = config or Config()
        self.precision = self.config.precision
        self.atoms = sequent.goal_atoms()
        self.bounds = {}
        for a in self.atoms:
            if a.kind != "query":
                self.bounds[a] = goal_interval(a, self.precision)
        self.has_query = any(a.kind == "query" for a in self.atoms)
        approximates = self._approximation_pairs(approx_hints)
        one_sided: Dict[int, set] = defaultdict(set)
        for h in sequent.hypotheses:
            if h.kind in ("le", "ge"):
                one_sided[h.expr.uid].add(h.kind.upper())
        self.graph = Graph(table, self.config, approximates, list(user_rules), one_sided)
        self.graph.explore([("BND", a.expr.uid) for a in self.atoms])
        self._prepare()

    def _approximation_pairs(self, hints) -> Dict[int, List[Expr]]:
        pairs: Dict[int, List[Expr]] = defaultdict(list)

        def add(a, x):
            if a is not x and x not in pairs[a.uid]:
                pairs[a.uid].append(x)

        for node in list(self.table.nodes):
            if node.op == "round":
                add(node, node.args[0])
        for h in self.sequent.hypotheses:
            e = h.expr
            if e.op == "div" and e.args[0].op == "sub" and e.args[0].args[1] is e.args[1]:
                e = e.args[0]
            if e.op == "sub":
                add(e.args[0], e.args[1])
        for a, x in hints:
            add(a, x)
        return pairs

    def _prepare(self):
        g = self.graph
        # leaves first: reverse of the backward exploration order
        self.position = {k: i for i, k in enumerate(reversed(g.order))}
        every = []
        for k in reversed(g.order):
            every.extend(g.schemas.get(k, ()))
        self.all_schemas = every
        self.serial = {id(s): i for i, s in enumerate(every)}

    # -- running ---------------------------------------------------------------
    def seeds(self, extra=()) -> List[Fact]:
        out = []
        for i, h in enumerate(self.sequent.hypotheses):
            if h.kind == "in":
                iv = Interval(rational_to_dyadic(h.lo, "down", self.precision),
                              rational_to_dyadic(h.hi, "up", self.precision))
                out.append(Fact("BND", h.expr, iv, "hyp", (), {"index": i}))
            elif h.kind == "le":
                out.append(Fact("LE", h.expr, rational_to_dyadic(h.hi, "up", self.precision),
                                "hyp", (), {"index": i}))
            elif h.kind == "ge":
                out.append(Fact("GE", h.expr, rational_to_dyadic(h.lo, "down", self.precision),
                                "hyp", (), {"index": i}))
        for expr, iv, params in extra:
            out.append(Fact("BND", expr, iv, "tile", (), dict(params)))
        return out

    def run(self, extra=(), targets: Optional[List[Atom]] = None) -> Outcome:
        """Saturate with the hypotheses plus ``extra`` tile enclosures.

        ``targets`` restricts the early-exit test to some goal atoms.
        """
        self.absurd = None
        db: Dict[tuple, Fact] = {}
        changed: set = set()
        for f in self.seeds(extra):
            self._insert(db, f, changed)
        pending = self.all_schemas
        apps = 0
        iterations = 0
        status = None
        while self.absurd is None:
            if iterations >= self.config.max_iterations:
                status = "budget"
                break
            iterations += 1
            changed = set()
            for s in pending:
                apps += 1
                if apps > self.config.max_applications:
                    status = "budget"
                    break
                f = self._apply(s, db)
                if f is not None:
                    self._insert(db, f, changed)
                    if self.absurd is not None:
                        break
            if status or self.absurd is not None:
                break
            if not self.has_query and self._done(db, targets):
                break
            if not changed:
                break
            pending = self._consumers(changed)
        return self._outcome(db, status, iterations, apps)

    def _consumers(self, changed) -> List[Schema]:
        seen = set()
        out = []
        for k in changed:
            for s in self.graph.consumers.get(k, ()):
                if id(s) not in seen and id(s) in self.serial:
                    seen.add(id(s))
                    out.append(s)
        out.sort(key=lambda s: self.serial[id(s)])
        return out

    def _apply(self, s: Schema, db) -> Optional[Fact]:
        ops = []
        for k in s.operands:
            f = db.get(k)
            if f is None:
                return None
            ops.append(f)
        e = self.table.nodes[s.target[1]]
        try:
            value = THEOREMS[s.theorem](self, e, ops, s)
        except (DomainError, Undefined):
            return None
        if value is None:
            return None
        params = {}
        if s.theorem == "rewrite":
            params = {"rule": s.data["rule"], "env": s.data["env"]}
        elif s.theorem == "user":
            params = {"index": s.data["index"]}
        if value is _ABSURD:
            return Fact("FALSE", e, None, _ABSURD_NAMES[s.theorem], ops, params)
        if isinstance(value, Interval):
            value = _outward(value, self.precision)
        return Fact(s.target[0], e, value, s.theorem, ops, params)

    def _insert(self, db, fact: Fact, changed: set):
        if fact.kind == "FALSE":
            self.absurd = fact
            return
        key = fact.key
        old = db.get(key)
        if old is None:
            db[key] = fact
            changed.add(key)
            return
        kind = fact.kind
        if kind in ("BND", "ABS"):
            o, n = old.value, fact.value
            if iv_subset(o, n):
                return
            if iv_subset(n, o):
                stored = fact
            else:
                inter = iv_intersect(o, n)
                if inter is EMPTY:
                    self.absurd = Fact("FALSE", fact.expr, None, "absurd", (old, fact))
                    return
                stored = Fact(kind, fact.expr, inter, "intersect", (old, fact))
            db[key] = stored
            if _significant(o, stored.value):
                changed.add(key)
        elif kind == "LE":
            if fact.value < old.value:
                db[key] = fact
                changed.add(key)
            if ("GE", key[1]) in db and db[("GE", key[1])].value > db[key].value:
                self.absurd = Fact("FALSE", fact.expr, None, "absurd",
                                   (db[("GE", key[1])], db[key]))
        elif kind == "GE":
            if fact.value > old.value:
                db[key] = fact
                changed.add(key)
        elif kind == "FIX":
            if fact.value > old.value:
                db[key] = fact
                changed.add(key)
        elif kind == "FLT":
            if fact.value < old.value:
                db[key] = fact
                changed.add(key)

    def _prove_atom(self, db):
        def prove(atom: Atom):
            f = db.get(("BND", atom.expr.uid))
            if atom.kind == "query":
                return f
            return f if satisfies(f, self.bounds[atom]) else None
        return prove

    def _done(self, db, targets) -> bool:
        if targets is not None:
            prove = self._prove_atom(db)
            return all(prove(a) is not None for a in targets)
        ok, _ = select_disjunct(self.sequent.goal, self._prove_atom(db))
        return ok

    def _outcome(self, db, status, iterations, apps) -> Outcome:
        answers = {a: db.get(("BND", a.expr.uid)) for a in self.atoms}
        if self.absurd is not None:
            return Outcome("proved", db, ("absurd", self.absurd), True, self.absurd, answers,
                           iterations, apps, "the hypotheses are contradictory")
        ok, witness = select_disjunct(self.sequent.goal, self._prove_atom(db))
        if ok:
            return Outcome("proved", db, witness, True, None, answers, iterations, apps)
        reason = "budget exhausted" if status == "budget" else "no proof found"
        if self.graph.truncated:
            reason += " (exploration truncated)"
        return Outcome(status or "unproved", db, witness, False, None, answers,
                       iterations, apps, reason)
