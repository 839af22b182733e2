"""Proof certificates: data model, text format, emission and widening.

A certificate is a line-oriented text file::

    roundbound-certificate 1
    script-sha256 <hex>
    expr <id> <op> <args...>          one node per line, children first
    alias <expr id> <name>
    identity <n> <lhs id> <rhs id> ring|assumed-equality
    sequent <n>
    hyp <n> in|le|ge <expr id> <lo> <hi>      rational bounds, "-" when open
    goal <n> in|le|ge <expr id> <lo> <hi>
    goal <n> query <expr id> <lo> <hi>        dyadic answer, "- -" if none
    tree <s-expression over goal numbers>
    lemma <id> <theorem> <KIND> <subject id> <value...> [key=value...]
    witness <goal n> <lemma id>  |  absurd <lemma id>
    split <axis expr id> / tile <lo> <hi> ... end-tile / end-split
    end-sequent

Dyadic numbers are written ``<mantissa>b<exponent>``.  Lemma operands go
in ``ops=1,2``; they must name earlier lemmas of the same block or of an
enclosing block.
"""

from __future__ import annotations

import copy
import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .dyadic import Dyadic
from .interval import Interval
from .logic import And, Atom, Or

__all__ = [
    "Lemma",
    "Block",
    "Split",
    "SequentCert",
    "Certificate",
    "CertificateSyntaxError",
    "serialize",
    "parse_certificate",
    "emit",
    "widen",
    "script_hash",
    "format_dyadic",
    "parse_dyadic",
]

VERSION = 1


class CertificateSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class Lemma:
    id: int
    theorem: str
    kind: str  # BND ABS FIX FLT LE GE FALSE
    subject: int
    value: object  # Interval, int, Dyadic or None
    ops: List[int] = field(default_factory=list)
    params: Dict[str, str] = field(default_factory=dict)


@dataclass
class Split:
    axis: int
    tiles: List[Tuple[Interval, "Block"]] = field(default_factory=list)


@dataclass
class Block:
    lemmas: List[Lemma] = field(default_factory=list)
    witnesses: List[Tuple[int, int]] = field(default_factory=list)
    absurd: Optional[int] = None
    split: Optional[Split] = None

    def all_lemmas(self):
        yield from self.lemmas
        if self.split:
            for _, b in self.split.tiles:
                yield from b.all_lemmas()


@dataclass
class SequentCert:
    hyps: List[Tuple[str, int, Optional[Fraction], Optional[Fraction]]]
    goals: List[Tuple[str, int, object, object]]
    tree: object  # goal index, ("and"|"or", l, r) or "false"
    proof: Block


@dataclass
class Certificate:
    script_sha256: str
    exprs: List[Tuple[str, Tuple[int, ...], str]]  # (op, children, payload)
    aliases: Dict[int, str] = field(default_factory=dict)
    identities: List[Tuple[int, int, int, str]] = field(default_factory=list)
    sequents: List[SequentCert] = field(default_factory=list)
    version: int = VERSION

    def lemmas(self):
        for s in self.sequents:
            yield from s.proof.all_lemmas()

    def endpoint_bits(self) -> int:
        total = 0
        for lem in self.lemmas():
            if isinstance(lem.value, Interval):
                total += lem.value.lo.bits() + lem.value.hi.bits()
        return total


def script_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# -- tokens ------------------------------------------------------------------

def format_dyadic(d: Dyadic) -> str:
    return f"{d.m}b{d.e}"


_DYADIC_RE = re.compile(r"^([+-]?\d+)b([+-]?\d+)$")
_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


def parse_dyadic(tok: str, line: int = 0) -> Dyadic:
    m = _DYADIC_RE.match(tok)
    if not m:
        raise CertificateSyntaxError(f"bad dyadic number {tok!r}", line)
    return Dyadic(int(m.group(1)), int(m.group(2)))


def _fmt_rational(x: Optional[Fraction]) -> str:
    if x is None:
        return "-"
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_rational(tok: str, line: int) -> Optional[Fraction]:
    if tok == "-":
        return None
    m = _RATIONAL_RE.match(tok)
    if not m or m.group(2) == "0":
        raise CertificateSyntaxError(f"bad rational number {tok!r}", line)
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def _int(tok: str, line: int, what: str = "integer") -> int:
    try:
        return int(tok)
    except ValueError:
        raise CertificateSyntaxError(f"expected {what}, got {tok!r}", line) from None


def _tree_text(t) -> str:
    if t == "false":
        return "false"
    if isinstance(t, int):
        return str(t)
    return f"({t[0]} {_tree_text(t[1])} {_tree_text(t[2])})"


def _parse_tree(text: str, line: int):
    toks = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def rec():
        nonlocal pos
        if pos >= len(toks):
            raise CertificateSyntaxError("truncated goal tree", line)
        t = toks[pos]
        pos += 1
        if t == "(":
            op = toks[pos] if pos < len(toks) else ""
            pos += 1
            if op not in ("and", "or"):
                raise CertificateSyntaxError(f"bad connective {op!r} in goal tree", line)
            left, right = rec(), rec()
            if pos >= len(toks) or toks[pos] != ")":
                raise CertificateSyntaxError("unbalanced goal tree", line)
            pos += 1
            return (op, left, right)
        if t == "false":
            return "false"
        return _int(t, line, "goal number")

    tree = rec()
    if pos != len(toks):
        raise CertificateSyntaxError("trailing tokens in goal tree", line)
    return tree


# -- serialization ---------------------------------------------------------------

def _value_text(kind, v) -> str:
    if kind in ("BND", "ABS"):
        return f"{format_dyadic(v.lo)} {format_dyadic(v.hi)}"
    if kind in ("FIX", "FLT"):
        return str(v)
    if kind in ("LE", "GE"):
        return format_dyadic(v)
    return "-"


def _lemma_text(lem: Lemma) -> str:
    parts = ["lemma", str(lem.id), lem.theorem, lem.kind, str(lem.subject),
             _value_text(lem.kind, lem.value)]
    if lem.ops:
        parts.append("ops=" + ",".join(map(str, lem.ops)))
    for k, v in lem.params.items():
        parts.append(f"{k}={v}")
    return " ".join(parts)


def _block_lines(b: Block, out: List[str]):
    for lem in b.lemmas:
        out.append(_lemma_text(lem))
    for atom, lem in b.witnesses:
        out.append(f"witness {atom} {lem}")
    if b.absurd is not None:
        out.append(f"absurd {b.absurd}")
    if b.split is not None:
        out.append(f"split {b.split.axis}")
        for iv, sub in b.split.tiles:
            out.append(f"tile {format_dyadic(iv.lo)} {format_dyadic(iv.hi)}")
            _block_lines(sub, out)
            out.append("end-tile")
        out.append("end-split")


def serialize(cert: Certificate) -> str:
    out = [f"roundbound-certificate {cert.version}", f"script-sha256 {cert.script_sha256}"]
    for i, (op, args, payload) in enumerate(cert.exprs):
        fields = [f"expr {i} {op}"]
        if payload:
            fields.append(payload)
        fields.extend(map(str, args))
        out.append(" ".join(fields))
    for i, name in sorted(cert.aliases.items()):
        out.append(f"alias {i} {name}")
    for n, lhs, rhs, status in cert.identities:
        out.append(f"identity {n} {lhs} {rhs} {status}")
    for n, s in enumerate(cert.sequents):
        out.append(f"sequent {n}")
        for i, (kind, e, lo, hi) in enumerate(s.hyps):
            out.append(f"hyp {i} {kind} {e} {_fmt_rational(lo)} {_fmt_rational(hi)}")
        for i, (kind, e, lo, hi) in enumerate(s.goals):
            if kind == "query":
                lo_t = format_dyadic(lo) if lo is not None else "-"
                hi_t = format_dyadic(hi) if hi is not None else "-"
            else:
                lo_t, hi_t = _fmt_rational(lo), _fmt_rational(hi)
            out.append(f"goal {i} {kind} {e} {lo_t} {hi_t}")
        out.append(f"tree {_tree_text(s.tree)}")
        _block_lines(s.proof, out)
        out.append("end-sequent")
    return "\n".join(out) + "\n"


# -- parsing ---------------------------------------------------------------------

_KINDS = {"BND": 2, "ABS": 2, "FIX": 1, "FLT": 1, "LE": 1, "GE": 1, "FALSE": 1}


def _parse_lemma(toks: List[str], line: int) -> Lemma:
    if len(toks) < 6:
        raise CertificateSyntaxError("truncated lemma", line)
    lid = _int(toks[1], line, "lemma id")
    theorem, kind = toks[2], toks[3]
    if kind not in _KINDS:
        raise CertificateSyntaxError(f"unknown predicate {kind!r}", line)
    subject = _int(toks[4], line, "expression id")
    n = _KINDS[kind]
    vals = toks[5:5 + n]
    if len(vals) < n:
        raise CertificateSyntaxError("truncated lemma value", line)
    if kind in ("BND", "ABS"):
        lo, hi = parse_dyadic(vals[0], line), parse_dyadic(vals[1], line)
        if hi < lo:
            raise CertificateSyntaxError("inverted interval", line)
        value: object = Interval(lo, hi)
    elif kind in ("FIX", "FLT"):
        value = _int(vals[0], line)
    elif kind in ("LE", "GE"):
        value = parse_dyadic(vals[0], line)
    else:
        if vals[0] != "-":
            raise CertificateSyntaxError("FALSE lemmas carry no value", line)
        value = None
    ops: List[int] = []
    params: Dict[str, str] = {}
    for tok in toks[5 + n:]:
        if "=" not in tok:
            raise CertificateSyntaxError(f"unexpected token {tok!r}", line)
        k, v = tok.split("=", 1)
        if k == "ops":
            ops = [_int(x, line, "lemma id") for x in v.split(",") if x]
        else:
            params[k] = v
    return Lemma(lid, theorem, kind, subject, value, ops, params)


def parse_certificate(text: str) -> Certificate:
    """Parse the text format; raise :class:`CertificateSyntaxError` when malformed."""
    lines = text.splitlines()
    if not lines or lines[0].split()[:1] != ["roundbound-certificate"]:
        raise CertificateSyntaxError("missing certificate header", 1)
    head = lines[0].split()
    if len(head) != 2 or head[1] != str(VERSION):
        raise CertificateSyntaxError("unsupported certificate version", 1)
    cert = Certificate("", [])
    seq: Optional[SequentCert] = None
    stack: List[Block] = []
    splits: List[Split] = []
    for no, raw in enumerate(lines[1:], start=2):
        toks = raw.split()
        if not toks:
            continue
        word = toks[0]
        if word == "script-sha256" and len(toks) == 2:
            cert.script_sha256 = toks[1]
        elif word == "expr":
            if seq is not None or len(toks) < 3:
                raise CertificateSyntaxError("misplaced or truncated expression", no)
            if _int(toks[1], no) != len(cert.exprs):
                raise CertificateSyntaxError("expression ids must be consecutive", no)
            op = toks[2]
            if op in ("var", "const"):
                if len(toks) != 4:
                    raise CertificateSyntaxError(f"{op} takes one payload", no)
                cert.exprs.append((op, (), toks[3]))
            elif op == "round":
                if len(toks) != 5:
                    raise CertificateSyntaxError("round takes a format and one child", no)
                cert.exprs.append((op, (_int(toks[4], no),), toks[3]))
            else:
                cert.exprs.append((op, tuple(_int(t, no) for t in toks[3:]), ""))
        elif word == "alias" and len(toks) == 3:
            cert.aliases[_int(toks[1], no)] = toks[2]
        elif word == "identity" and len(toks) == 5:
            if toks[4] not in ("ring", "assumed-equality"):
                raise CertificateSyntaxError("identity status must be ring or assumed-equality",
                                             no)
            cert.identities.append((_int(toks[1], no), _int(toks[2], no), _int(toks[3], no),
                                    toks[4]))
        elif word == "sequent":
            if seq is not None:
                raise CertificateSyntaxError("nested sequent", no)
            seq = SequentCert([], [], None, Block())
            stack = [seq.proof]
        elif seq is None:
            raise CertificateSyntaxError(f"unexpected {word!r} outside a sequent", no)
        elif word == "hyp" and len(toks) == 6:
            if toks[2] not in ("in", "le", "ge"):
                raise CertificateSyntaxError("bad hypothesis kind", no)
            seq.hyps.append((toks[2], _int(toks[3], no), _parse_rational(toks[4], no),
                             _parse_rational(toks[5], no)))
        elif word == "goal" and len(toks) == 6:
            kind = toks[2]
            if kind == "query":
                lo = None if toks[4] == "-" else parse_dyadic(toks[4], no)
                hi = None if toks[5] == "-" else parse_dyadic(toks[5], no)
            elif kind in ("in", "le", "ge"):
                lo, hi = _parse_rational(toks[4], no), _parse_rational(toks[5], no)
            else:
                raise CertificateSyntaxError("bad goal kind", no)
            seq.goals.append((kind, _int(toks[3], no), lo, hi))
        elif word == "tree":
            seq.tree = _parse_tree(raw.split(None, 1)[1] if len(toks) > 1 else "", no)
        elif word == "lemma":
            if not stack:
                raise CertificateSyntaxError("lemma outside a proof block", no)
            stack[-1].lemmas.append(_parse_lemma(toks, no))
        elif word == "witness" and len(toks) == 3:
            stack[-1].witnesses.append((_int(toks[1], no), _int(toks[2], no)))
        elif word == "absurd" and len(toks) == 2:
            stack[-1].absurd = _int(toks[1], no)
        elif word == "split" and len(toks) == 2:
            if stack[-1].split is not None:
                raise CertificateSyntaxError("a block has at most one split", no)
            sp = Split(_int(toks[1], no))
            stack[-1].split = sp
            splits.append(sp)
        elif word == "tile" and len(toks) == 3:
            if not splits or len(splits) != len(stack):
                raise CertificateSyntaxError("tile outside a split", no)
            lo, hi = parse_dyadic(toks[1], no), parse_dyadic(toks[2], no)
            if hi < lo:
                raise CertificateSyntaxError("inverted tile", no)
            b = Block()
            splits[-1].tiles.append((Interval(lo, hi), b))
            stack.append(b)
        elif word == "end-tile":
            if len(stack) < 2:
                raise CertificateSyntaxError("unmatched end-tile", no)
            stack.pop()
        elif word == "end-split":
            if not splits or len(splits) != len(stack):
                raise CertificateSyntaxError("unmatched end-split", no)
            if not splits[-1].tiles:
                raise CertificateSyntaxError("split without tiles", no)
            splits.pop()
        elif word == "end-sequent":
            if len(stack) != 1 or splits:
                raise CertificateSyntaxError("unterminated split", no)
            if seq.tree is None:
                raise CertificateSyntaxError("sequent without goal tree", no)
            cert.sequents.append(seq)
            seq = None
            stack = []
        else:
            raise CertificateSyntaxError(f"unrecognized line {raw.strip()!r}", no)
    if seq is not None:
        raise CertificateSyntaxError("unterminated sequent", len(lines))
    return cert


# -- emission ----------------------------------------------------------------------

def _format_payload(fmt) -> str:
    from .formats import RelOp
    if isinstance(fmt, RelOp):
        tail = "" if fmt.min_exp is None else f",{fmt.min_exp}"
        return f"{fmt.kind}_rel<{fmt.precision}{tail}>"
    if fmt.kind == "fixed":
        return f"fixed<{fmt.min_exp},{fmt.direction}>"
    return f"float<{fmt.precision},{fmt.min_exp},{fmt.direction}>"


class _Emitter:
    def __init__(self, table, aliases):
        self.table = table
        self.aliases = aliases
        self.used: set = set()
        self.next_id = 1
        self.lemma_params = []

    def use(self, e) -> int:
        for n in e.walk():
            self.used.add(n.uid)
        return e.uid

    def finalize_exprs(self, cert: Certificate, blocks_lemmas):
        order = sorted(self.used)
        index = {uid: i for i, uid in enumerate(order)}
        for uid in order:
            n = self.table.nodes[uid]
            if n.op == "var":
                cert.exprs.append(("var", (), n.name))
            elif n.op == "const":
                cert.exprs.append(("const", (), _fmt_rational(n.value)))
            elif n.op == "round":
                cert.exprs.append(("round", (index[n.args[0].uid],), _format_payload(n.fmt)))
            else:
                cert.exprs.append((n.op, tuple(index[a.uid] for a in n.args), ""))
            name = self.table.alias_of(n)
            if name:
                cert.aliases[index[uid]] = name
        return index

    def leaf_block(self, outcome, goal, atoms) -> Block:
        block = Block()
        roots = []
        chosen = []
        if outcome.absurd is not None:
            roots.append(outcome.absurd)
        else:
            for atom, fact in _chosen(goal, outcome.witness):
                chosen.append((atoms.index(atom), fact))
                roots.append(fact)
        facts = _reachable(roots)
        ids = {}
        for f in facts:
            lid = self.next_id
            self.next_id += 1
            ids[f.serial] = lid
            self.use(f.expr)
            params = {}
            if f.theorem == "hyp":
                params["hyp"] = str(f.params["index"])
            elif f.theorem == "rewrite":
                params["rule"] = f.params["rule"]
                env = []
                for k, uid in sorted(f.params["env"].items()):
                    self.use(self.table.nodes[uid])
                    env.append((k, uid))
                params["env"] = env
            elif f.theorem == "user":
                params["identity"] = str(f.params["index"])
            block.lemmas.append(Lemma(lid, f.theorem, f.kind, f.expr.uid, f.value,
                                      [ids[o.serial] for o in f.operands], params))
        if outcome.absurd is not None:
            block.absurd = ids[outcome.absurd.serial]
        else:
            block.witnesses = [(i, ids[f.serial]) for i, f in chosen]
        return block

    def tree_block(self, tree, goal, atoms) -> Block:
        if tree.kind == "leaf":
            return self.leaf_block(tree.outcome, goal, atoms)
        self.use(tree.axis)
        sp = Split(tree.axis.uid)
        for iv, sub in tree.tiles:
            sp.tiles.append((iv, self.tree_block(sub, goal, atoms)))
        return Block(split=sp)


def _chosen(goal, witness):
    """``(atom, fact)`` pairs used by a successful goal witness."""
    if isinstance(goal, Atom):
        yield goal, witness
    elif isinstance(goal, And):
        yield from _chosen(goal.left, witness[1])
        yield from _chosen(goal.right, witness[2])
    elif isinstance(goal, Or):
        _, idx, child = witness
        yield from _chosen(goal.left if idx == 0 else goal.right, child)


def _reachable(roots):
    seen = {}
    stack = list(roots)
    while stack:
        f = stack.pop()
        if f.serial in seen:
            continue
        seen[f.serial] = f
        stack.extend(f.operands)
    return [seen[k] for k in sorted(seen)]


def _goal_tree(goal, atoms):
    if isinstance(goal, Atom):
        return atoms.index(goal)
    if isinstance(goal, And):
        return ("and", _goal_tree(goal.left, atoms), _goal_tree(goal.right, atoms))
    if isinstance(goal, Or):
        return ("or", _goal_tree(goal.left, atoms), _goal_tree(goal.right, atoms))
    return "false"


def emit(table, results, source_text: str = "", user_rules=()) -> Certificate:
    """Build a certificate from proved sequents.

    ``results`` is a list of ``(sequent, proof_tree)`` pairs; ``user_rules``
    lists ``(lhs, rhs, ring_verified)`` triples in hint order.
    """
    em = _Emitter(table, table.aliases)
    cert = Certificate(script_hash(source_text), [])
    raw = []
    for sequent, tree in results:
        atoms = sequent.goal_atoms()
        hyps = []
        for h in sequent.hypotheses:
            em.use(h.expr)
            hyps.append((h.kind, h.expr.uid, h.lo, h.hi))
        goals = []
        for a in atoms:
            em.use(a.expr)
            if a.kind == "query":
                ans = tree.answer(a)
                goals.append(("query", a.expr.uid, ans.lo if ans else None,
                              ans.hi if ans else None))
            else:
                goals.append((a.kind, a.expr.uid, a.lo, a.hi))
        raw.append(SequentCert(hyps, goals, _goal_tree(sequent.goal, atoms),
                               em.tree_block(tree, sequent.goal, atoms)))
    for lhs, rhs, _ in user_rules:
        em.use(lhs)
        em.use(rhs)
    index = em.finalize_exprs(cert, raw)
    for n, (lhs, rhs, verified) in enumerate(user_rules):
        cert.identities.append((n, index[lhs.uid], index[rhs.uid],
                                "ring" if verified else "assumed-equality"))
    for s in raw:
        s.hyps = [(k, index[e], lo, hi) for k, e, lo, hi in s.hyps]
        s.goals = [(k, index[e], lo, hi) for k, e, lo, hi in s.goals]
        _renumber(s.proof, index)
        cert.sequents.append(s)
    return cert


def _renumber(block: Block, index):
    for lem in block.lemmas:
        lem.subject = index[lem.subject]
        env = lem.params.get("env")
        if isinstance(env, list):
            lem.params["env"] = ",".join(f"{k}:{index[uid]}" for k, uid in env)
    if block.split:
        block.split.axis = index[block.split.axis]
        for _, b in block.split.tiles:
            _renumber(b, index)


# -- widening --------------------------------------------------------------------

def _coarsened(x: Dyadic, k: int, side: str) -> Dyadic:
    if k <= x.e:
        return x
    q, r = divmod(x.m, 1 << (k - x.e))
    if side == "hi" and r:
        q += 1
    return Dyadic(q, k)


def widen(cert: Certificate) -> Certificate:
    """Loosen lemma intervals to short dyadics while every check still passes.

    Lemmas are visited from the last to the first, so that a lemma is
    widened only after everything that consumes it.  Each endpoint moves
    outward to the coarsest multiple of a power of two that keeps the
    lemma, its consumers and any goal witnesses valid.
    """
    from .checker import Checker

    cert = copy.deepcopy(cert)
    ck = Checker(cert)
    ck.structure()

    def ok(lid: int) -> bool:
        if ck.lemma_error(lid) is not None:
            return False
        for use in ck.consumers.get(lid, ()):
            if use[0] == "lemma":
                if ck.lemma_error(use[1]) is not None:
                    return False
            elif ck.witness_error(use[1], use[2], lid) is not None:
                return False
        return True

    for lid in sorted(ck.lemmas, reverse=True):
        lem = ck.lemmas[lid]
        if lem.kind not in ("BND", "ABS") or not ok(lid):
            continue
        for side in ("lo", "hi"):
            iv = lem.value
            x = getattr(iv, side)
            if x.is_zero():
                continue
            lo_k, hi_k = x.e + 1, x.e + abs(x.m).bit_length()
            best = None
            while lo_k <= hi_k:
                k = (lo_k + hi_k) // 2
                y = _coarsened(x, k, side)
                lem.value = Interval(y, iv.hi) if side == "lo" else Interval(iv.lo, y)
                if y.bits() <= x.bits() and ok(lid):
                    best = lem.value
                    lo_k = k + 1
                else:
                    hi_k = k - 1
            lem.value = best if best is not None else iv
    return cert
