"""Sub-paving hints: even splits, user cut points and goal-driven dichotomy.

A proof under bisection is a tree.  Inner nodes split the range of one
axis expression into tiles that together cover it; leaves are ordinary
saturation runs with the tile ranges added as hypotheses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Dict, List, Optional, Tuple

from .dyadic import Dyadic, floor_log2, rational_to_dyadic
from .engine import Outcome, SequentProver, satisfies
from .expr import Expr
from .interval import Interval, iv_hull, iv_intersect
from .logic import Atom
from .parser import BisectHint

__all__ = ["ProofTree", "BisectError", "shortest_dyadic", "even_cuts", "dichotomy_cut",
           "solve"]


class BisectError(ValueError):
    pass


@dataclass
class ProofTree:
    kind: str  # "leaf" or "split"
    box: Dict[int, Tuple[Expr, Interval]]
    outcome: Optional[Outcome] = None
    axis: Optional[Expr] = None
    tiles: List[Tuple[Interval, "ProofTree"]] = field(default_factory=list)

    @property
    def proved(self) -> bool:
        if self.kind == "leaf":
            return self.outcome.proved
        return all(t.proved for _, t in self.tiles)

    def leaves(self):
        if self.kind == "leaf":
            yield self
        else:
            for _, t in self.tiles:
                yield from t.leaves()

    def answer(self, atom: Atom) -> Optional[Interval]:
        """Hull of the per-tile enclosures of a goal expression."""
        out = None
        for leaf in self.leaves():
            if leaf.outcome.absurd is not None:
                continue
            f = leaf.outcome.answers.get(atom)
            if f is None:
                return None
            out = f.value if out is None else iv_hull(out, f.value)
        return out

    def failing_tiles(self):
        return [leaf for leaf in self.leaves() if not leaf.outcome.proved]


# -- cut points ------------------------------------------------------------------

def shortest_dyadic(a: Fraction, b: Fraction) -> Dyadic:
    """A dyadic in ``[a, b]`` with the coarsest possible power of two."""
    a, b = Fraction(a), Fraction(b)
    if a > b:
        raise ValueError("empty range")
    if a == b and a.denominator & (a.denominator - 1):
        raise ValueError(f"no dyadic equals {a}")
    if a <= 0 <= b:
        return Dyadic(0)
    if b < 0:
        return -shortest_dyadic(-b, -a)
    k = floor_log2(b.numerator, b.denominator)
    while True:
        scale = Fraction(2) ** k
        m = ceil(a / scale)
        if m * scale <= b:
            return Dyadic(m, k) if k < 0 else Dyadic(m << k)
        k -= 1


def even_cuts(iv: Interval, n: int) -> List[Dyadic]:
    lo, hi = iv.lo.to_fraction(), iv.hi.to_fraction()
    step = (hi - lo) / n
    cuts = []
    for i in range(1, n):
        c = lo + i * step
        cuts.append(shortest_dyadic(c - step / 4, c + step / 4))
    return cuts


def dichotomy_cut(iv: Interval) -> Dyadic:
    lo, hi = iv.lo.to_fraction(), iv.hi.to_fraction()
    w = hi - lo
    return shortest_dyadic(lo + w / 4, hi - w / 4)


def tiles_from_cuts(iv: Interval, cuts: List[Dyadic]) -> List[Interval]:
    points = [iv.lo] + sorted(c for c in cuts if iv.lo < c < iv.hi) + [iv.hi]
    out = []
    for a, b in zip(points, points[1:]):
        if a < b:
            out.append(Interval(a, b))
    return out or [iv]


def point_tiles(iv: Interval, points: List[Fraction], precision: int,
                warnings: List[str], name: str) -> List[Interval]:
    lo, hi = iv.lo.to_fraction(), iv.hi.to_fraction()
    inside = []
    for p in sorted(set(points)):
        if lo < p < hi:
            inside.append(p)
        else:
            warnings.append(f"split point {p} is outside the range of {name}; ignored")
    tiles = []
    left = iv.lo
    for p in inside:
        up = rational_to_dyadic(p, "up", precision)
        tiles.append(Interval(left, up))
        left = rational_to_dyadic(p, "down", precision)
    tiles.append(Interval(left, iv.hi))
    return tiles


# -- solving -----------------------------------------------------------------

class _Solver:
    def __init__(self, prover: SequentProver, hints: List[BisectHint], warnings: List[str]):
        self.prover = prover
        self.hints = hints
        self.warnings = warnings
        self.config = prover.config
        self.has_query = prover.has_query
        self.ranges: Dict[int, Interval] = {}
        self.names = {}
        for h in hints:
            for e, _, _ in h.axes:
                self.ranges[e.uid] = self._hypothesis_range(e)

    def _hypothesis_range(self, e: Expr) -> Interval:
        p = self.config.precision
        out = None
        for h in self.prover.sequent.hypotheses:
            if h.kind == "in" and h.expr is e:
                iv = Interval(rational_to_dyadic(h.lo, "down", p), rational_to_dyadic(h.hi, "up", p))
                out = iv if out is None else iv_intersect(out, iv)
        if out is None or not out:
            raise BisectError(f"cannot split {self.prover.table.alias_of(e) or e}: "
                              f"it has no enclosure among the hypotheses")
        return out

    def run(self, box) -> Outcome:
        extra = [(e, iv, {"axis": e.uid}) for e, iv in box.values()]
        return self.prover.run(extra)

    def solve(self, box, index: int) -> ProofTree:
        if index >= len(self.hints):
            return ProofTree("leaf", dict(box), self.run(box))
        if not self.has_query:
            o = self.run(box)
            if o.proved:
                return ProofTree("leaf", dict(box), o)
        return self.apply_hint(box, index)

    def _range(self, box, e: Expr) -> Interval:
        if e.uid in box:
            return box[e.uid][1]
        return self.ranges[e.uid]

    def apply_hint(self, box, index: int) -> ProofTree:
        hint = self.hints[index]
        fixed = [(e, m, p) for e, m, p in hint.axes if m != "dichotomy"]
        dich = [e for e, m, _ in hint.axes if m == "dichotomy"]
        targets = [a for a in self.prover.atoms
                   if a.kind != "query" and any(a.expr is t for t in hint.targets)]
        return self._fixed(box, fixed, dich, targets, index)

    def _fixed(self, box, fixed, dich, targets, index) -> ProofTree:
        if not fixed:
            if dich:
                return self._dichotomy(box, dich, targets, index, {})
            return self.solve(box, index + 1) if self.has_query else self._finish(box, index)
        (e, mode, param), rest = fixed[0], fixed[1:]
        iv = self._range(box, e)
        name = self.prover.table.alias_of(e) or str(e)
        if mode == "even":
            tiles = tiles_from_cuts(iv, even_cuts(iv, param))
        else:
            tiles = point_tiles(iv, param, self.config.precision, self.warnings, name)
        node = ProofTree("split", dict(box), axis=e)
        for t in tiles:
            sub = dict(box)
            sub[e.uid] = (e, t)
            node.tiles.append((t, self._fixed(sub, rest, dich, targets, index)))
        return node

    def _finish(self, box, index) -> ProofTree:
        o = self.run(box)
        if o.proved or index + 1 >= len(self.hints):
            return ProofTree("leaf", dict(box), o)
        return self.apply_hint(box, index + 1)

    def _dichotomy(self, box, axes, targets, index, depth) -> ProofTree:
        o = self.prover.run([(e, iv, {"axis": e.uid}) for e, iv in box.values()],
                            targets=targets or None)
        if targets:
            done = all(satisfied(o, a, self.prover) for a in targets) or o.absurd is not None
        else:
            done = o.proved
        if done:
            full = self.run(box) if targets else o
            if full.proved or index + 1 >= len(self.hints):
                return ProofTree("leaf", dict(box), full)
            return self.apply_hint(box, index + 1)
        # split the widest axis, relative to its original range
        best, best_ratio = None, None
        for e in axes:
            if depth.get(e.uid, 0) >= self.config.dichotomy_depth:
                continue
            iv = self._range(box, e)
            full_w = self.ranges[e.uid].width().to_fraction()
            w = iv.width().to_fraction()
            if w == 0:
                continue
            ratio = w / full_w if full_w else Fraction(0)
            if best_ratio is None or ratio > best_ratio:
                best, best_ratio = e, ratio
        if best is None:
            return ProofTree("leaf", dict(box), self.run(box) if targets else o)
        iv = self._range(box, best)
        cut = dichotomy_cut(iv)
        node = ProofTree("split", dict(box), axis=best)
        for t in (Interval(iv.lo, cut), Interval(cut, iv.hi)):
            sub = dict(box)
            sub[best.uid] = (best, t)
            d = dict(depth)
            d[best.uid] = d.get(best.uid, 0) + 1
            node.tiles.append((t, self._dichotomy(sub, axes, targets, index, d)))
        return node


def satisfied(o: Outcome, atom: Atom, prover: SequentProver) -> bool:
    return satisfies(o.answers.get(atom), prover.bounds[atom])


def solve(prover: SequentProver, hints: List[BisectHint],
          warnings: Optional[List[str]] = None) -> ProofTree:
    """Prove the prover's sequent, splitting ranges as the hints direct."""
    warnings = [] if warnings is None else warnings
    usable = []
    for h in hints:
        ok = True
        for e, _, _ in h.axes:
            if not any(a.kind == "in" and a.expr is e for a in prover.sequent.hypotheses):
                ok = False
                warnings.append(f"bisection on {prover.table.alias_of(e) or e} skipped: "
                                f"no enclosure hypothesis in this sequent")
        if ok:
            usable.append(h)
    return _Solver(prover, usable, warnings).solve({}, 0)
