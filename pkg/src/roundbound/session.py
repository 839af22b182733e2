"""End-to-end driver: script text in, proof trees, report and certificate out."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

from .bisect import ProofTree, solve
from .certificate import Certificate, emit, format_dyadic, serialize, widen
from .dyadic import Dyadic
from .engine import Config, SequentProver, satisfies
from .logic import Sequent, decompose, prop_text
from .parser import Script, lint, parse

__all__ = ["SequentResult", "Result", "prove_script", "render_report", "render_interval"]


@dataclass
class SequentResult:
    sequent: Sequent
    prover: SequentProver
    tree: ProofTree

    @property
    def proved(self) -> bool:
        return self.tree.proved

    def answer(self, atom):
        return self.tree.answer(atom)


@dataclass
class Result:
    script: Script
    source: str
    sequents: List[SequentResult]
    warnings: List[str] = field(default_factory=list)

    @property
    def proved(self) -> bool:
        return all(s.proved for s in self.sequents)

    def user_rules(self):
        return [(h.lhs, h.rhs, h.verified) for h in self.script.rewrites]

    def certificate(self, widened: bool = True) -> Certificate:
        """Certificate for the whole script; only meaningful when proved."""
        cert = emit(self.script.table, [(s.sequent, s.tree) for s in self.sequents],
                    self.source, self.user_rules())
        return widen(cert) if widened else cert


def prove_script(source: str, config: Optional[Config] = None) -> Result:
    """Parse, lint, decompose and prove a script.

    Raises the parser's, decomposer's and prover's input errors unchanged.
    """
    config = config or Config()
    script = parse(source)
    warnings = lint(script)
    approx = [(h.approx, h.exact) for h in script.approx_hints]
    rules = [(h.lhs, h.rhs, h.verified) for h in script.rewrites]
    out = []
    for seq in decompose(script.proposition):
        prover = SequentProver(script.table, seq, config, approx, rules)
        tree = solve(prover, script.bisections, warnings)
        out.append(SequentResult(seq, prover, tree))
    return Result(script, source, out, warnings)


# -- reporting ---------------------------------------------------------------------

def render_interval(text: str, lo: Dyadic, hi: Dyadic) -> str:
    return (f"{text} in [{lo.to_decimal()}, {hi.to_decimal()}]"
            f"  (dyadic [{format_dyadic(lo)}, {format_dyadic(hi)}])")


def _atom_verdict(r: SequentResult, atom) -> bool:
    bounds = r.prover.bounds[atom]
    for leaf in r.tree.leaves():
        o = leaf.outcome
        if o.absurd is None and not satisfies(o.answers.get(atom), bounds):
            return False
    return True


def render_report(result: Result) -> str:
    script = result.script
    fmt_names = script.format_names()
    lines = [f"warning: {w}" for w in result.warnings]
    many = len(result.sequents) > 1
    for i, r in enumerate(result.sequents, start=1):
        head = f"sequent {i}" if many else "goal"
        leaves = list(r.tree.leaves())
        if r.proved:
            status = "proved"
            n = sum(leaf.outcome.absurd is not None for leaf in leaves)
            if n:
                where = f"{n} of {len(leaves)} tiles" if len(leaves) > 1 else "the whole domain"
                status += f" (contradiction reached on {where})"
        else:
            reasons = sorted({leaf.outcome.reason for leaf in leaves if not leaf.outcome.proved})
            status = "unproved: " + "; ".join(reasons)
        if len(leaves) > 1:
            status += f" [{len(leaves)} tiles]"
        lines.append(f"{head}: {status}")
        if many:
            lines.append(f"  {r.sequent.text(fmt_names)}")
        for atom in r.sequent.goal_atoms():
            text = script.text(atom.expr)
            ans = r.answer(atom)
            if atom.kind == "query":
                if ans is None:
                    lines.append(f"  {text}: no enclosure found")
                else:
                    lines.append("  " + render_interval(text, ans.lo, ans.hi))
                continue
            verdict = "proved" if _atom_verdict(r, atom) else "not proved"
            lines.append(f"  {prop_text(atom, fmt_names)}: {verdict}")
            if verdict != "proved" and ans is not None:
                lines.append("    best enclosure: " + render_interval(text, ans.lo, ans.hi))
    return "\n".join(lines) + "\n"


def certificate_text(result: Result, widened: bool = True) -> str:
    return serialize(result.certificate(widened))


__all__.append("certificate_text")
