"""Fixed English templates for facts, deduction steps, and seeds.

Every fact kind has exactly one sentence shape. Step text follows the shape
"by <rule name>, <premises> give <conclusion>" with premises joined by "and".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from geoforge.chaining import Application, SeedData
from geoforge.predicates import Fact
from geoforge.rules import Rule


class TranslationError(ValueError):
    pass


def _seg(a: str, b: str) -> str:
    return f"{a}{b}"


def render_fact(f: Fact) -> str:
    a = f.args
    k = f.kind
    if k == "perp":
        return f"{_seg(a[0], a[1])} ⊥ {_seg(a[2], a[3])}"
    if k == "para":
        return f"{_seg(a[0], a[1])} ∥ {_seg(a[2], a[3])}"
    if k == "npara":
        return f"{_seg(a[0], a[1])} ∦ {_seg(a[2], a[3])}"
    if k == "cong":
        return f"{_seg(a[0], a[1])} = {_seg(a[2], a[3])}"
    if k == "coll":
        return f"{', '.join(a)} are collinear"
    if k == "ncoll":
        return f"{', '.join(a)} are not collinear"
    if k == "cyclic":
        return f"{', '.join(a)} are concyclic"
    if k == "circle":
        return f"{a[0]} is the center of the circle through {', '.join(a[1:])}"
    if k == "midp":
        return f"{a[0]} is the midpoint of {_seg(a[1], a[2])}"
    if k == "eqangle":
        return (
            f"∠({_seg(a[0], a[1])},{_seg(a[2], a[3])})"
            f" = ∠({_seg(a[4], a[5])},{_seg(a[6], a[7])})"
        )
    if k == "eqratio":
        return (
            f"{_seg(a[0], a[1])}:{_seg(a[2], a[3])}"
            f" = {_seg(a[4], a[5])}:{_seg(a[6], a[7])}"
        )
    if k == "eqratio3":
        p, q, r, s, m, n = a
        return f"{_seg(m, p)}:{_seg(m, r)} = {_seg(n, q)}:{_seg(n, s)}"
    if k == "rconst":
        return f"{_seg(a[0], a[1])}:{_seg(a[2], a[3])} = {f.value}"
    if k == "simtri":
        return f"△{a[0]}{a[1]}{a[2]} ~ △{a[3]}{a[4]}{a[5]}"
    if k == "simtrir":
        return f"△{a[0]}{a[1]}{a[2]} ~ △{a[3]}{a[4]}{a[5]} (reflected)"
    if k == "contri":
        return f"△{a[0]}{a[1]}{a[2]} ≅ △{a[3]}{a[4]}{a[5]}"
    if k == "contrir":
        return f"△{a[0]}{a[1]}{a[2]} ≅ △{a[3]}{a[4]}{a[5]} (reflected)"
    if k == "sameclock":
        return f"{a[0]}, {a[1]}, {a[2]} and {a[3]}, {a[4]}, {a[5]} wind the same way"
    if k == "sameside":
        return (
            f"{a[0]} sits relative to {_seg(a[1], a[2])}"
            f" as {a[3]} does to {_seg(a[4], a[5])}"
        )
    if k == "nsameside":
        return (
            f"{a[0]} sits relative to {_seg(a[1], a[2])}"
            f" oppositely to {a[3]} on {_seg(a[4], a[5])}"
        )
    raise TranslationError(f"no template for kind {k!r}")


def render_step(app: Application, rule_names: Mapping[str, str]) -> str:
    try:
        name = rule_names[app.rule_id]
    except KeyError:
        raise TranslationError(f"unknown rule id {app.rule_id!r}") from None
    prem = " and ".join(render_fact(p) for p in app.premises)
    return f"by {name}, {prem} give {render_fact(app.conclusion)}"


@dataclass(frozen=True)
class TranslatedSeed:
    premise_text: str
    step_texts: tuple[str, ...]
    target_text: str


def translate_seed(seed: SeedData, rules: Sequence[Rule]) -> TranslatedSeed:
    names = {r.id: r.name for r in rules}
    return TranslatedSeed(
        premise_text="; ".join(render_fact(p) for p in seed.premises),
        step_texts=tuple(render_step(s, names) for s in seed.steps),
        target_text=" and ".join(render_fact(t) for t in seed.targets),
    )
