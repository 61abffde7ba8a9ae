"""Deduction rule library.

Rules live in data/rules.txt, one block per rule: an `rNN Name` line, then a
`premises => conclusions` line with comma-separated predicates. Tokens after
each kind are variables; rconst conclusions end with a rational literal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from geoforge.factstore import validate_pattern
from geoforge.predicates import ARITY, NONDEGEN_KINDS

# macro rule with no predicate-level definition; cannot live in this engine
EXCLUDED_RULES = frozenset({"r57"})

LIBRARY_SIZE = 64


@dataclass(frozen=True)
class Pattern:
    kind: str
    slots: tuple[str, ...]
    value: Fraction | None = None

    def variables(self) -> set[str]:
        return set(self.slots)

    def __str__(self) -> str:
        parts = [self.kind, *(s.lstrip("?") for s in self.slots)]
        if self.value is not None:
            parts.append(f"{self.value.numerator}/{self.value.denominator}")
        return " ".join(parts)


@dataclass(frozen=True)
class Rule:
    id: str
    name: str
    premises: tuple[Pattern, ...]
    conclusions: tuple[Pattern, ...]

    def stored_premises(self) -> tuple[Pattern, ...]:
        return tuple(p for p in self.premises if p.kind not in NONDEGEN_KINDS)

    def guard_premises(self) -> tuple[Pattern, ...]:
        return tuple(p for p in self.premises if p.kind in NONDEGEN_KINDS)


class RuleLibraryError(RuntimeError):
    pass


def _parse_pattern(text: str) -> Pattern:
    toks = text.split()
    if len(toks) < 2:
        raise RuleLibraryError(f"malformed predicate {text!r}")
    kind = toks[0]
    # variables carry a "?" prefix internally so they can never be confused
    # with concrete point labels when patterns are matched against a store
    if kind == "rconst":
        return Pattern(kind, tuple("?" + t for t in toks[1:-1]), Fraction(toks[-1]))
    return Pattern(kind, tuple("?" + t for t in toks[1:]))


def parse_rule_block(header: str, body: str) -> Rule:
    rid, _, name = header.partition(" ")
    if not rid.startswith("r") or not name:
        raise RuleLibraryError(f"malformed rule header {header!r}")
    lhs, sep, rhs = body.partition("=>")
    if not sep:
        raise RuleLibraryError(f"rule {rid}: missing '=>'")
    premises = tuple(_parse_pattern(s) for s in lhs.split(",") if s.strip())
    conclusions = tuple(_parse_pattern(s) for s in rhs.split(",") if s.strip())
    if not premises or not conclusions:
        raise RuleLibraryError(f"rule {rid}: empty premises or conclusions")
    for p in premises + conclusions:
        if p.kind not in ARITY:
            raise RuleLibraryError(f"rule {rid}: unknown kind {p.kind!r}")
        try:
            validate_pattern(p.kind, p.slots)
        except ValueError as e:
            raise RuleLibraryError(f"rule {rid}: {e}") from None
    stored = set().union(*(p.variables() for p in premises if p.kind not in NONDEGEN_KINDS))
    for c in conclusions:
        free = c.variables() - stored
        if free:
            raise RuleLibraryError(f"rule {rid}: unbound conclusion variables {sorted(free)}")
    for g in premises:
        if g.kind in NONDEGEN_KINDS and g.variables() - stored:
            raise RuleLibraryError(f"rule {rid}: degeneracy guard uses unbound variables")
    return Rule(rid, name, premises, conclusions)


def load_rule_library() -> list[Rule]:
    text = resources.files("geoforge.data").joinpath("rules.txt").read_text("utf-8")
    rules: list[Rule] = []
    blocks = [b for b in text.split("\n\n") if b.strip()]
    for block in blocks:
        lines = [ln for ln in block.splitlines() if ln.strip()]
        if len(lines) != 2:
            raise RuleLibraryError(f"bad rule block: {block[:60]!r}")
        header, body = lines
        rid = header.split()[0]
        if rid in EXCLUDED_RULES:
            continue
        rules.append(parse_rule_block(header, body))
    if len(rules) != LIBRARY_SIZE:
        raise RuleLibraryError(f"expected {LIBRARY_SIZE} rules, parsed {len(rules)}")
    ids = [r.id for r in rules]
    if len(set(ids)) != len(ids):
        raise RuleLibraryError("duplicate rule ids")
    return rules


def rule_by_id(rules: list[Rule], rid: str) -> Rule:
    for r in rules:
        if r.id == rid:
            return r
    raise KeyError(rid)
