"""Indexed storage of canonical facts with symmetry-insensitive membership.

Concyclicity gets special treatment: cyclic facts are kept as merged point
sets (two sets sharing a pair are unioned), so rules wanting k concyclic
points draw k-subsets of one set instead of an exploding list of 4-tuples.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Iterator

from geoforge.predicates import ARITY, VARIADIC_MIN, Fact, canonicalize, symmetry_variants


class FactStore:
    def __init__(self) -> None:
        self._facts: set[Fact] = set()
        self._by_kind: dict[str, list[Fact]] = {}
        self._cyclic_sets: list[set[str]] = []
        # original cyclic facts behind each merged set, for dependency edges
        self._cyclic_gens: list[list[Fact]] = []
        self._version = 0

    @property
    def version(self) -> int:
        """Monotone change counter; bumps once per mutating insert."""
        return self._version

    def __len__(self) -> int:
        return len(self._facts) + len(self._cyclic_sets)

    def __contains__(self, p: Fact) -> bool:
        return self.contains(p)

    def facts_of_kind(self, kind: str) -> list[Fact]:
        if kind == "cyclic":
            return [Fact("cyclic", tuple(sorted(s))) for s in sorted(self._cyclic_sets, key=sorted)]
        return list(self._by_kind.get(kind, ()))

    def all_facts(self) -> Iterator[Fact]:
        for kind in sorted(set(self._by_kind) | ({"cyclic"} if self._cyclic_sets else set())):
            yield from sorted(self.facts_of_kind(kind))

    def cyclic_sets(self) -> list[frozenset[str]]:
        return [frozenset(s) for s in self._cyclic_sets]

    def contains(self, p: Fact) -> bool:
        q = canonicalize(p)
        if q.kind == "cyclic":
            return any(set(q.args) <= s for s in self._cyclic_sets)
        return q in self._facts

    def insert(self, p: Fact) -> bool:
        """Add a canonical fact; True iff the store changed."""
        q = canonicalize(p)
        if q.kind == "cyclic":
            changed = self._insert_cyclic(q)
        elif q in self._facts:
            changed = False
        else:
            self._facts.add(q)
            self._by_kind.setdefault(q.kind, []).append(q)
            changed = True
        if changed:
            self._version += 1
        return changed

    def _insert_cyclic(self, q: Fact) -> bool:
        # union-merge with every existing set sharing >= 2 points
        pts = set(q.args)
        hits = [i for i, s in enumerate(self._cyclic_sets) if len(s & pts) >= 2]
        if len(hits) == 1 and pts <= self._cyclic_sets[hits[0]]:
            return False
        merged = set(pts)
        gens = [q]
        for i in reversed(hits):
            merged |= self._cyclic_sets.pop(i)
            gens = self._cyclic_gens.pop(i) + gens
        self._cyclic_sets.append(merged)
        self._cyclic_gens.append(gens)
        return True

    def cyclic_cover(self, pts: Iterable[str]) -> list[Fact]:
        """Inserted cyclic facts that jointly account for `pts` being concyclic.

        Greedy: repeatedly take the generator covering the most still-uncovered
        points. Raises KeyError when no merged set contains all of `pts`.
        """
        want = set(pts)
        for s, gens in zip(self._cyclic_sets, self._cyclic_gens):
            if want <= s:
                # union of generators equals the merged set, so greedy terminates
                cover: list[Fact] = []
                left = set(want)
                while left:
                    best = max(gens, key=lambda g: (len(left & set(g.args)), g.key()))
                    cover.append(best)
                    left -= set(best.args)
                return cover
        raise KeyError(f"no concyclic set contains {sorted(want)}")

    def match(self, kind: str, pattern: tuple[str, ...], variables: Iterable[str]) -> list[dict[str, str]]:
        """All substitutions making the canonicalized instantiation a member.

        Pattern slots are either variable names (drawn from `variables`) or
        literal point labels. Cyclic patterns of arity k bind each sorted
        k-subset of one concyclic set, orderings collapsed; everything else
        enumerates the stored facts' symmetry orbits, so symmetry-equivalent
        bindings all appear. Result order is deterministic.
        """
        validate_pattern(kind, pattern)
        vars_ = set(variables)
        results: list[dict[str, str]] = []
        seen: set[tuple[tuple[str, str], ...]] = set()

        def try_bind(args: tuple[str, ...]) -> None:
            if len(args) != len(pattern):
                return
            sub: dict[str, str] = {}
            for slot, label in zip(pattern, args):
                if slot in vars_:
                    if sub.setdefault(slot, label) != label:
                        return
                elif slot != label:
                    return
            key = tuple(sorted(sub.items()))
            if key not in seen:
                seen.add(key)
                results.append(sub)

        if kind == "cyclic":
            k = len(pattern)
            for s in self._cyclic_sets:
                if len(s) < k:
                    continue
                for subset in combinations(sorted(s), k):
                    try_bind(subset)
        else:
            for f in self._by_kind.get(kind, ()):
                for variant in symmetry_variants(kind, f.args):
                    try_bind(variant)
        results.sort(key=lambda sub: tuple(sorted(sub.items())))
        return results


def validate_pattern(kind: str, pattern: tuple[str, ...]) -> None:
    if kind not in ARITY:
        raise ValueError(f"unknown kind {kind!r}")
    want = ARITY[kind]
    if want is None:
        low = VARIADIC_MIN[kind]
        if len(pattern) < low:
            raise ValueError(f"{kind} pattern needs >= {low} slots")
    elif len(pattern) != want:
        raise ValueError(f"{kind} pattern needs {want} slots, got {len(pattern)}")


def store_from(facts: Iterable[Fact]) -> FactStore:
    s = FactStore()
    for f in facts:
        s.insert(f)
    return s
