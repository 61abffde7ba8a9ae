"""Forward chaining, deduction graphs, subgoal extraction and seed selection.

The chainer joins each rule's stored premises against the fact store, then
discharges degeneracy guards numerically on the scene witness. Results are
deterministic: rules fire in id order and substitutions are enumerated in
canonical order, so the same givens and witness always yield the same graph.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Sequence

from geoforge.factstore import FactStore
from geoforge.predicates import (
    NONDEGEN_KINDS,
    Fact,
    InvalidPredicate,
    NondegenConfig,
    Witness,
    canonicalize,
    check_nondegenerate,
    is_mirror_form,
    is_tautology,
    symmetry_variants,
)
from geoforge.rules import Pattern, Rule
from geoforge.verify import DEFAULT_TOL, ToleranceConfig, check_relation

# rules that merely restate a point's defining construction; a subgoal proved
# by these alone carries no content worth asking about
DEFINITIONAL_RULES = frozenset({"r51", "r54", "r55", "r56"})

_NONDEGEN_DEFAULT = NondegenConfig()


class _ChainCache:
    """Memo tables scoped to one saturation run.

    Everything cached here is a pure function of immutable inputs: orbit
    enumerations depend only on a kind's append-only fact list (identified by
    its length) and the pattern's variable shape, witness checks only on the
    canonical fact, guard checks only on the rule and binding. Reuse therefore
    never changes results, only skips recomputation.
    """

    __slots__ = ("slots", "relation", "guards")

    def __init__(self) -> None:
        self.slots: dict[tuple, list[tuple[str, ...]]] = {}
        self.relation: dict[Fact, bool] = {}
        self.guards: dict[tuple, bool] = {}

    def holds(self, f: Fact, witness: Witness, tol: ToleranceConfig) -> bool:
        ok = self.relation.get(f)
        if ok is None:
            ok, _ = check_relation(f, witness, tol)
            self.relation[f] = ok
        return ok


@dataclass(frozen=True)
class ChainBudget:
    max_facts: int = 2000
    max_rounds: int = 12

    def validate(self) -> None:
        if self.max_facts < 1 or self.max_rounds < 1:
            raise ValueError("chain budget fields must be positive")


@dataclass(frozen=True)
class Application:
    """One rule firing: premise facts in, a single conclusion fact out."""

    rule_id: str
    premises: tuple[Fact, ...]
    conclusion: Fact

    def to_dict(self) -> dict:
        return {
            "rule": self.rule_id,
            "inputs": [str(p) for p in self.premises],
            "output": str(self.conclusion),
        }


@dataclass
class DeductionGraph:
    given: list[Fact]
    derived: list[Fact] = field(default_factory=list)
    producer: dict[Fact, Application] = field(default_factory=dict)
    truncated: bool = False

    def flags(self) -> dict[Fact, str]:
        out = {f: "given" for f in self.given}
        out.update({f: "derived" for f in self.derived})
        return out

    def derivation_index(self, f: Fact) -> int:
        return self.derived.index(f)


@dataclass(frozen=True)
class ProofTrace:
    """Backward slice of the graph that establishes one target fact."""

    target: Fact
    premises: tuple[Fact, ...]
    steps: tuple[Application, ...]


@dataclass
class SeedData:
    premises: list[Fact]
    steps: list[Application]
    targets: list[Fact]
    witness: Witness

    def to_dict(self) -> dict:
        return {
            "premises": [str(p) for p in self.premises],
            "steps": [s.to_dict() for s in self.steps],
            "targets": [str(t) for t in self.targets],
            "witness": {k: [x, y] for k, (x, y) in sorted(self.witness.coords.items())},
        }


def _enumerate_slots(
    facts: Sequence[Fact], slots: tuple[str, ...]
) -> list[dict[str, str]]:
    # distinct positions sharing a variable must carry the same label
    groups: dict[str, list[int]] = {}
    for i, s in enumerate(slots):
        groups.setdefault(s, []).append(i)
    var_groups = [(name, tuple(pos)) for name, pos in groups.items()]
    out: list[dict[str, str]] = []
    seen: set[tuple] = set()
    for f in facts:
        for variant in symmetry_variants(f.kind, f.args):
            sub: dict[str, str] = {}
            for name, pos in var_groups:
                label = variant[pos[0]]
                for p in pos[1:]:
                    if variant[p] != label:
                        break
                else:
                    sub[name] = label
                    continue
                break
            else:
                key = tuple(sub[name] for name, _ in var_groups)
                if key not in seen:
                    seen.add(key)
                    out.append(sub)
    return out


def _enumerate_premise(
    store: FactStore, facts: Sequence[Fact], pat: Pattern
) -> list[dict[str, str]]:
    """Every substitution under which this stored premise holds."""
    res = _enumerate_slots(facts, pat.slots)
    if pat.kind == "eqangle":
        # internal closure is wider than storage: reading both angle pairs in
        # the opposite rotational sense preserves the equality, so patterns
        # also match through that joint reflection
        s = pat.slots
        flipped = (s[2], s[3], s[0], s[1], s[6], s[7], s[4], s[5])
        seen = {tuple(sorted(m.items())) for m in res}
        for m in _enumerate_slots(facts, flipped):
            k = tuple(sorted(m.items()))
            if k not in seen:
                seen.add(k)
                res.append(m)
    if pat.value is not None:
        res = [
            m
            for m in res
            if store.contains(
                canonicalize(pat.kind, tuple(m[s] for s in pat.slots), pat.value)
            )
        ]
    return res


def _bind_cyclic(
    store: FactStore,
    pat: Pattern,
    binding: dict[str, str],
    witness: Witness,
    tol: ToleranceConfig,
) -> list[dict[str, str]]:
    bound = [binding[s] for s in pat.slots if s in binding]
    if len(set(bound)) != len(bound):
        return []
    free = [s for s in pat.slots if s not in binding]
    out = []
    for cset in sorted(store.cyclic_sets(), key=sorted):
        if not set(bound) <= cset:
            continue
        pool = sorted(cset - set(bound))
        for perm in permutations(pool, len(free)):
            nb = dict(binding)
            nb.update(zip(free, perm))
            pts = tuple(nb[s] for s in pat.slots)
            # merged concyclic sets can overreach; accept an instantiation
            # only when the witness actually puts these points on one circle
            ok, _ = check_relation(canonicalize("cyclic", pts), witness, tol)
            if ok:
                out.append(nb)
    return out


def _premise_order(stored: Sequence[Pattern], counts: dict[int, int]) -> list[Pattern]:
    """Greedy join order: start from the sparsest premise, then prefer
    patterns sharing the most variables with what is already bound; cyclic
    patterns go last since they branch on whole concyclic sets."""
    if len(stored) <= 1:
        return list(stored)
    remaining = list(range(len(stored)))
    first = min(remaining, key=lambda i: (stored[i].kind == "cyclic", counts[i], i))
    remaining.remove(first)
    ordered = [stored[first]]
    bound = set(stored[first].variables())
    while remaining:
        best = max(
            remaining,
            key=lambda i: (
                stored[i].kind != "cyclic",
                len(stored[i].variables() & bound),
                -counts[i],
                -i,
            ),
        )
        remaining.remove(best)
        ordered.append(stored[best])
        bound |= stored[best].variables()
    ordered.sort(key=lambda p: p.kind == "cyclic")
    return ordered


def match_rule(
    store: FactStore,
    rule: Rule,
    witness: Witness,
    tol: ToleranceConfig = DEFAULT_TOL,
    nondegen: NondegenConfig = _NONDEGEN_DEFAULT,
) -> list[dict[str, str]]:
    """All substitutions under which the rule fires against the store.

    Stored premises are joined symbolically; cyclic instantiations and the
    degeneracy guards must additionally hold numerically on the witness.
    """
    raw = rule.stored_premises()
    counts: dict[int, int] = {}
    for i, pat in enumerate(raw):
        if pat.kind == "cyclic":
            counts[i] = len(store.cyclic_sets())
        else:
            counts[i] = len(store.facts_of_kind(pat.kind))
        if counts[i] == 0:
            return []
    stored = _premise_order(raw, counts)
    subs: list[dict[str, str]] = [{}]
    for pat in stored:
        if pat.kind == "cyclic":
            nxt: list[dict[str, str]] = []
            for b in subs:
                nxt.extend(_bind_cyclic(store, pat, b, witness, tol))
            subs = nxt
        else:
            matches = _enumerate_premise(store, store.facts_of_kind(pat.kind), pat)
            shared = tuple(sorted(pat.variables() & set(subs[0])))
            index: dict[tuple, list[dict[str, str]]] = {}
            for m in matches:
                index.setdefault(tuple(m[v] for v in shared), []).append(m)
            nxt = []
            for b in subs:
                for m in index.get(tuple(b[v] for v in shared), ()):
                    nb = dict(b)
                    nb.update(m)
                    nxt.append(nb)
            subs = nxt
        if not subs:
            return []
    var_order = sorted(set(subs[0]))
    uniq: dict[tuple, dict[str, str]] = {}
    for b in subs:
        uniq.setdefault(tuple(b[v] for v in var_order), b)
    out = []
    for key in sorted(uniq):
        b = uniq[key]
        if _guards_hold(rule, b, witness, nondegen):
            out.append(b)
    return out


def _guards_hold(
    rule: Rule, binding: dict[str, str], witness: Witness, nondegen: NondegenConfig
) -> bool:
    for g in rule.guard_premises():
        args = tuple(binding[s] for s in g.slots)
        try:
            f = canonicalize(g.kind, args)
        except InvalidPredicate:
            return False
        if not check_nondegenerate(witness, f, nondegen):
            return False
    return True


def _instantiate(pat: Pattern, binding: dict[str, str]) -> Fact:
    return canonicalize(pat.kind, tuple(binding[s] for s in pat.slots), pat.value)


def _premise_facts(
    store: FactStore, rule: Rule, binding: dict[str, str]
) -> tuple[Fact, ...]:
    prems: list[Fact] = []
    for p in rule.stored_premises():
        args = tuple(binding[s] for s in p.slots)
        if p.kind == "cyclic":
            parts = store.cyclic_cover(args)
        else:
            parts = [canonicalize(p.kind, args, p.value)]
        for f in parts:
            if f not in prems:
                prems.append(f)
    return tuple(prems)


def forward_chain(
    given: Iterable[Fact],
    witness: Witness,
    rules: Sequence[Rule],
    budget: ChainBudget = ChainBudget(),
    tol: ToleranceConfig = DEFAULT_TOL,
    nondegen: NondegenConfig = _NONDEGEN_DEFAULT,
) -> DeductionGraph:
    """Saturate the givens under the rule library, up to the budget.

    Returns the deduction graph: given and derived facts, plus the first rule
    application that produced each derived fact. `truncated` is set when the
    fact or round budget stopped the run before reaching a fixpoint. Every
    candidate conclusion is checked against the witness before storage, so
    the graph only ever contains facts true in the sampled scene.
    """
    budget.validate()
    store = FactStore()
    roots: list[Fact] = []
    for f in given:
        q = canonicalize(f)
        if q.kind in NONDEGEN_KINDS:
            raise InvalidPredicate(
                f"{q.kind} is checked numerically and cannot be a given fact"
            )
        if store.insert(q):
            roots.append(q)
    graph = DeductionGraph(given=roots)
    if len(store) >= budget.max_facts:
        graph.truncated = True
        return graph
    ordered = sorted(rules, key=lambda r: r.id)
    for _ in range(budget.max_rounds):
        changed = False
        for rule in ordered:
            for binding in match_rule(store, rule, witness, tol, nondegen):
                cands = []
                for concl in rule.conclusions:
                    try:
                        f = _instantiate(concl, binding)
                    except InvalidPredicate:
                        continue
                    if is_tautology(f) or store.contains(f):
                        continue
                    # the witness models the givens, so any sound instantiation
                    # must hold on it; a false one is a degenerate binding the
                    # rule's written guards were too coarse to refuse
                    ok, _ = check_relation(f, witness, tol)
                    if ok:
                        cands.append(f)
                if not cands:
                    continue
                # premise nodes must reflect the store before these inserts
                prems = _premise_facts(store, rule, binding)
                for f in cands:
                    if not store.insert(f):
                        continue
                    graph.derived.append(f)
                    graph.producer[f] = Application(rule.id, prems, f)
                    changed = True
                    if len(store) >= budget.max_facts:
                        graph.truncated = True
                        return graph
        if not changed:
            return graph
    graph.truncated = True
    return graph


def build_trace(graph: DeductionGraph, target: Fact) -> ProofTrace:
    """Backward slice: the applications and given leaves behind one target."""
    if target not in graph.producer:
        raise KeyError(f"not a derived fact: {target}")
    apps: list[Application] = []
    leaves: list[Fact] = []
    seen: set[Fact] = set()
    stack = [target]
    while stack:
        f = stack.pop()
        if f in seen:
            continue
        seen.add(f)
        app = graph.producer.get(f)
        if app is None:
            leaves.append(f)
            continue
        apps.append(app)
        stack.extend(app.premises)
    order = {f: i for i, f in enumerate(graph.derived)}
    apps.sort(key=lambda a: order[a.conclusion])
    return ProofTrace(target, tuple(sorted(leaves)), tuple(apps))


def extract_subgoals(graph: DeductionGraph) -> list[tuple[Fact, ProofTrace]]:
    """One (target, trace) entry per derived fact, in canonical target order."""
    out = [(t, build_trace(graph, t)) for t in graph.derived]
    out.sort(key=lambda e: e[0].key())
    return out


def _restatements(f: Fact) -> set[Fact]:
    """Canonical forms a target can take while stating the same relation as f.

    Beyond the storage symmetry group this folds in: swapping the two
    triangles of a similarity or congruence, relabeling both triangles in the
    opposite rotational sense, and reading both sides of an angle or ratio
    equality in the opposite sense (for ratios, both fractions inverted).
    """
    forms = {f}
    k = f.kind
    if k in ("simtri", "simtrir", "contri", "contrir"):
        a, b, c, p, q, r = f.args
        for t in ((p, q, r, a, b, c), (a, c, b, p, r, q), (p, r, q, a, c, b)):
            forms.add(canonicalize(k, t))
    elif k in ("eqangle", "eqratio"):
        a, b, c, d, e, g, h, i = f.args
        forms.add(canonicalize(k, (c, d, a, b, h, i, e, g)))
    elif k == "rconst" and f.value:
        a, b, c, d = f.args
        forms.add(canonicalize(k, (c, d, a, b), 1 / f.value))
    return forms


def filter_trivial(
    subgoals: list[tuple[Fact, ProofTrace]],
    definitional: frozenset[str] = DEFINITIONAL_RULES,
) -> list[tuple[Fact, ProofTrace]]:
    """Drop subgoals that merely restate a premise or a construction.

    A subgoal survives only if its target is not a restatement of any premise
    it depends on, its trace has at least one step, and at least one step uses
    a non-definitional rule.
    """
    kept = []
    for target, trace in subgoals:
        if not trace.steps or is_tautology(target) or is_mirror_form(target):
            continue
        if all(s.rule_id in definitional for s in trace.steps):
            continue
        prems = set(trace.premises)
        if _restatements(target) & prems:
            continue
        kept.append((target, trace))
    return kept


def sample_subgoals(
    subgoals: list[tuple[Fact, ProofTrace]], m: int, rng: random.Random
) -> list[tuple[Fact, ProofTrace]]:
    """Uniform sample of at most m subgoals, order preserved."""
    if m < 0:
        raise ValueError("sample size must be >= 0")
    if len(subgoals) <= m:
        return list(subgoals)
    picked = set(rng.sample(range(len(subgoals)), m))
    return [e for i, e in enumerate(subgoals) if i in picked]


def select_seeds(
    subgoals: list[tuple[Fact, ProofTrace]],
    rho: float,
    witness: Witness,
) -> list[SeedData]:
    """Keep subgoals ranked in the top ceil(rho*n) by premise count AND by
    step count; ties broken by canonical target order. Output is ordered by
    canonical target."""
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must be in (0, 1]")
    if not subgoals:
        return []
    n = len(subgoals)
    k = math.ceil(rho * n)

    def top(metric) -> set[Fact]:
        ranked = sorted(subgoals, key=lambda e: (-metric(e[1]), e[0].key()))
        return {e[0] for e in ranked[:k]}

    by_premises = top(lambda t: len(t.premises))
    by_steps = top(lambda t: len(t.steps))
    chosen = [e for e in subgoals if e[0] in by_premises and e[0] in by_steps]
    chosen.sort(key=lambda e: e[0].key())
    return [
        SeedData(
            premises=list(t.premises),
            steps=list(t.steps),
            targets=[target],
            witness=witness,
        )
        for target, t in chosen
    ]
