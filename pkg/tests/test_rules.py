"""Rule library loading and rule-text parsing."""

from __future__ import annotations

from fractions import Fraction

import pytest

from geoforge.predicates import NONDEGEN_KINDS
from geoforge.rules import (
    LIBRARY_SIZE,
    Rule,
    RuleLibraryError,
    load_rule_library,
    parse_rule_block,
    rule_by_id,
)


@pytest.fixture(scope="module")
def library():
    return load_rule_library()


def test_library_size(library):
    assert len(library) == LIBRARY_SIZE == 64


def test_macro_rule_excluded(library):
    ids = {r.id for r in library}
    assert "r57" not in ids
    for gap in ("r32", "r33", "r38", "r39", "r40"):
        assert gap not in ids


def test_ids_unique_and_well_formed(library):
    ids = [r.id for r in library]
    assert len(set(ids)) == len(ids)
    assert all(i.startswith("r") and i[1:].isdigit() for i in ids)


def test_midsegment_rule_shape(library):
    r = rule_by_id(library, "r06")
    assert [str(p) for p in r.premises] == ["midp E A B", "midp F A C"]
    assert [str(c) for c in r.conclusions] == ["para E F B C"]


def test_conclusion_variables_always_bound(library):
    for r in library:
        stored = set().union(*(p.variables() for p in r.stored_premises()))
        for c in r.conclusions:
            assert c.variables() <= stored, r.id


def test_guards_split_from_stored(library):
    for r in library:
        assert all(g.kind in NONDEGEN_KINDS for g in r.guard_premises())
        assert all(p.kind not in NONDEGEN_KINDS for p in r.stored_premises())
        assert set(r.premises) == set(r.stored_premises()) | set(r.guard_premises())


def test_some_rule_carries_a_rational():
    r = parse_rule_block("r51 Midpoint ratio", "midp M A B => rconst M A A B 1/2")
    assert r.conclusions[0].value == Fraction(1, 2)


def test_unbound_conclusion_variable_rejected():
    with pytest.raises(RuleLibraryError):
        parse_rule_block("r99 Broken", "midp M A B => para M A X Y")


def test_guard_only_binding_rejected():
    # a guard may not introduce variables the stored premises never mention
    with pytest.raises(RuleLibraryError):
        parse_rule_block("r99 Broken", "midp M A B, ncoll M A Z => coll M A B")


def test_missing_arrow_rejected():
    with pytest.raises(RuleLibraryError):
        parse_rule_block("r99 Broken", "midp M A B, para A B C D")


def test_unknown_kind_rejected():
    with pytest.raises(RuleLibraryError):
        parse_rule_block("r99 Broken", "tangent A B C => coll A B C")


def test_bad_arity_rejected():
    with pytest.raises(RuleLibraryError):
        parse_rule_block("r99 Broken", "midp M A => coll M A A")


def test_rule_lookup(library):
    assert rule_by_id(library, "r00").id == "r00"
    with pytest.raises(KeyError):
        rule_by_id(library, "r57")


def test_variables_marked_distinct_from_labels(library):
    # slot tokens carry the variable prefix, so they can never collide with
    # a concrete point label like "A1"
    r = rule_by_id(library, "r06")
    assert all(s.startswith("?") for p in r.premises for s in p.slots)


def test_rules_are_frozen(library):
    with pytest.raises(AttributeError):
        library[0].name = "other"
    assert isinstance(library[0], Rule)
