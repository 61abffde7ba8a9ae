"""Predicate validation, canonical forms, and non-degeneracy checks."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoforge.predicates import (
    ARITY,
    InvalidPredicate,
    NondegenConfig,
    UnknownPoint,
    Witness,
    canonicalize,
    check_nondegenerate,
    fact,
    format_fact,
    is_mirror_form,
    is_tautology,
    parse_fact,
    symmetry_variants,
)


class TestValidation:
    def test_unknown_kind(self):
        with pytest.raises(InvalidPredicate):
            fact("tangent", "A", "B")

    def test_wrong_arity(self):
        with pytest.raises(InvalidPredicate):
            fact("midp", "M", "A")

    def test_segment_self_pair_rejected(self):
        with pytest.raises(InvalidPredicate):
            fact("cong", "A", "A", "B", "C")

    def test_cross_segment_repeats_allowed(self):
        # shared endpoint between the two segments is fine
        f = fact("cong", "A", "B", "A", "C")
        assert f.kind == "cong"

    def test_rconst_needs_value(self):
        with pytest.raises(InvalidPredicate):
            fact("rconst", "M", "A", "A", "B")

    def test_rconst_positive_value(self):
        with pytest.raises(InvalidPredicate):
            fact("rconst", "M", "A", "A", "B", value=Fraction(-1, 2))

    def test_value_on_other_kind_rejected(self):
        with pytest.raises(InvalidPredicate):
            fact("midp", "M", "A", "B", value=Fraction(1, 2))

    def test_cyclic_minimum_four(self):
        with pytest.raises(InvalidPredicate):
            fact("cyclic", "A", "B", "C")

    def test_ncoll_accepts_four_points(self):
        f = fact("ncoll", "P", "Q", "A", "B")
        assert len(f.args) == 4


class TestCanonicalForms:
    def test_para_side_and_segment_swaps(self):
        base = fact("para", "A", "B", "C", "D")
        assert fact("para", "C", "D", "A", "B") == base
        assert fact("para", "B", "A", "D", "C") == base

    def test_coll_sorted(self):
        assert fact("coll", "C", "A", "B").args == ("A", "B", "C")

    def test_circle_keeps_center_first(self):
        assert fact("circle", "O", "C", "B", "A").args == ("O", "A", "B", "C")

    def test_midp_orders_endpoints(self):
        assert fact("midp", "M", "B", "A").args == ("M", "A", "B")

    def test_eqangle_group_members_agree(self):
        base = fact("eqangle", "A", "B", "C", "D", "E", "F", "G", "H")
        # reversing segments and swapping the two sides stay in the orbit
        assert fact("eqangle", "B", "A", "D", "C", "F", "E", "H", "G") == base
        assert fact("eqangle", "E", "F", "G", "H", "A", "B", "C", "D") == base

    def test_rconst_value_rides_along(self):
        f = fact("rconst", "M", "A", "A", "B", value="1/2")
        assert f.value == Fraction(1, 2)
        assert fact("rconst", "A", "M", "B", "A", value="1/2") == f

    def test_simtri_joint_rotation_only(self):
        base = fact("simtri", "A", "B", "C", "P", "Q", "R")
        assert fact("simtri", "B", "C", "A", "Q", "R", "P") == base
        # swapping the two triangles is a different canonical fact; the
        # triviality filter owns that wider equivalence
        assert fact("simtri", "P", "Q", "R", "A", "B", "C") != base

    def test_sameside_variant_count(self):
        variants = symmetry_variants("sameside", ("P", "A", "B", "Q", "C", "D"))
        assert len(set(variants)) == 8


_LABELS = tuple("ABCDEFGH")


@st.composite
def valid_fact_inputs(draw):
    kind = draw(st.sampled_from(sorted(k for k in ARITY if k != "rconst")))
    n = ARITY[kind]
    if n is None:
        n = draw(st.integers(min_value=4 if kind == "cyclic" else 3, max_value=6))
    args = tuple(draw(st.permutations(_LABELS))[:n])
    return kind, args


@given(valid_fact_inputs())
@settings(max_examples=300)
def test_canonicalize_idempotent(inp):
    kind, args = inp
    once = canonicalize(kind, args)
    again = canonicalize(once)
    assert once == again


@given(valid_fact_inputs())
@settings(max_examples=300)
def test_all_variants_share_canonical_form(inp):
    kind, args = inp
    base = canonicalize(kind, args)
    for variant in symmetry_variants(kind, args):
        assert canonicalize(kind, variant) == base


@given(valid_fact_inputs())
@settings(max_examples=200)
def test_parse_format_round_trip(inp):
    kind, args = inp
    f = canonicalize(kind, args)
    assert parse_fact(format_fact(f)) == f


def test_parse_rconst_round_trip():
    f = parse_fact("rconst M A A B 1/2")
    assert f.value == Fraction(1, 2)
    assert parse_fact(format_fact(f)) == f


def test_parse_empty_rejected():
    with pytest.raises(InvalidPredicate):
        parse_fact("   ")


class TestTautologyShapes:
    def test_eqangle_same_pair_both_sides(self):
        f = fact("eqangle", "A", "B", "A", "B", "C", "D", "C", "D")
        assert is_tautology(f)

    def test_eqangle_matching_columns(self):
        f = fact("eqangle", "A", "B", "C", "D", "A", "B", "C", "D")
        assert is_tautology(f)

    def test_cong_self_segment(self):
        assert is_tautology(fact("cong", "A", "B", "B", "A"))

    def test_rconst_unit_self_ratio(self):
        assert is_tautology(fact("rconst", "A", "B", "B", "A", value="1"))
        assert not is_tautology(fact("rconst", "A", "B", "B", "A", value="2"))

    def test_informative_eqangle_is_not_tautology(self):
        assert not is_tautology(fact("eqangle", "A", "B", "C", "D", "E", "F", "G", "H"))

    def test_mirror_form(self):
        f = fact("eqangle", "A", "B", "C", "D", "C", "D", "A", "B")
        assert is_mirror_form(f)
        assert not is_mirror_form(fact("eqangle", "A", "B", "C", "D", "E", "F", "G", "H"))


class TestWitness:
    def test_lookup_and_labels(self):
        w = Witness({"B": (1.0, 0.0), "A": (0.0, 0.0)})
        assert w.xy("B") == (1.0, 0.0)
        assert w.labels() == ["A", "B"]
        assert w.has("A") and not w.has("Z")

    def test_unknown_point(self):
        with pytest.raises(UnknownPoint):
            Witness({}).xy("A")

    def test_non_finite_rejected(self):
        w = Witness({"A": (float("inf"), 0.0)})
        with pytest.raises(ValueError):
            w.check_finite()


class TestNondegeneracy:
    w = Witness(
        {
            "A": (0.0, 0.0),
            "B": (4.0, 0.0),
            "C": (4.0, 4.0),
            "D": (0.0, 4.0),
            "E": (2.0, 0.0),  # on AB
            "P": (1.0, 1.0),
            "Q": (3.0, 5.0),
        }
    )

    def test_ncoll_no_three_collinear(self):
        assert check_nondegenerate(self.w, fact("ncoll", "A", "B", "C", "D"))
        assert not check_nondegenerate(self.w, fact("ncoll", "A", "E", "B", "C"))

    def test_npara(self):
        assert check_nondegenerate(self.w, fact("npara", "A", "B", "B", "C"))
        assert not check_nondegenerate(self.w, fact("npara", "A", "B", "D", "C"))

    def test_sameclock(self):
        assert check_nondegenerate(self.w, fact("sameclock", "A", "B", "C", "B", "C", "D"))
        assert not check_nondegenerate(self.w, fact("sameclock", "A", "B", "C", "C", "B", "D"))

    def test_sameside_both_inside(self):
        # E inside AB, P inside AC's span
        assert check_nondegenerate(self.w, fact("sameside", "E", "A", "B", "P", "A", "C"))

    def test_sameside_mixed_fails_and_negation_holds(self):
        # Q is outside segment AB's span along its line direction
        f = fact("sameside", "E", "A", "B", "Q", "A", "E")
        g = fact("nsameside", "E", "A", "B", "Q", "A", "E")
        assert not check_nondegenerate(self.w, f)
        assert check_nondegenerate(self.w, g)

    def test_wrong_kind_rejected(self):
        with pytest.raises(InvalidPredicate):
            check_nondegenerate(self.w, fact("coll", "A", "B", "E"))
