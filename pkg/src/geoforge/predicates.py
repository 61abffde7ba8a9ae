"""Predicate vocabulary, canonical forms, witnesses, non-degeneracy checks.

A fact is a relation kind plus an ordered tuple of point labels (rconst also
carries an exact rational). Facts are stored and compared in canonical form:
the lexicographically least representative under the kind's symmetry group.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import degrees, isfinite

from geoforge import kernels


class InvalidPredicate(ValueError):
    """Arity, distinctness, or kind violation."""


class UnknownPoint(KeyError):
    pass


# arity per kind; None marks the variadic kinds (see VARIADIC_MIN)
ARITY: dict[str, int | None] = {
    "perp": 4,
    "para": 4,
    "npara": 4,
    "cong": 4,
    "coll": 3,
    "ncoll": None,
    "midp": 3,
    "circle": 4,
    "cyclic": None,
    "eqangle": 8,
    "eqratio": 8,
    "eqratio3": 6,
    "rconst": 4,
    "simtri": 6,
    "simtrir": 6,
    "contri": 6,
    "contrir": 6,
    "sameside": 6,
    "nsameside": 6,
    "sameclock": 6,
}

KINDS = tuple(ARITY)

# minimum point count for the variadic kinds; ncoll with n points asserts
# that no three of them are collinear
VARIADIC_MIN = {"cyclic": 4, "ncoll": 3}

# premises checked numerically on the witness, never stored
NONDEGEN_KINDS = frozenset({"ncoll", "npara", "sameside", "nsameside", "sameclock"})


@dataclass(frozen=True)
class Fact:
    kind: str
    args: tuple[str, ...]
    value: Fraction | None = None

    def key(self) -> tuple:
        v = self.value
        return (self.kind, self.args, (v.numerator, v.denominator) if v is not None else ())

    def __lt__(self, other: "Fact") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        return format_fact(self)


def _check_distinct(kind: str, args: tuple[str, ...], groups: tuple[tuple[int, ...], ...]) -> None:
    for g in groups:
        seen = [args[i] for i in g]
        if len(set(seen)) != len(seen):
            raise InvalidPredicate(f"{kind}: repeated label in {' '.join(args)}")


def validate(kind: str, args: tuple[str, ...], value: Fraction | None = None) -> None:
    if kind not in ARITY:
        raise InvalidPredicate(f"unknown kind {kind!r}")
    want = ARITY[kind]
    if want is None:
        low = VARIADIC_MIN[kind]
        if len(args) < low:
            raise InvalidPredicate(f"{kind} needs >= {low} points, got {len(args)}")
    elif len(args) != want:
        raise InvalidPredicate(f"{kind} needs {want} points, got {len(args)}")
    if kind == "rconst":
        if value is None or value <= 0:
            raise InvalidPredicate("rconst needs a positive rational value")
    elif value is not None:
        raise InvalidPredicate(f"{kind} takes no value")

    if kind in ("perp", "para", "npara", "cong"):
        _check_distinct(kind, args, ((0, 1), (2, 3)))
    elif kind in ("coll", "ncoll", "midp", "circle"):
        _check_distinct(kind, args, (tuple(range(len(args))),))
    elif kind == "cyclic":
        _check_distinct(kind, args, (tuple(range(len(args))),))
    elif kind in ("eqangle", "eqratio"):
        _check_distinct(kind, args, ((0, 1), (2, 3), (4, 5), (6, 7)))
    elif kind == "eqratio3":
        # m against segment endpoints a,c and n against b,d: the four ratio
        # segments must be nonzero
        _check_distinct(kind, args, ((0, 4), (2, 4), (1, 5), (3, 5)))
    elif kind == "rconst":
        _check_distinct(kind, args, ((0, 1), (2, 3)))
    elif kind in ("simtri", "simtrir", "contri", "contrir", "sameclock"):
        _check_distinct(kind, args, ((0, 1, 2), (3, 4, 5)))
    elif kind in ("sameside", "nsameside"):
        _check_distinct(kind, args, ((0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)))


def _ps(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@lru_cache(maxsize=65536)
def symmetry_variants(kind: str, args: tuple[str, ...]) -> tuple[tuple[str, ...], ...]:
    """Every arg tuple equivalent to args under the kind's symmetry group.

    cyclic is the one kind whose group (all permutations) is returned lazily
    by callers that can afford it; here it enumerates, so keep inputs small.
    Results are cached; treat them as immutable.
    """
    if kind in ("perp", "para", "npara", "cong"):
        a, b, c, d = args
        out = []
        for p in ((a, b), (b, a)):
            for q in ((c, d), (d, c)):
                out.append(p + q)
                out.append(q + p)
        return tuple(out)
    if kind in ("coll", "ncoll", "cyclic"):
        return tuple(permutations(args))
    if kind == "circle":
        o = args[0]
        return tuple((o,) + p for p in permutations(args[1:]))
    if kind == "midp":
        m, a, b = args
        return ((m, a, b), (m, b, a))
    if kind in ("eqangle", "eqratio"):
        lines = (args[0:2], args[2:4], args[4:6], args[6:8])
        out = []
        for l0 in (lines[0], lines[0][::-1]):
            for l1 in (lines[1], lines[1][::-1]):
                for l2 in (lines[2], lines[2][::-1]):
                    for l3 in (lines[3], lines[3][::-1]):
                        first = l0 + l1
                        second = l2 + l3
                        out.append(first + second)
                        out.append(second + first)
        return tuple(out)
    if kind == "eqratio3":
        a, b, c, d, m, n = args
        return (args, (b, a, d, c, n, m))
    if kind == "rconst":
        a, b, c, d = args
        return tuple(p + q for p in ((a, b), (b, a)) for q in ((c, d), (d, c)))
    if kind in ("simtri", "simtrir", "contri", "contrir"):
        a, b, c, p, q, r = args
        return (
            (a, b, c, p, q, r),
            (b, c, a, q, r, p),
            (c, a, b, r, p, q),
        )
    if kind == "sameclock":
        t1 = args[0:3]
        t2 = args[3:6]
        rots = lambda t: (t, (t[1], t[2], t[0]), (t[2], t[0], t[1]))
        out = []
        for u in rots(t1):
            for v in rots(t2):
                out.append(u + v)
                out.append(v + u)
        return tuple(out)
    if kind in ("sameside", "nsameside"):
        p1, a1, b1, p2, a2, b2 = args
        out = []
        for s1 in ((a1, b1), (b1, a1)):
            for s2 in ((a2, b2), (b2, a2)):
                t1 = (p1,) + s1
                t2 = (p2,) + s2
                out.append(t1 + t2)
                out.append(t2 + t1)
        return tuple(out)
    raise InvalidPredicate(f"unknown kind {kind!r}")


def canonical_args(kind: str, args: tuple[str, ...]) -> tuple[str, ...]:
    # closed forms where the orbit is large; min-over-orbit elsewhere
    if kind in ("coll", "ncoll", "cyclic"):
        return tuple(sorted(args))
    if kind == "circle":
        return (args[0],) + tuple(sorted(args[1:]))
    if kind == "midp":
        return (args[0],) + _ps(args[1], args[2])
    return min(symmetry_variants(kind, args))


def is_tautology(f: Fact) -> bool:
    """True for facts that hold in every witness, e.g. ∠(AB,AB) = ∠(CD,CD).

    Such statements pass validation (each segment is non-degenerate) but
    carry no information, so deduction refuses to store them.
    """
    if f.kind in ("eqangle", "eqratio"):
        pairs = [frozenset(f.args[i : i + 2]) for i in range(0, 8, 2)]
        if pairs[0] == pairs[1] and pairs[2] == pairs[3]:
            return True
        return pairs[0] == pairs[2] and pairs[1] == pairs[3]
    if f.kind in ("cong", "para"):
        return frozenset(f.args[:2]) == frozenset(f.args[2:])
    if f.kind == "rconst":
        return frozenset(f.args[:2]) == frozenset(f.args[2:]) and f.value == 1
    return False


def is_mirror_form(f: Fact) -> bool:
    """eqangle/eqratio whose two sides swap the same segment pair.

    ∠(PQ,RS) = ∠(RS,PQ) compresses to "PQ ∥ RS or PQ ⊥ RS"; true but too
    contorted to pose as a goal.
    """
    if f.kind not in ("eqangle", "eqratio"):
        return False
    pairs = [frozenset(f.args[i : i + 2]) for i in range(0, 8, 2)]
    return pairs[0] == pairs[3] and pairs[1] == pairs[2]


@lru_cache(maxsize=1 << 17)
def _canonical_fact(kind: str, args: tuple[str, ...], value: Fraction | None) -> Fact:
    validate(kind, args, value)
    return Fact(kind, canonical_args(kind, args), value)


def canonicalize(kind_or_fact, args: tuple[str, ...] | None = None, value: Fraction | None = None) -> Fact:
    """Validated canonical Fact from a raw (kind, args, value) or Fact."""
    if isinstance(kind_or_fact, Fact):
        kind, args, value = kind_or_fact.kind, kind_or_fact.args, kind_or_fact.value
    else:
        kind = kind_or_fact
        assert args is not None
    return _canonical_fact(kind, tuple(args), value)


def fact(kind: str, *args: str, value: Fraction | str | None = None) -> Fact:
    if isinstance(value, str):
        value = Fraction(value)
    return canonicalize(kind, tuple(args), value)


def parse_fact(text: str) -> Fact:
    """Parse the plain text form, e.g. 'midp M A B' or 'rconst M A A B 1/2'."""
    toks = text.split()
    if not toks:
        raise InvalidPredicate("empty predicate text")
    kind = toks[0]
    if kind == "rconst":
        if len(toks) < 3:
            raise InvalidPredicate(f"rconst too short: {text!r}")
        return canonicalize(kind, tuple(toks[1:-1]), Fraction(toks[-1]))
    return canonicalize(kind, tuple(toks[1:]))


def format_fact(f: Fact) -> str:
    parts = [f.kind, *f.args]
    if f.value is not None:
        parts.append(f"{f.value.numerator}/{f.value.denominator}")
    return " ".join(parts)


@dataclass(frozen=True)
class Witness:
    """Concrete coordinates for every point label in play."""

    coords: dict[str, tuple[float, float]]

    def xy(self, label: str) -> tuple[float, float]:
        try:
            return self.coords[label]
        except KeyError:
            raise UnknownPoint(label) from None

    def has(self, label: str) -> bool:
        return label in self.coords

    def labels(self) -> list[str]:
        return sorted(self.coords)

    def check_finite(self) -> None:
        for name, (x, y) in self.coords.items():
            if not (isfinite(x) and isfinite(y)):
                raise ValueError(f"non-finite coordinate for {name}")


@dataclass(frozen=True)
class NondegenConfig:
    area_tol: float = 1e-9
    angle_tol_rad: float = 1e-6


_DEFAULT_NONDEGEN = NondegenConfig()


def check_nondegenerate(w: Witness, p: Fact, cfg: NondegenConfig = _DEFAULT_NONDEGEN) -> bool:
    """Numeric truth of a non-degeneracy premise on the witness."""
    if p.kind not in NONDEGEN_KINDS:
        raise InvalidPredicate(f"{p.kind} is not a non-degeneracy kind")
    pts = [w.xy(a) for a in p.args]
    if p.kind == "ncoll":
        # no three of the points may be collinear
        return all(
            abs(kernels.signed_area(ax, ay, bx, by, cx, cy)) > cfg.area_tol
            for (ax, ay), (bx, by), (cx, cy) in combinations(pts, 3)
        )
    if p.kind == "npara":
        (ax, ay), (bx, by), (cx, cy), (dx, dy) = pts
        gap = kernels.line_angle_between_deg(ax, ay, bx, by, cx, cy, dx, dy)
        return gap > degrees(cfg.angle_tol_rad)
    if p.kind == "sameclock":
        (ax, ay), (bx, by), (cx, cy), (px, py), (qx, qy), (rx, ry) = pts
        s1 = kernels.signed_area(ax, ay, bx, by, cx, cy)
        s2 = kernels.signed_area(px, py, qx, qy, rx, ry)
        if abs(s1) <= cfg.area_tol or abs(s2) <= cfg.area_tol:
            return False
        return (s1 > 0) == (s2 > 0)
    # sameside(p1,a1,b1,p2,a2,b2): p1 against segment a1 b1, p2 against a2 b2;
    # agreeing dot signs mean both division points are inside, or both outside
    (p1x, p1y), (a1x, a1y), (b1x, b1y), (p2x, p2y), (a2x, a2y), (b2x, b2y) = pts
    d1 = kernels.side_dot(p1x, p1y, a1x, a1y, b1x, b1y)
    d2 = kernels.side_dot(p2x, p2y, a2x, a2y, b2x, b2y)
    same = d1 != 0.0 and d2 != 0.0 and (d1 > 0) == (d2 > 0)
    return same if p.kind == "sameside" else not same
