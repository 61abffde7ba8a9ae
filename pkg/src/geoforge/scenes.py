"""Constructive scene sampling.

Scenes are grown from a random base triangle by applying construction
templates (midpoints, feet of perpendiculars, parallels through a point,
circumcenters, rational division points, fourth points on a circumcircle).
Every template emits the predicates its construction guarantees, so the
returned fact set is satisfied by the returned witness by construction.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass, field
from fractions import Fraction
from math import cos, hypot, pi, sin

from geoforge import kernels
from geoforge.predicates import Fact, Witness, fact

MIN_SEP_FRAC = 1e-3
MIN_HEIGHT_FRAC = 1e-2


class InvalidBudget(ValueError):
    pass


class SamplingFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class SceneBudget:
    max_points: int = 10
    max_constructions: int = 6
    retry_cap: int = 200

    def validate(self) -> None:
        if self.max_points < 3:
            raise InvalidBudget("need at least 3 points for the base triangle")
        if self.max_constructions < 0 or self.retry_cap < 1:
            raise InvalidBudget("non-positive construction budget")


@dataclass
class SceneSample:
    witness: Witness
    facts: list[Fact]
    segments: list[tuple[str, str]]
    # drawing hints: ("center", O, A) for a known center, ("three", A, B, C)
    circles: list[tuple[str, ...]]
    log: list[dict] = field(default_factory=list)


def _label_sequence():
    yield from string.ascii_uppercase
    for digit in "123456789":
        for ch in string.ascii_uppercase:
            if ch == "C":
                continue  # C<digits> is reserved for circle ids
            yield f"{ch}{digit}"


class _Builder:
    def __init__(self, rng: random.Random, budget: SceneBudget) -> None:
        self.rng = rng
        self.budget = budget
        self.coords: dict[str, tuple[float, float]] = {}
        self.facts: list[Fact] = []
        self._fact_set: set[Fact] = set()
        self.segments: set[tuple[str, str]] = set()
        self.circles: list[tuple[str, ...]] = []
        # (cx, cy, r, point set) per geometric circle already in play
        self._circle_reg: list[tuple[float, float, float, set[str]]] = []
        self.log: list[dict] = []
        self._labels = _label_sequence()

    # -- bookkeeping -------------------------------------------------

    def next_label(self) -> str:
        return next(self._labels)

    def diameter(self) -> float:
        xs = [x for x, _ in self.coords.values()]
        ys = [y for _, y in self.coords.values()]
        if len(xs) < 2:
            return 1.0
        return hypot(max(xs) - min(xs), max(ys) - min(ys))

    def separated(self, x: float, y: float) -> bool:
        min_sep = MIN_SEP_FRAC * self.diameter()
        return all(hypot(x - px, y - py) >= min_sep for px, py in self.coords.values())

    def height_ok(self, a: str, b: str, c: str) -> bool:
        (ax, ay), (bx, by), (cx, cy) = (self.coords[p] for p in (a, b, c))
        area = abs(kernels.signed_area(ax, ay, bx, by, cx, cy))
        base = max(
            kernels.seg_len(ax, ay, bx, by),
            kernels.seg_len(bx, by, cx, cy),
            kernels.seg_len(cx, cy, ax, ay),
        )
        if base == 0.0:
            return False
        return 2.0 * area / base >= MIN_HEIGHT_FRAC * self.diameter()

    def add_point(self, label: str, x: float, y: float) -> None:
        self.coords[label] = (x, y)

    def emit(self, f: Fact) -> None:
        if f not in self._fact_set:
            self._fact_set.add(f)
            self.facts.append(f)

    def add_segment(self, a: str, b: str) -> None:
        self.segments.add((a, b) if a <= b else (b, a))

    def pick_points(self, n: int) -> list[str]:
        return self.rng.sample(sorted(self.coords), n)

    def circle_conflict(self, cx: float, cy: float, r: float, pts: set[str]) -> bool:
        """True when pts would weld two geometrically different circles."""
        for ox, oy, rr, s in self._circle_reg:
            if len(s & pts) >= 2:
                scale = max(1.0, rr)
                if hypot(ox - cx, oy - cy) > 1e-7 * scale or abs(rr - r) > 1e-7 * scale:
                    return True
        return False

    def register_circle(self, cx: float, cy: float, r: float, pts: set[str]) -> None:
        for i, (ox, oy, rr, s) in enumerate(self._circle_reg):
            scale = max(1.0, rr)
            if hypot(ox - cx, oy - cy) <= 1e-7 * scale and abs(rr - r) <= 1e-7 * scale:
                self._circle_reg[i] = (ox, oy, rr, s | pts)
                return
        self._circle_reg.append((cx, cy, r, set(pts)))

    # -- templates ---------------------------------------------------

    def base_triangle(self) -> None:
        rng = self.rng
        for _ in range(100):
            pts = [(rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)) for _ in range(3)]
            (ax, ay), (bx, by), (cx, cy) = pts
            sides = [
                kernels.seg_len(ax, ay, bx, by),
                kernels.seg_len(bx, by, cx, cy),
                kernels.seg_len(cx, cy, ax, ay),
            ]
            area = abs(kernels.signed_area(ax, ay, bx, by, cx, cy))
            if min(sides) < 2.0 or 2.0 * area / max(sides) < 2.0:
                continue
            for label, (x, y) in zip(("A", "B", "C"), pts):
                self.add_point(label, x, y)
            self._labels = _label_sequence()
            for _ in range(3):
                next(self._labels)  # A, B, C are taken
            self.add_segment("A", "B")
            self.add_segment("B", "C")
            self.add_segment("C", "A")
            self.log.append({"template": "base_triangle", "points": ["A", "B", "C"]})
            return
        raise SamplingFailed("could not draw a non-degenerate base triangle")

    def t_midpoint(self) -> bool:
        a, b = self.pick_points(2)
        (ax, ay), (bx, by) = self.coords[a], self.coords[b]
        x, y = (ax + bx) / 2.0, (ay + by) / 2.0
        if not self.separated(x, y):
            return False
        m = self.next_label()
        self.add_point(m, x, y)
        self.emit(fact("midp", m, a, b))
        self.emit(fact("coll", m, a, b))
        self.add_segment(a, b)
        self.log.append({"template": "midpoint", "points": [m, a, b]})
        return True

    def t_midsegment(self) -> bool:
        if len(self.coords) + 2 > self.budget.max_points:
            return False
        a, b, c = self.pick_points(3)
        if not self.height_ok(a, b, c):
            return False
        (ax, ay), (bx, by), (cx, cy) = (self.coords[q] for q in (a, b, c))
        mx, my = (ax + bx) / 2.0, (ay + by) / 2.0
        nx, ny = (ax + cx) / 2.0, (ay + cy) / 2.0
        if not (self.separated(mx, my) and self.separated(nx, ny)):
            return False
        if hypot(mx - nx, my - ny) < MIN_SEP_FRAC * self.diameter():
            return False
        m = self.next_label()
        n = self.next_label()
        self.add_point(m, mx, my)
        self.add_point(n, nx, ny)
        self.emit(fact("midp", m, a, b))
        self.emit(fact("coll", m, a, b))
        self.emit(fact("midp", n, a, c))
        self.emit(fact("coll", n, a, c))
        self.add_segment(a, b)
        self.add_segment(a, c)
        self.add_segment(m, n)
        self.log.append({"template": "midsegment", "points": [m, n, a, b, c]})
        return True

    def t_reflect(self) -> bool:
        a, b = self.pick_points(2)
        (ax, ay), (bx, by) = self.coords[a], self.coords[b]
        x, y = 2.0 * bx - ax, 2.0 * by - ay
        if not self.separated(x, y):
            return False
        d = self.next_label()
        self.add_point(d, x, y)
        self.emit(fact("midp", b, a, d))
        self.emit(fact("coll", a, b, d))
        self.add_segment(a, d)
        self.log.append({"template": "reflect", "points": [d, a, b]})
        return True

    def t_isosceles_apex(self) -> bool:
        a, b = self.pick_points(2)
        (ax, ay), (bx, by) = self.coords[a], self.coords[b]
        mx, my = (ax + bx) / 2.0, (ay + by) / 2.0
        dx, dy = bx - ax, by - ay
        h = self.rng.choice([-1.0, 1.0]) * self.rng.uniform(0.5, 1.2)
        x, y = mx - h * dy, my + h * dx
        if not self.separated(x, y):
            return False
        p = self.next_label()
        self.add_point(p, x, y)
        self.emit(fact("cong", p, a, p, b))
        self.add_segment(p, a)
        self.add_segment(p, b)
        self.add_segment(a, b)
        self.log.append({"template": "isosceles_apex", "points": [p, a, b]})
        return True

    def t_foot_of_perpendicular(self) -> bool:
        p, a, b = self.pick_points(3)
        (px, py), (ax, ay), (bx, by) = (self.coords[q] for q in (p, a, b))
        if not self.height_ok(p, a, b):
            return False
        dx, dy = bx - ax, by - ay
        t = ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy)
        x, y = ax + t * dx, ay + t * dy
        if not self.separated(x, y):
            return False
        f = self.next_label()
        self.add_point(f, x, y)
        self.emit(fact("perp", p, f, a, b))
        self.emit(fact("coll", f, a, b))
        self.add_segment(a, b)
        self.add_segment(p, f)
        self.log.append({"template": "foot_of_perpendicular", "points": [f, p, a, b]})
        return True

    def t_parallel_through(self) -> bool:
        p, a, b = self.pick_points(3)
        (px, py), (ax, ay), (bx, by) = (self.coords[q] for q in (p, a, b))
        if not self.height_ok(p, a, b):
            return False
        t = self.rng.choice([-1.0, 1.0]) * self.rng.uniform(0.4, 1.1)
        x, y = px + t * (bx - ax), py + t * (by - ay)
        if not self.separated(x, y):
            return False
        q = self.next_label()
        self.add_point(q, x, y)
        self.emit(fact("para", p, q, a, b))
        self.add_segment(a, b)
        self.add_segment(p, q)
        self.log.append({"template": "parallel_through", "points": [q, p, a, b]})
        return True

    def t_ratio_point(self) -> bool:
        a, b = self.pick_points(2)
        (ax, ay), (bx, by) = self.coords[a], self.coords[b]
        f = self.rng.choice(
            [Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4), Fraction(2, 5), Fraction(3, 5)]
        )
        x, y = ax + float(f) * (bx - ax), ay + float(f) * (by - ay)
        if not self.separated(x, y):
            return False
        r = self.next_label()
        self.add_point(r, x, y)
        self.emit(fact("coll", r, a, b))
        self.emit(fact("rconst", r, a, a, b, value=f))
        self.add_segment(a, b)
        self.log.append({"template": "ratio_point", "points": [r, a, b], "ratio": str(f)})
        return True

    def t_circumcenter(self) -> bool:
        a, b, c = self.pick_points(3)
        if not self.height_ok(a, b, c):
            return False
        (ax, ay), (bx, by), (cx, cy) = (self.coords[q] for q in (a, b, c))
        ox, oy = kernels.circumcenter(ax, ay, bx, by, cx, cy)
        r = kernels.seg_len(ox, oy, ax, ay)
        if r > 2.0 * self.diameter() or not self.separated(ox, oy):
            return False
        if self.circle_conflict(ox, oy, r, {a, b, c}):
            return False
        o = self.next_label()
        self.add_point(o, ox, oy)
        self.emit(fact("circle", o, a, b, c))
        self.emit(fact("cong", o, a, o, b))
        self.emit(fact("cong", o, b, o, c))
        self.emit(fact("cong", o, c, o, a))
        self.register_circle(ox, oy, r, {a, b, c})
        self.circles.append(("center", o, a))
        self.log.append({"template": "circumcenter", "points": [o, a, b, c]})
        return True

    def t_point_on_circumcircle(self) -> bool:
        a, b, c = self.pick_points(3)
        if not self.height_ok(a, b, c):
            return False
        (ax, ay), (bx, by), (cx, cy) = (self.coords[q] for q in (a, b, c))
        ox, oy = kernels.circumcenter(ax, ay, bx, by, cx, cy)
        r = kernels.seg_len(ox, oy, ax, ay)
        if r > 2.0 * self.diameter():
            return False
        if self.circle_conflict(ox, oy, r, {a, b, c}):
            return False
        theta = self.rng.uniform(0.0, 2.0 * pi)
        x, y = ox + r * cos(theta), oy + r * sin(theta)
        if not self.separated(x, y):
            return False
        d = self.next_label()
        self.add_point(d, x, y)
        self.emit(fact("cyclic", a, b, c, d))
        self.register_circle(ox, oy, r, {a, b, c, d})
        self.circles.append(("three", a, b, c))
        self.log.append({"template": "point_on_circumcircle", "points": [d, a, b, c]})
        return True


def sample_scene(rng_seed: int, budget: SceneBudget | None = None) -> SceneSample:
    """Deterministically grow one scene; same seed, same output."""
    budget = budget or SceneBudget()
    budget.validate()
    rng = random.Random(rng_seed)
    builder = _Builder(rng, budget)
    builder.base_triangle()

    templates = [
        builder.t_midpoint,
        builder.t_midsegment,
        builder.t_reflect,
        builder.t_foot_of_perpendicular,
        builder.t_parallel_through,
        builder.t_ratio_point,
        builder.t_isosceles_apex,
        builder.t_circumcenter,
        builder.t_point_on_circumcircle,
    ]
    built = 0
    attempts = 0
    while (
        built < budget.max_constructions
        and len(builder.coords) < budget.max_points
        and attempts < budget.retry_cap
    ):
        attempts += 1
        if rng.choice(templates)():
            built += 1
    if built == 0:
        raise SamplingFailed(f"no construction succeeded in {attempts} draws")

    witness = Witness(dict(builder.coords))
    witness.check_finite()
    return SceneSample(
        witness=witness,
        facts=list(builder.facts),
        segments=sorted(builder.segments),
        circles=list(builder.circles),
        log=builder.log,
    )
