"""Plot-code data model: parse, validate, serialize, resolve, simplify.

The JSON wire shape is the contract everything else speaks:

    {
      "points": {"A": [x, y], ...},
      "segments": [["A", "B"], ...],
      "circles": [["C1", "O", r], ["C2", "O", "P"],
                  ["C3", "A", "B", "diameter"], ["C4", "A", "B", "C"]],
      "quantities": ["length(A, B)", ...],
      "annotations": {"right_angles": [["A","B","C"]],
                      "length_of_line": [[["A","B"], "5"]],
                      "measure_of_angle": [[["A","B","C"], "30"]]}
    }
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from math import floor, hypot, isfinite

from geoforge import kernels
from geoforge.quantities import (
    Atom,
    BinOp,
    CIRCLE_ID_RE,
    DslError,
    Number,
    parse_quantity,
    parse_value_literal,
)


class SchemaError(ValueError):
    def __init__(self, field_name: str, message: str = "") -> None:
        self.field = field_name
        super().__init__(f"{field_name}: {message}" if message else field_name)


class DanglingLabel(SchemaError):
    def __init__(self, label: str, where: str = "") -> None:
        self.label = label
        super().__init__(where or "labels", f"unknown label {label!r}")


class DuplicateCircleId(SchemaError):
    def __init__(self, cid: str) -> None:
        self.circle_id = cid
        super().__init__("circles", f"duplicate circle id {cid!r}")


class CoordError(SchemaError):
    def __init__(self, label: str, message: str) -> None:
        super().__init__("points", f"{label}: {message}")


class DegenerateCircle(ValueError):
    pass


_STRICT_LABEL_RE = re.compile(r"^[A-Z][A-Za-z0-9]?$")

FORMS = ("center_radius", "center_point", "diameter", "three_points")


@dataclass(frozen=True)
class CircleSpec:
    id: str
    form: str
    center: str | None = None
    radius: float | None = None
    points: tuple[str, ...] = ()

    def labels(self) -> tuple[str, ...]:
        return ((self.center,) if self.center else ()) + self.points

    def to_array(self) -> list:
        if self.form == "center_radius":
            return [self.id, self.center, self.radius]
        if self.form == "center_point":
            return [self.id, self.center, self.points[0]]
        if self.form == "diameter":
            return [self.id, self.points[0], self.points[1], "diameter"]
        return [self.id, *self.points]


@dataclass
class Annotations:
    right_angles: list[tuple[str, str, str]] = field(default_factory=list)
    length_of_line: list[tuple[tuple[str, str], str]] = field(default_factory=list)
    measure_of_angle: list[tuple[tuple[str, str, str], str]] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (self.right_angles or self.length_of_line or self.measure_of_angle)

    def to_dict(self) -> dict:
        return {
            "right_angles": [list(t) for t in self.right_angles],
            "length_of_line": [[list(pair), v] for pair, v in self.length_of_line],
            "measure_of_angle": [[list(t), v] for t, v in self.measure_of_angle],
        }


@dataclass
class PlotCode:
    points: dict[str, tuple[float, float]]
    segments: list[tuple[str, str]]
    circles: list[CircleSpec]
    quantities: list[str]
    annotations: Annotations

    def circle_by_id(self, cid: str) -> CircleSpec:
        for c in self.circles:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def resolved_circles(self) -> dict[str, tuple[tuple[float, float], float]]:
        return {c.id: resolve_circle(c, self.points) for c in self.circles}

    def to_dict(self) -> dict:
        return {
            "points": {k: [x, y] for k, (x, y) in sorted(self.points.items())},
            "segments": [list(s) for s in sorted(set(self.segments))],
            "circles": [c.to_array() for c in self.circles],
            "quantities": list(self.quantities),
            "annotations": self.annotations.to_dict(),
        }


REQUIRED_KEYS = ("points", "segments", "circles", "quantities", "annotations")
ANNOTATION_KEYS = ("right_angles", "length_of_line", "measure_of_angle")


def _as_obj(raw) -> dict:
    if isinstance(raw, (bytes, str)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as e:
            raise SchemaError("json", str(e)) from None
    if not isinstance(raw, dict):
        raise SchemaError("json", "top level must be an object")
    return raw


def _coord_pair(label: str, value) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise CoordError(label, "coordinate must be a pair")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise CoordError(label, f"non-numeric coordinate {v!r}")
        v = float(v)
        if not isfinite(v):
            raise CoordError(label, "non-finite coordinate")
        out.append(v)
    return (out[0], out[1])


def _parse_circle(entry, points: dict, strict: bool) -> CircleSpec:
    if not isinstance(entry, (list, tuple)) or not (3 <= len(entry) <= 4):
        raise SchemaError("circles", f"bad circle entry {entry!r}")
    cid = entry[0]
    if not isinstance(cid, str) or not CIRCLE_ID_RE.match(cid):
        raise SchemaError("circles", f"bad circle id {cid!r} (want C<digits>)")
    rest = entry[1:]
    if len(rest) == 2 and isinstance(rest[0], str) and isinstance(rest[1], (int, float)) and not isinstance(rest[1], bool):
        center, radius = rest[0], float(rest[1])
        if center not in points:
            raise DanglingLabel(center, "circles")
        if not isfinite(radius) or radius <= 0:
            raise SchemaError("circles", f"{cid}: radius must be positive, got {radius!r}")
        return CircleSpec(cid, "center_radius", center=center, radius=radius)
    if len(rest) == 2 and all(isinstance(x, str) for x in rest):
        for lab in rest:
            if lab not in points:
                raise DanglingLabel(lab, "circles")
        return CircleSpec(cid, "center_point", center=rest[0], points=(rest[1],))
    if len(rest) == 3 and rest[2] == "diameter" and all(isinstance(x, str) for x in rest[:2]):
        for lab in rest[:2]:
            if lab not in points:
                raise DanglingLabel(lab, "circles")
        if rest[0] == rest[1]:
            raise SchemaError("circles", f"{cid}: diameter endpoints coincide")
        return CircleSpec(cid, "diameter", points=(rest[0], rest[1]))
    if len(rest) == 3 and all(isinstance(x, str) for x in rest):
        for lab in rest:
            if lab not in points:
                raise DanglingLabel(lab, "circles")
        if len(set(rest)) != 3:
            raise SchemaError("circles", f"{cid}: three points must be distinct")
        return CircleSpec(cid, "three_points", points=tuple(rest))
    raise SchemaError("circles", f"unrecognized circle form {entry!r}")


def _parse_annotations(raw, points: dict, strict: bool) -> Annotations:
    if not isinstance(raw, dict):
        raise SchemaError("annotations", "must be an object")
    unknown = set(raw) - set(ANNOTATION_KEYS)
    if unknown and strict:
        raise SchemaError("annotations", f"unknown keys {sorted(unknown)}")
    if strict:
        for k in ANNOTATION_KEYS:
            if k not in raw:
                raise SchemaError(f"annotations.{k}", "missing")
    ann = Annotations()

    def check_labels(labels, where):
        for lab in labels:
            if not isinstance(lab, str):
                raise SchemaError(where, f"label must be a string, got {lab!r}")
            if lab not in points:
                raise DanglingLabel(lab, where)

    for entry in raw.get("right_angles", []) or []:
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise SchemaError("annotations.right_angles", f"bad triple {entry!r}")
        check_labels(entry, "annotations.right_angles")
        ann.right_angles.append((entry[0], entry[1], entry[2]))
    for entry in raw.get("length_of_line", []) or []:
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or not isinstance(entry[0], (list, tuple))
            or len(entry[0]) != 2
            or not isinstance(entry[1], str)
        ):
            raise SchemaError("annotations.length_of_line", f"bad entry {entry!r}")
        check_labels(entry[0], "annotations.length_of_line")
        if strict:
            parse_value_literal(entry[1], "length")
        ann.length_of_line.append(((entry[0][0], entry[0][1]), entry[1]))
    for entry in raw.get("measure_of_angle", []) or []:
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or not isinstance(entry[0], (list, tuple))
            or len(entry[0]) != 3
            or not isinstance(entry[1], str)
        ):
            raise SchemaError("annotations.measure_of_angle", f"bad entry {entry!r}")
        check_labels(entry[0], "annotations.measure_of_angle")
        if strict:
            parse_value_literal(entry[1], "angle")
        ann.measure_of_angle.append(((entry[0][0], entry[0][1], entry[0][2]), entry[1]))
    return ann


def _expr_labels(e) -> tuple[set[str], set[str]]:
    """(point labels, circle ids) referenced by a parsed quantity."""
    pts: set[str] = set()
    cids: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            for a in node.args:
                (cids if CIRCLE_ID_RE.match(a) else pts).add(a)
        elif isinstance(node, BinOp):
            stack.extend((node.lhs, node.rhs))
        else:
            assert isinstance(node, Number)
    return pts, cids


def parse_plotcode(raw, strict: bool = False) -> PlotCode:
    """Validate raw JSON (bytes, text, or an already-decoded object).

    Lenient mode (the default, meant for model output) ignores unknown keys
    and defers value-literal and DSL validation to the verifier; strict mode
    front-loads every check.
    """
    obj = _as_obj(raw)
    unknown = set(obj) - set(REQUIRED_KEYS)
    if unknown and strict:
        raise SchemaError("top-level", f"unknown keys {sorted(unknown)}")
    for key in REQUIRED_KEYS:
        if key not in obj:
            raise SchemaError(key, "missing")

    raw_points = obj["points"]
    if not isinstance(raw_points, dict):
        raise SchemaError("points", "must be an object")
    points: dict[str, tuple[float, float]] = {}
    for label, value in raw_points.items():
        if not isinstance(label, str) or not label:
            raise SchemaError("points", f"bad label {label!r}")
        if CIRCLE_ID_RE.match(label):
            raise SchemaError("points", f"label {label!r} collides with circle ids")
        if strict and not _STRICT_LABEL_RE.match(label):
            raise SchemaError("points", f"label {label!r} not a short point name")
        points[label] = _coord_pair(label, value)

    raw_segments = obj["segments"]
    if not isinstance(raw_segments, list):
        raise SchemaError("segments", "must be a list")
    segments: list[tuple[str, str]] = []
    for entry in raw_segments:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise SchemaError("segments", f"bad segment {entry!r}")
        a, b = entry
        if not (isinstance(a, str) and isinstance(b, str)):
            raise SchemaError("segments", f"bad segment {entry!r}")
        for lab in (a, b):
            if lab not in points:
                raise DanglingLabel(lab, "segments")
        if a == b:
            raise SchemaError("segments", f"zero-length segment {a!r}")
        segments.append((a, b) if a <= b else (b, a))

    raw_circles = obj["circles"]
    if not isinstance(raw_circles, list):
        raise SchemaError("circles", "must be a list")
    circles: list[CircleSpec] = []
    seen_ids: set[str] = set()
    for entry in raw_circles:
        spec = _parse_circle(entry, points, strict)
        if spec.id in seen_ids:
            raise DuplicateCircleId(spec.id)
        seen_ids.add(spec.id)
        circles.append(spec)

    raw_quant = obj["quantities"]
    if not isinstance(raw_quant, list) or not all(isinstance(q, str) for q in raw_quant):
        raise SchemaError("quantities", "must be a list of strings")
    if strict:
        for q in raw_quant:
            try:
                expr = parse_quantity(q)
            except DslError as e:
                raise SchemaError("quantities", f"{q!r}: {e}") from None
            pts, cids = _expr_labels(expr)
            for lab in sorted(pts):
                if lab not in points:
                    raise DanglingLabel(lab, "quantities")
            for cid in sorted(cids):
                if cid not in seen_ids:
                    raise DanglingLabel(cid, "quantities")

    annotations = _parse_annotations(obj["annotations"], points, strict)
    return PlotCode(points, sorted(set(segments)), circles, list(raw_quant), annotations)


def resolve_circle(spec: CircleSpec, points: dict[str, tuple[float, float]]) -> tuple[tuple[float, float], float]:
    def xy(label: str) -> tuple[float, float]:
        if label not in points:
            raise DanglingLabel(label, "circles")
        return points[label]

    if spec.form == "center_radius":
        if spec.radius is None or spec.radius <= 0:
            raise DegenerateCircle(f"{spec.id}: non-positive radius")
        return xy(spec.center), float(spec.radius)
    if spec.form == "center_point":
        (ox, oy), (px, py) = xy(spec.center), xy(spec.points[0])
        r = kernels.seg_len(ox, oy, px, py)
        if r == 0.0:
            raise DegenerateCircle(f"{spec.id}: center equals its boundary point")
        return (ox, oy), r
    if spec.form == "diameter":
        (ax, ay), (bx, by) = xy(spec.points[0]), xy(spec.points[1])
        r = kernels.seg_len(ax, ay, bx, by) / 2.0
        if r == 0.0:
            raise DegenerateCircle(f"{spec.id}: zero-length diameter")
        return ((ax + bx) / 2.0, (ay + by) / 2.0), r
    if spec.form == "three_points":
        (ax, ay), (bx, by), (cx, cy) = (xy(p) for p in spec.points)
        scale = max(
            kernels.seg_len(ax, ay, bx, by),
            kernels.seg_len(bx, by, cx, cy),
            kernels.seg_len(cx, cy, ax, ay),
            1.0,
        )
        if abs(kernels.signed_area(ax, ay, bx, by, cx, cy)) <= 1e-10 * scale * scale:
            raise DegenerateCircle(f"{spec.id}: collinear three-point circle")
        try:
            ox, oy = kernels.circumcenter(ax, ay, bx, by, cx, cy)
        except ValueError:
            raise DegenerateCircle(f"{spec.id}: collinear three-point circle") from None
        return (ox, oy), kernels.seg_len(ox, oy, ax, ay)
    raise DegenerateCircle(f"{spec.id}: unknown form {spec.form!r}")


def canonical_serialize(pc: PlotCode) -> bytes:
    """Stable bytes: fixed key order, sorted labels and segments, repr floats."""
    return (json.dumps(pc.to_dict(), ensure_ascii=False) + "\n").encode("utf-8")


def _synth_center_labels(taken: set[str]):
    i = 1
    while True:
        label = f"O{i}"
        if label not in taken:
            yield label
        i += 1


def simplify_for_training(pc: PlotCode) -> PlotCode:
    """Replace every circle by a center plus the integer part of its radius."""
    points = dict(pc.points)
    synth = _synth_center_labels(set(points))
    circles: list[CircleSpec] = []
    for spec in pc.circles:
        (ox, oy), r = resolve_circle(spec, pc.points)
        if spec.form in ("center_radius", "center_point"):
            center = spec.center
        else:
            center = next(synth)
            points[center] = (ox, oy)
        circles.append(CircleSpec(spec.id, "center_radius", center=center, radius=float(floor(r))))
    return PlotCode(
        points=points,
        segments=list(pc.segments),
        circles=circles,
        quantities=list(pc.quantities),
        annotations=pc.annotations,
    )


def plotcode_equal(a: PlotCode, b: PlotCode) -> bool:
    return a.to_dict() == b.to_dict()


def bounding_box(pc: PlotCode) -> tuple[float, float, float, float]:
    """(xmin, ymin, xmax, ymax) over points and resolved circle extents."""
    if not pc.points:
        raise ValueError("empty scene has no bounding box")
    xs = [x for x, _ in pc.points.values()]
    ys = [y for _, y in pc.points.values()]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    for spec in pc.circles:
        (ox, oy), r = resolve_circle(spec, pc.points)
        xmin = min(xmin, ox - r)
        xmax = max(xmax, ox + r)
        ymin = min(ymin, oy - r)
        ymax = max(ymax, oy + r)
    return xmin, ymin, xmax, ymax


def diagonal(pc: PlotCode) -> float:
    xmin, ymin, xmax, ymax = bounding_box(pc)
    return hypot(xmax - xmin, ymax - ymin) or 1.0
