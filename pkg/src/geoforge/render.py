"""Deterministic SVG rendering plus a geometric quality gate.

World coordinates are y-up; the y axis is flipped only inside the projection
to screen space, never in the data. Every emitted coordinate is formatted to
four decimals, so equal inputs yield byte-identical SVG.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import hypot

from geoforge.plotcode import PlotCode, bounding_box, diagonal

VIEW = 480.0
PAD_FRAC = 0.08
FONT_SIZE = 14.0
CHAR_W = 8.4
DOT_R = 3.0
LABEL_GAP = 13.0
MARK = 11.0


class RenderUnavailable(RuntimeError):
    pass


@dataclass(frozen=True)
class QualityConfig:
    max_label_overlap: float = 0.25
    min_sep_frac: float = 0.02
    min_sliver_ratio: float = 0.02


@dataclass
class QualityReport:
    passed: bool
    reasons: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "reasons": list(self.reasons)}


def _fmt(v: float) -> str:
    s = f"{v:.4f}"
    return "0.0000" if s == "-0.0000" else s


class _Projection:
    def __init__(self, pc: PlotCode) -> None:
        x0, y0, x1, y1 = bounding_box(pc)
        span = max(x1 - x0, y1 - y0, 1e-9)
        pad = PAD_FRAC * span
        self.scale = (VIEW - 2.0) / (span + 2.0 * pad)
        # center the drawing inside the square viewport
        self.ox = 1.0 + self.scale * (pad - x0 + (span - (x1 - x0)) / 2.0)
        self.oy = 1.0 + self.scale * (pad - y0 + (span - (y1 - y0)) / 2.0)

    def to_screen(self, x: float, y: float) -> tuple[float, float]:
        sx = self.ox + self.scale * x
        sy = VIEW - (self.oy + self.scale * y)
        return sx, sy


def _unit(dx: float, dy: float) -> tuple[float, float]:
    n = hypot(dx, dy)
    if n < 1e-12:
        return (1.0, 0.0)
    return (dx / n, dy / n)


def _label_direction(pc: PlotCode, label: str) -> tuple[float, float]:
    """Place a label away from its segment neighbours: opposite the sum of
    unit vectors toward them, falling back to +x when that sum vanishes."""
    x, y = pc.points[label]
    sx = sy = 0.0
    for a, b in pc.segments:
        other = b if a == label else a if b == label else None
        if other is None:
            continue
        ox, oy = pc.points[other]
        ux, uy = _unit(ox - x, oy - y)
        sx += ux
        sy += uy
    if hypot(sx, sy) < 1e-9:
        return (1.0, 0.0)
    return _unit(-sx, -sy)


def _label_boxes(pc: PlotCode, proj: _Projection) -> dict[str, tuple[float, float, float, float]]:
    boxes = {}
    for label in sorted(pc.points):
        x, y = pc.points[label]
        dx, dy = _label_direction(pc, label)
        px, py = proj.to_screen(x, y)
        # screen y grows downward, so flip the offset's y component
        cx = px + dx * LABEL_GAP
        cy = py - dy * LABEL_GAP
        w = CHAR_W * len(label)
        h = FONT_SIZE
        boxes[label] = (cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    return boxes


def render_svg(pc: PlotCode) -> str:
    """Render a plot code to standalone SVG text."""
    proj = _Projection(pc)
    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_fmt(VIEW)} {_fmt(VIEW)}"'
        f' width="{_fmt(VIEW)}" height="{_fmt(VIEW)}">'
    )
    out.append(f'<rect x="0" y="0" width="{_fmt(VIEW)}" height="{_fmt(VIEW)}" fill="#ffffff"/>')

    resolved = pc.resolved_circles()
    for cid in sorted(resolved):
        (cx, cy), r = resolved[cid]
        px, py = proj.to_screen(cx, cy)
        out.append(
            f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(r * proj.scale)}"'
            f' fill="none" stroke="#1f2937" stroke-width="1.5"/>'
        )

    for a, b in pc.segments:
        ax, ay = proj.to_screen(*pc.points[a])
        bx, by = proj.to_screen(*pc.points[b])
        out.append(
            f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}"'
            f' stroke="#1f2937" stroke-width="1.5"/>'
        )

    ann = pc.annotations
    for a, b, c in ann.right_angles:
        # small square at vertex b, sides along the two rays
        bx, by = pc.points[b]
        u = _unit(pc.points[a][0] - bx, pc.points[a][1] - by)
        v = _unit(pc.points[c][0] - bx, pc.points[c][1] - by)
        k = MARK / proj.scale
        p1 = proj.to_screen(bx + u[0] * k, by + u[1] * k)
        p2 = proj.to_screen(bx + (u[0] + v[0]) * k, by + (u[1] + v[1]) * k)
        p3 = proj.to_screen(bx + v[0] * k, by + v[1] * k)
        out.append(
            f'<path d="M {_fmt(p1[0])} {_fmt(p1[1])} L {_fmt(p2[0])} {_fmt(p2[1])}'
            f' L {_fmt(p3[0])} {_fmt(p3[1])}" fill="none" stroke="#b91c1c" stroke-width="1.2"/>'
        )

    for (a, b, c), text in ann.measure_of_angle:
        bx, by = pc.points[b]
        u = _unit(pc.points[a][0] - bx, pc.points[a][1] - by)
        v = _unit(pc.points[c][0] - bx, pc.points[c][1] - by)
        mx, my = u[0] + v[0], u[1] + v[1]
        mx, my = _unit(mx, my) if hypot(mx, my) > 1e-9 else (-u[1], u[0])
        k = (MARK + 14.0) / proj.scale
        tx, ty = proj.to_screen(bx + mx * k, by + my * k)
        out.append(
            f'<text x="{_fmt(tx)}" y="{_fmt(ty)}" font-family="sans-serif"'
            f' font-size="{_fmt(FONT_SIZE - 2)}" fill="#b45309" text-anchor="middle"'
            f' dominant-baseline="middle">{text}°</text>'
        )

    for (a, b), text in ann.length_of_line:
        ax, ay = pc.points[a]
        bx, by = pc.points[b]
        mx, my = (ax + bx) / 2.0, (ay + by) / 2.0
        ux, uy = _unit(bx - ax, by - ay)
        off = 10.0 / proj.scale
        tx, ty = proj.to_screen(mx - uy * off, my + ux * off)
        out.append(
            f'<text x="{_fmt(tx)}" y="{_fmt(ty)}" font-family="sans-serif"'
            f' font-size="{_fmt(FONT_SIZE - 2)}" fill="#1d4ed8" text-anchor="middle"'
            f' dominant-baseline="middle">{text}</text>'
        )

    boxes = _label_boxes(pc, proj)
    for label in sorted(pc.points):
        px, py = proj.to_screen(*pc.points[label])
        out.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(DOT_R)}" fill="#111827"/>')
        x0, y0, x1, y1 = boxes[label]
        tx, ty = (x0 + x1) / 2.0, (y0 + y1) / 2.0
        out.append(
            f'<text x="{_fmt(tx)}" y="{_fmt(ty)}" font-family="sans-serif"'
            f' font-size="{_fmt(FONT_SIZE)}" fill="#111827" text-anchor="middle"'
            f' dominant-baseline="middle">{label}</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"


def _overlap_frac(b1: tuple, b2: tuple) -> float:
    w = min(b1[2], b2[2]) - max(b1[0], b2[0])
    h = min(b1[3], b2[3]) - max(b1[1], b2[1])
    if w <= 0.0 or h <= 0.0:
        return 0.0
    inter = w * h
    a1 = (b1[2] - b1[0]) * (b1[3] - b1[1])
    a2 = (b2[2] - b2[0]) * (b2[3] - b2[1])
    return inter / min(a1, a2)


def quality_check(pc: PlotCode, cfg: QualityConfig = QualityConfig()) -> QualityReport:
    """Geometric screening for diagrams too cluttered or degenerate to read."""
    reasons: list[str] = []
    if not pc.points:
        return QualityReport(False, ["no points to draw"])
    diag = diagonal(pc)
    if diag <= 0.0:
        return QualityReport(False, ["diagram has no extent"])

    labels = sorted(pc.points)
    for a, b in combinations(labels, 2):
        ax, ay = pc.points[a]
        bx, by = pc.points[b]
        if hypot(bx - ax, by - ay) < cfg.min_sep_frac * diag:
            reasons.append(f"points {a} and {b} nearly coincide")

    adj = {tuple(sorted(s)) for s in pc.segments}
    for a, b, c in combinations(labels, 3):
        if not ({(a, b) if a < b else (b, a), (b, c) if b < c else (c, b), (a, c) if a < c else (c, a)} <= adj):
            continue
        pa, pb, pc_ = pc.points[a], pc.points[b], pc.points[c]
        sides = [hypot(pb[0] - pa[0], pb[1] - pa[1]), hypot(pc_[0] - pb[0], pc_[1] - pb[1]), hypot(pc_[0] - pa[0], pc_[1] - pa[1])]
        base = max(sides)
        if base <= 0.0:
            continue
        area2 = abs((pb[0] - pa[0]) * (pc_[1] - pa[1]) - (pc_[0] - pa[0]) * (pb[1] - pa[1]))
        ratio = (area2 / base) / base
        # exactly flat triples are a construction (a point on a segment),
        # not a drawing defect; only the nearly-flat band is unreadable
        if 1e-8 <= ratio < cfg.min_sliver_ratio:
            reasons.append(f"triangle {a}{b}{c} is a sliver")

    proj = _Projection(pc)
    boxes = _label_boxes(pc, proj)
    for a, b in combinations(labels, 2):
        frac = _overlap_frac(boxes[a], boxes[b])
        if frac > cfg.max_label_overlap:
            reasons.append(f"labels {a} and {b} overlap")

    return QualityReport(not reasons, reasons)


def render_png(pc: PlotCode, path: str, size: int = 480) -> None:
    """Rasterize with the same projection; needs OpenCV."""
    try:
        import cv2
        import numpy as np
    except ImportError as e:
        raise RenderUnavailable("PNG output needs opencv-python-headless") from e

    k = size / VIEW
    proj = _Projection(pc)

    def pt(x: float, y: float) -> tuple[int, int]:
        sx, sy = proj.to_screen(x, y)
        return (int(round(sx * k)), int(round(sy * k)))

    img = np.full((size, size, 3), 255, dtype=np.uint8)
    ink = (55, 41, 31)
    resolved = pc.resolved_circles()
    for cid in sorted(resolved):
        (cx, cy), r = resolved[cid]
        cvc = pt(cx, cy)
        cv2.circle(img, cvc, int(round(r * proj.scale * k)), ink, 2, cv2.LINE_AA)
    for a, b in pc.segments:
        cv2.line(img, pt(*pc.points[a]), pt(*pc.points[b]), ink, 2, cv2.LINE_AA)
    for label in sorted(pc.points):
        cv2.circle(img, pt(*pc.points[label]), 3, (39, 24, 17), -1, cv2.LINE_AA)
        x, y = pc.points[label]
        dx, dy = _label_direction(pc, label)
        px, py = proj.to_screen(x, y)
        tx = int(round((px + dx * LABEL_GAP) * k))
        ty = int(round((py - dy * LABEL_GAP) * k))
        cv2.putText(img, label, (tx - 5, ty + 5), cv2.FONT_HERSHEY_SIMPLEX, 0.5 * k, (39, 24, 17), 1, cv2.LINE_AA)
    if not cv2.imwrite(path, img):
        raise RenderUnavailable(f"could not write {path}")
