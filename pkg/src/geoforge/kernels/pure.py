"""Pure-Python witness kernels.

Reference implementation of the numeric primitives everything downstream
leans on: segment length, signed area, angle measures, circumcenter, and
the sidedness dot product. The compiled twin in ``_fast.pyx`` mirrors these
expressions token for token (and is built with contraction disabled) so both
backends produce bit-identical doubles; keep the two files in lockstep.
"""

from __future__ import annotations

from math import atan2, sqrt, pi

RAD2DEG = 180.0 / pi


def seg_len(ax: float, ay: float, bx: float, by: float) -> float:
    dx = bx - ax
    dy = by - ay
    return sqrt(dx * dx + dy * dy)


def signed_area(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> float:
    return 0.5 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


def angle_at_deg(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> float:
    """Angle at vertex B of A-B-C, degrees in [0, 180]."""
    ux = ax - bx
    uy = ay - by
    vx = cx - bx
    vy = cy - by
    cross = ux * vy - uy * vx
    dot = ux * vx + uy * vy
    return atan2(abs(cross), dot) * RAD2DEG


def line_angle_between_deg(
    ax: float, ay: float, bx: float, by: float,
    cx: float, cy: float, dx: float, dy: float,
) -> float:
    """Angle between undirected lines AB and CD, degrees in [0, 90]."""
    ux = bx - ax
    uy = by - ay
    vx = dx - cx
    vy = dy - cy
    cross = ux * vy - uy * vx
    dot = ux * vx + uy * vy
    return atan2(abs(cross), abs(dot)) * RAD2DEG


def circumcenter(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> tuple[float, float]:
    """Perpendicular-bisector intersection in closed form.

    Raises ValueError on exactly collinear input; callers screen near-collinear
    triples with signed_area before asking.
    """
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        raise ValueError("collinear points have no circumcenter")
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ox = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    oy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return (ox, oy)


def side_dot(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> float:
    """(A-P)·(B-P): negative iff P lies strictly inside segment AB's span."""
    return (ax - px) * (bx - px) + (ay - py) * (by - py)
