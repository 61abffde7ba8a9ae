# cython: language_level=3
# cython: cdivision=False
"""Compiled witness kernels.

Line-for-line mirror of ``pure.py``; the build disables FP contraction so
both backends return bit-identical doubles. Keep expression trees in sync
with the pure module when editing either file.
"""

from libc.math cimport atan2, sqrt, fabs, M_PI

cdef double RAD2DEG = 180.0 / M_PI


def seg_len(double ax, double ay, double bx, double by):
    cdef double dx = bx - ax
    cdef double dy = by - ay
    return sqrt(dx * dx + dy * dy)


def signed_area(double ax, double ay, double bx, double by, double cx, double cy):
    return 0.5 * ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


def angle_at_deg(double ax, double ay, double bx, double by, double cx, double cy):
    """Angle at vertex B of A-B-C, degrees in [0, 180]."""
    cdef double ux = ax - bx
    cdef double uy = ay - by
    cdef double vx = cx - bx
    cdef double vy = cy - by
    cdef double cross = ux * vy - uy * vx
    cdef double dot = ux * vx + uy * vy
    return atan2(fabs(cross), dot) * RAD2DEG


def line_angle_between_deg(double ax, double ay, double bx, double by,
                           double cx, double cy, double dx, double dy):
    """Angle between undirected lines AB and CD, degrees in [0, 90]."""
    cdef double ux = bx - ax
    cdef double uy = by - ay
    cdef double vx = dx - cx
    cdef double vy = dy - cy
    cdef double cross = ux * vy - uy * vx
    cdef double dot = ux * vx + uy * vy
    return atan2(fabs(cross), fabs(dot)) * RAD2DEG


def circumcenter(double ax, double ay, double bx, double by, double cx, double cy):
    """Perpendicular-bisector intersection in closed form.

    Raises ValueError on exactly collinear input; callers screen near-collinear
    triples with signed_area before asking.
    """
    cdef double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        raise ValueError("collinear points have no circumcenter")
    cdef double a2 = ax * ax + ay * ay
    cdef double b2 = bx * bx + by * by
    cdef double c2 = cx * cx + cy * cy
    cdef double ox = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    cdef double oy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return (ox, oy)


def side_dot(double px, double py, double ax, double ay, double bx, double by):
    """(A-P)·(B-P): negative iff P lies strictly inside segment AB's span."""
    return (ax - px) * (bx - px) + (ay - py) * (by - py)
