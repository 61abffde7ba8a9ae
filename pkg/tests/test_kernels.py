"""Numeric kernel behaviour and the pure/compiled parity contract."""

from __future__ import annotations

import math
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoforge import kernels
from geoforge.kernels import pure

coord = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_subnormal=False)


def test_seg_len_345():
    assert kernels.seg_len(0.0, 0.0, 3.0, 4.0) == 5.0


def test_signed_area_orientation():
    assert kernels.signed_area(0.0, 0.0, 1.0, 0.0, 0.0, 1.0) == 0.5
    assert kernels.signed_area(0.0, 0.0, 0.0, 1.0, 1.0, 0.0) == -0.5


def test_angle_at_right_angle():
    assert kernels.angle_at_deg(1.0, 0.0, 0.0, 0.0, 0.0, 1.0) == pytest.approx(90.0, abs=1e-12)


def test_angle_at_straight_line():
    assert kernels.angle_at_deg(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0) == pytest.approx(180.0, abs=1e-12)


def test_line_angle_folds_to_quadrant():
    # 170 degrees between directed vectors is 10 between undirected lines
    a = math.radians(170.0)
    got = kernels.line_angle_between_deg(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, math.cos(a), math.sin(a))
    assert got == pytest.approx(10.0, abs=1e-9)


def test_line_angle_parallel_is_zero():
    assert kernels.line_angle_between_deg(0.0, 0.0, 2.0, 1.0, 5.0, 5.0, 9.0, 7.0) == pytest.approx(
        0.0, abs=1e-12
    )


def test_circumcenter_right_triangle():
    ox, oy = kernels.circumcenter(0.0, 0.0, 2.0, 0.0, 0.0, 2.0)
    assert (ox, oy) == pytest.approx((1.0, 1.0), abs=1e-12)


def test_circumcenter_collinear_raises():
    with pytest.raises(ValueError):
        kernels.circumcenter(0.0, 0.0, 1.0, 1.0, 2.0, 2.0)


def test_side_dot_sign_inside_outside():
    assert kernels.side_dot(1.0, 0.0, 0.0, 0.0, 3.0, 0.0) < 0.0  # between A and B
    assert kernels.side_dot(5.0, 0.0, 0.0, 0.0, 3.0, 0.0) > 0.0  # beyond B


@given(coord, coord, coord, coord)
@settings(max_examples=200)
def test_parity_seg_len(ax, ay, bx, by):
    assert kernels.seg_len(ax, ay, bx, by) == pure.seg_len(ax, ay, bx, by)


@given(coord, coord, coord, coord, coord, coord)
@settings(max_examples=200)
def test_parity_signed_area_and_angles(ax, ay, bx, by, cx, cy):
    assert kernels.signed_area(ax, ay, bx, by, cx, cy) == pure.signed_area(ax, ay, bx, by, cx, cy)
    if (ax, ay) != (bx, by) and (cx, cy) != (bx, by):
        assert kernels.angle_at_deg(ax, ay, bx, by, cx, cy) == pure.angle_at_deg(
            ax, ay, bx, by, cx, cy
        )


@given(coord, coord, coord, coord, coord, coord, coord, coord)
@settings(max_examples=200)
def test_parity_line_angle(ax, ay, bx, by, cx, cy, dx, dy):
    if (ax, ay) == (bx, by) or (cx, cy) == (dx, dy):
        return
    assert kernels.line_angle_between_deg(ax, ay, bx, by, cx, cy, dx, dy) == pure.line_angle_between_deg(
        ax, ay, bx, by, cx, cy, dx, dy
    )


@given(coord, coord, coord, coord, coord, coord)
@settings(max_examples=200)
def test_parity_circumcenter(ax, ay, bx, by, cx, cy):
    try:
        expected = pure.circumcenter(ax, ay, bx, by, cx, cy)
    except ValueError:
        with pytest.raises(ValueError):
            kernels.circumcenter(ax, ay, bx, by, cx, cy)
        return
    assert kernels.circumcenter(ax, ay, bx, by, cx, cy) == expected


def test_env_flag_forces_pure_backend():
    env = dict(os.environ, GEOFORGE_PURE_KERNELS="1")
    out = subprocess.run(
        [sys.executable, "-c", "from geoforge import kernels; print(kernels.BACKEND)"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == "pure"


def test_active_backend_reported():
    assert kernels.BACKEND in ("pure", "compiled")
