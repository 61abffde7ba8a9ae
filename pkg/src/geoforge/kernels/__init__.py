"""Numeric kernel selection.

Imports the compiled kernels when the extension built, otherwise the pure
fallback. GEOFORGE_PURE_KERNELS=1 forces the fallback regardless, which the
parity tests and benchmark use to pin down both backends.
"""

from __future__ import annotations

import os

if os.environ.get("GEOFORGE_PURE_KERNELS") == "1":
    from geoforge.kernels.pure import (
        angle_at_deg,
        circumcenter,
        line_angle_between_deg,
        seg_len,
        side_dot,
        signed_area,
    )

    BACKEND = "pure"
else:
    try:
        from geoforge.kernels._fast import (  # type: ignore[attr-defined]
            angle_at_deg,
            circumcenter,
            line_angle_between_deg,
            seg_len,
            side_dot,
            signed_area,
        )

        BACKEND = "compiled"
    except ImportError:
        from geoforge.kernels.pure import (
            angle_at_deg,
            circumcenter,
            line_angle_between_deg,
            seg_len,
            side_dot,
            signed_area,
        )

        BACKEND = "pure"

__all__ = [
    "BACKEND",
    "angle_at_deg",
    "circumcenter",
    "line_angle_between_deg",
    "seg_len",
    "side_dot",
    "signed_area",
]
