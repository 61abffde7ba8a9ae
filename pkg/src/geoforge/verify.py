"""Numeric verification of records against their coordinates.

Three check families: declared predicates re-measured on the plot-code
coordinates, annotation consistency, and answer verification (computation
answers compared against the designated quantity, proof quantities checked
as zero-value expressions). Any failure attributes the record to the
geometric stage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from geoforge import kernels
from geoforge.plotcode import DegenerateCircle, PlotCode
from geoforge.predicates import (
    Fact,
    NONDEGEN_KINDS,
    NondegenConfig,
    UnknownPoint,
    Witness,
    check_nondegenerate,
)
from geoforge.quantities import (
    Atom,
    DslError,
    eval_quantity,
    parse_quantity,
    parse_value_literal,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ToleranceConfig:
    eps_abs: float = 1e-6
    eps_angle_deg: float = 1e-6
    eps_rel: float = 1e-9

    def for_length(self, reference: float) -> float:
        # absolute at unit scale, relative once the reference dwarfs it
        return max(self.eps_abs, self.eps_rel * abs(reference))

    def for_area(self, scale: float) -> float:
        return max(self.eps_abs, self.eps_rel * scale * scale)


DEFAULT_TOL = ToleranceConfig()


@dataclass
class Check:
    kind: str
    subject: str
    residual: float
    passed: bool
    reason: str = ""

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "subject": self.subject,
            "residual": self.residual,
            "passed": self.passed,
        }
        if self.reason:
            d["reason"] = self.reason
        return d


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)
    rejected_stage: str | None = None

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, other: "VerificationReport") -> None:
        self.checks.extend(other.checks)

    def to_dict(self) -> dict:
        return {
            "checks": [c.to_dict() for c in self.checks],
            "overall": self.overall,
            "rejected_stage": self.rejected_stage,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def _lengths(w: Witness, pairs: list[tuple[str, str]]) -> list[float]:
    out = []
    for a, b in pairs:
        (ax, ay), (bx, by) = w.xy(a), w.xy(b)
        out.append(kernels.seg_len(ax, ay, bx, by))
    return out


def _coll_residual(w: Witness, a: str, b: str, c: str) -> tuple[float, float]:
    """(|signed area|, longest side) for the collinearity check."""
    (ax, ay), (bx, by), (cx, cy) = w.xy(a), w.xy(b), w.xy(c)
    area = abs(kernels.signed_area(ax, ay, bx, by, cx, cy))
    scale = max(
        kernels.seg_len(ax, ay, bx, by),
        kernels.seg_len(bx, by, cx, cy),
        kernels.seg_len(cx, cy, ax, ay),
    )
    return area, scale


def _between(w: Witness, a: str, b: str, c: str, d: str) -> float:
    (ax, ay), (bx, by), (cx, cy), (dx, dy) = w.xy(a), w.xy(b), w.xy(c), w.xy(d)
    return kernels.line_angle_between_deg(ax, ay, bx, by, cx, cy, dx, dy)


def _orientation(w: Witness, t: tuple[str, str, str]) -> float:
    (ax, ay), (bx, by), (cx, cy) = (w.xy(p) for p in t)
    return kernels.signed_area(ax, ay, bx, by, cx, cy)


def check_relation(p: Fact, w: Witness, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[bool, float]:
    """Measure one declared relation; (pass, residual)."""
    if p.kind in NONDEGEN_KINDS:
        return check_nondegenerate(w, p, NondegenConfig()), 0.0

    if p.kind == "cong":
        l1, l2 = _lengths(w, [(p.args[0], p.args[1]), (p.args[2], p.args[3])])
        residual = abs(l1 - l2)
        return residual <= tol.for_length(max(l1, l2)), residual
    if p.kind == "perp":
        residual = abs(_between(w, *p.args) - 90.0)
        return residual <= tol.eps_angle_deg, residual
    if p.kind == "para":
        residual = _between(w, *p.args)
        return residual <= tol.eps_angle_deg, residual
    if p.kind == "coll":
        area, scale = _coll_residual(w, *p.args)
        return area <= tol.for_area(scale), area
    if p.kind == "midp":
        m, a, b = p.args
        l1, l2 = _lengths(w, [(m, a), (m, b)])
        area, scale = _coll_residual(w, m, a, b)
        ok = abs(l1 - l2) <= tol.for_length(max(l1, l2)) and area <= tol.for_area(scale)
        return ok, max(abs(l1 - l2), area)
    if p.kind in ("cyclic", "circle"):
        if p.kind == "circle":
            center = p.args[0]
            rim = p.args[1:]
            (ox, oy) = w.xy(center)
        else:
            rim = p.args
            (ax, ay), (bx, by), (cx, cy) = (w.xy(q) for q in rim[:3])
            try:
                ox, oy = kernels.circumcenter(ax, ay, bx, by, cx, cy)
            except ValueError:
                scale = max(_lengths(w, [(rim[0], q) for q in rim[1:]]))
                return False, scale
        radii = [kernels.seg_len(ox, oy, *w.xy(q)) for q in rim]
        residual = max(radii) - min(radii)
        return residual <= tol.for_length(max(radii)), residual
    if p.kind in ("eqangle",):
        a1 = _between(w, *p.args[0:4])
        a2 = _between(w, *p.args[4:8])
        residual = abs(a1 - a2)
        return residual <= tol.eps_angle_deg, residual
    if p.kind == "eqratio":
        l1, l2, l3, l4 = _lengths(
            w,
            [
                (p.args[0], p.args[1]),
                (p.args[2], p.args[3]),
                (p.args[4], p.args[5]),
                (p.args[6], p.args[7]),
            ],
        )
        if l2 == 0.0 or l4 == 0.0:
            return False, max(l1, l3)
        r1, r2 = l1 / l2, l3 / l4
        residual = abs(r1 - r2)
        return residual <= tol.for_length(max(r1, r2)), residual
    if p.kind == "eqratio3":
        a, b, c, d, m, n = p.args
        l1, l2, l3, l4 = _lengths(w, [(m, a), (m, c), (n, b), (n, d)])
        if l2 == 0.0 or l4 == 0.0:
            return False, max(l1, l3)
        r1, r2 = l1 / l2, l3 / l4
        residual = abs(r1 - r2)
        return residual <= tol.for_length(max(r1, r2)), residual
    if p.kind == "rconst":
        l1, l2 = _lengths(w, [(p.args[0], p.args[1]), (p.args[2], p.args[3])])
        if l2 == 0.0:
            return False, l1
        target = float(p.value)
        residual = abs(l1 / l2 - target)
        return residual <= tol.for_length(target), residual
    if p.kind in ("simtri", "simtrir", "contri", "contrir"):
        t1 = p.args[0:3]
        t2 = p.args[3:6]
        sides1 = _lengths(w, [(t1[0], t1[1]), (t1[1], t1[2]), (t1[2], t1[0])])
        sides2 = _lengths(w, [(t2[0], t2[1]), (t2[1], t2[2]), (t2[2], t2[0])])
        if p.kind.startswith("contri"):
            diffs = [abs(u - v) for u, v in zip(sides1, sides2)]
            residual = max(diffs)
            ok = residual <= tol.for_length(max(max(sides1), max(sides2)))
        else:
            if min(sides2) == 0.0:
                return False, max(sides1)
            ratios = [u / v for u, v in zip(sides1, sides2)]
            residual = max(ratios) - min(ratios)
            ok = residual <= tol.for_length(max(ratios))
        s1 = _orientation(w, t1)
        s2 = _orientation(w, t2)
        same_clock = (s1 > 0) == (s2 > 0)
        want_same = not p.kind.endswith("r")
        return ok and same_clock == want_same, residual
    raise ValueError(f"no numeric check for kind {p.kind!r}")


def check_annotations(pc: PlotCode, tol: ToleranceConfig = DEFAULT_TOL) -> VerificationReport:
    report = VerificationReport()
    w = Witness(pc.points)
    for (a, b), literal in pc.annotations.length_of_line:
        subject = f"length_of_line {a}{b} = {literal}"
        try:
            declared = parse_value_literal(literal, "length")
            (l,) = _lengths(w, [(a, b)])
            residual = abs(l - declared)
            report.checks.append(
                Check("annotation_length", subject, residual, residual <= tol.for_length(declared))
            )
        except (DslError, UnknownPoint) as e:
            report.checks.append(Check("annotation_length", subject, 0.0, False, str(e)))
    for a, b, c in pc.annotations.right_angles:
        subject = f"right_angle {a}{b}{c}"
        try:
            (ax, ay), (bx, by), (cx, cy) = w.xy(a), w.xy(b), w.xy(c)
            measured = kernels.angle_at_deg(ax, ay, bx, by, cx, cy)
            residual = abs(measured - 90.0)
            report.checks.append(
                Check("annotation_right_angle", subject, residual, residual <= tol.eps_angle_deg)
            )
        except UnknownPoint as e:
            report.checks.append(Check("annotation_right_angle", subject, 0.0, False, str(e)))
    for (a, b, c), literal in pc.annotations.measure_of_angle:
        subject = f"measure_of_angle {a}{b}{c} = {literal}"
        try:
            declared = parse_value_literal(literal, "angle")
            (ax, ay), (bx, by), (cx, cy) = w.xy(a), w.xy(b), w.xy(c)
            measured = kernels.angle_at_deg(ax, ay, bx, by, cx, cy)
            residual = abs(measured - declared)
            report.checks.append(
                Check("annotation_angle", subject, residual, residual <= tol.eps_angle_deg)
            )
        except (DslError, UnknownPoint) as e:
            report.checks.append(Check("annotation_angle", subject, 0.0, False, str(e)))
    return report


ANGLE_VALUED = {
    "angle",
    "angle_between_lines",
    "central_angle",
    "arc_inscribed_angle",
}


def _answer_context(expr) -> str:
    if isinstance(expr, Atom) and expr.fn in ANGLE_VALUED:
        return "angle"
    return "length"


def verify_answer(
    quantities: list[str],
    pc: PlotCode,
    answer: str | None,
    kind: str,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> VerificationReport:
    """Computation: quantities[0] must equal the declared answer. Proof:
    every quantity is a zero-value expression."""
    if kind not in ("computation", "proof"):
        raise ConfigError(f"unknown record kind {kind!r}")
    if not quantities:
        report = VerificationReport()
        report.checks.append(Check("answer", "quantities", 0.0, False, "no quantity expressions"))
        return report
    if kind == "computation" and not answer:
        raise ConfigError("computation record without an answer")

    report = VerificationReport()
    try:
        circles = pc.resolved_circles()
    except DegenerateCircle as e:
        report.checks.append(Check("answer", "circles", 0.0, False, str(e)))
        return report

    for i, text in enumerate(quantities):
        subject = text
        try:
            expr = parse_quantity(text)
            value = eval_quantity(expr, pc.points, circles)
        except DslError as e:
            report.checks.append(Check("answer", subject, 0.0, False, str(e)))
            continue
        if kind == "proof":
            residual = abs(value)
            report.checks.append(Check("proof_zero", subject, residual, residual < tol.eps_abs))
        elif i == 0:
            try:
                declared = parse_value_literal(answer, _answer_context(expr))
            except DslError as e:
                report.checks.append(Check("answer", subject, 0.0, False, f"bad answer literal: {e}"))
                continue
            residual = abs(value - declared)
            report.checks.append(
                Check("answer", f"{subject} = {answer}", residual, residual <= tol.for_length(declared))
            )
        else:
            # auxiliary expression: only needs to evaluate
            report.checks.append(Check("quantity_evaluates", subject, 0.0, True))
    return report


@dataclass
class RecordCandidate:
    plot_code: PlotCode
    predicates: list[Fact]
    kind: str
    answer: str | None = None


def verify_record(record: RecordCandidate, tol: ToleranceConfig = DEFAULT_TOL) -> VerificationReport:
    """All three families; any failure marks the geometric stage."""
    pc = record.plot_code
    w = Witness(pc.points)
    report = VerificationReport()
    for p in record.predicates:
        subject = str(p)
        try:
            ok, residual = check_relation(p, w, tol)
            report.checks.append(Check("relation", subject, residual, ok))
        except UnknownPoint as e:
            report.checks.append(Check("relation", subject, 0.0, False, f"missing point {e}"))
    report.extend(check_annotations(pc, tol))
    report.extend(verify_answer(pc.quantities, pc, record.answer, record.kind, tol))
    if not report.overall:
        report.rejected_stage = "geometric"
    return report
