"""Structural scoring of predicted plot codes against ground truth.

Segments are compared as unordered endpoint pairs; annotations match up to
vertex-fixed angle reversal and value-literal equality within a tolerance.
All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from geoforge.plotcode import Annotations, PlotCode
from geoforge.quantities import ValueParseError, parse_value_literal


class BinningError(ValueError):
    pass


@dataclass(frozen=True)
class F1Report:
    precision: float
    recall: float
    f1: float
    intersection: int
    predicted: int
    truth: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "intersection": self.intersection,
            "predicted": self.predicted,
            "truth": self.truth,
        }


def _canon_segments(pc: PlotCode) -> set[tuple[str, str]]:
    return {(a, b) if a <= b else (b, a) for a, b in pc.segments}


def segment_f1(pred: PlotCode, truth: PlotCode) -> F1Report:
    """Precision, recall, and F1 over unordered segment endpoint pairs.

    An empty predicted set scores precision 0, an empty truth set scores
    recall 0; F1 is 0 whenever P + R is 0.
    """
    sp = _canon_segments(pred)
    st = _canon_segments(truth)
    inter = len(sp & st)
    p = inter / len(sp) if sp else 0.0
    r = inter / len(st) if st else 0.0
    f1 = 2.0 * p * r / (p + r) if p + r > 0.0 else 0.0
    return F1Report(p, r, f1, inter, len(sp), len(st))


def bin_by_score(
    samples: Sequence[tuple[float, bool]], k: int
) -> list[tuple[int, float]]:
    """Ascending score order, k contiguous bins, remainder widening the last
    bins; equal scores keep their input order. Returns (bin index, accuracy).
    """
    n = len(samples)
    if k < 1:
        raise BinningError("need at least one bin")
    if k > n:
        raise BinningError(f"cannot split {n} samples into {k} bins")
    order = sorted(range(n), key=lambda i: (samples[i][0], i))
    base, rem = divmod(n, k)
    sizes = [base] * (k - rem) + [base + 1] * rem
    out = []
    at = 0
    for b, size in enumerate(sizes):
        chunk = order[at : at + size]
        at += size
        solved = sum(1 for i in chunk if samples[i][1])
        out.append((b, solved / size))
    return out


def _angle_key(t: tuple[str, str, str]) -> tuple[str, str, str]:
    a, b, c = t
    return (a, b, c) if a <= c else (c, b, a)


def _seg_key(p: tuple[str, str]) -> tuple[str, str]:
    a, b = p
    return (a, b) if a <= b else (b, a)


def _value(text: str, context: str) -> float | None:
    try:
        return parse_value_literal(text, context)
    except ValueParseError:
        return None


@dataclass(frozen=True)
class CategoryDetail:
    matched: int
    missing: int
    spurious: int

    def to_dict(self) -> dict:
        return {"matched": self.matched, "missing": self.missing, "spurious": self.spurious}


@dataclass(frozen=True)
class AnnotationReport:
    fully_correct: bool
    right_angles: CategoryDetail
    lengths: CategoryDetail
    angles: CategoryDetail

    def to_dict(self) -> dict:
        return {
            "fully_correct": self.fully_correct,
            "right_angles": self.right_angles.to_dict(),
            "lengths": self.lengths.to_dict(),
            "angles": self.angles.to_dict(),
        }


def _match_valued(
    pred: list[tuple[tuple, str]],
    truth: list[tuple[tuple, str]],
    key,
    context: str,
    tol: float,
) -> CategoryDetail:
    avail = [(key(k), _value(v, context)) for k, v in pred]
    used = [False] * len(avail)
    matched = 0
    for k, v in truth:
        tk = key(k)
        tv = _value(v, context)
        hit = None
        for i, (pk, pv) in enumerate(avail):
            if used[i] or pk != tk:
                continue
            if tv is None or pv is None:
                continue
            if abs(pv - tv) <= tol:
                hit = i
                break
        if hit is None:
            continue
        used[hit] = True
        matched += 1
    return CategoryDetail(matched, len(truth) - matched, len(avail) - matched)


def annotation_match(
    pred: Annotations, truth: Annotations, tol: float = 1e-6
) -> AnnotationReport:
    """Category-by-category matching; fully_correct means every truth entry
    found a partner and nothing predicted was left over. Angles match with
    the vertex fixed and endpoints reversible; an unparseable value never
    matches."""
    pr = {_angle_key(t) for t in pred.right_angles}
    tr = {_angle_key(t) for t in truth.right_angles}
    right = CategoryDetail(len(pr & tr), len(tr - pr), len(pr - tr))
    lengths = _match_valued(
        list(pred.length_of_line), list(truth.length_of_line), _seg_key, "length", tol
    )
    angles = _match_valued(
        list(pred.measure_of_angle), list(truth.measure_of_angle), _angle_key, "angle", tol
    )
    full = all(
        d.missing == 0 and d.spurious == 0 for d in (right, lengths, angles)
    )
    return AnnotationReport(full, right, lengths, angles)


def parse_rate(flags: Iterable[bool]) -> float:
    """Fraction of true flags; 0.0 for an empty sequence."""
    n = ok = 0
    for f in flags:
        n += 1
        ok += bool(f)
    return ok / n if n else 0.0
