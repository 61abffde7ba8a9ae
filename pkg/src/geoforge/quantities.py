"""Quantity expression language.

Expressions combine geometric measurement atoms (length, angle, arc_length,
...) with infix + - * / arithmetic. Atoms take point labels; the circle
family takes a `C<digits>` circle id first. Angles are degrees throughout;
internal trig works in radians.

Annotation values use a separate mini-grammar (`parse_value_literal`):
rationals, `k*sqrt(m)` surds, pi expressions (degrees in angle context), and
plain decimals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import cos as _cos, degrees, pi, radians, sin as _sin, tan as _tan

from geoforge import kernels


class DslError(ValueError):
    pass


class ParseError(DslError):
    pass


class UnknownFunction(ParseError):
    pass


class CircleIdRequired(ParseError):
    pass


class ArityError(ParseError):
    pass


class EvalError(DslError):
    pass


class UnknownReference(EvalError):
    pass


class DegenerateAngle(EvalError):
    pass


class DivisionByZero(EvalError):
    pass


class ValueParseError(DslError):
    pass


# argument signature per function: P point slot, C circle-id slot,
# P* variadic points (>= 3)
FUNCTIONS: dict[str, str] = {
    "length": "PP",
    "angle": "PPP",
    "tan": "PPP",
    "sin": "PPP",
    "cos": "PPP",
    "area": "P*",
    "perimeter": "P*",
    "angle_between_lines": "PPPP",
    "tan_between_lines": "PPPP",
    "sin_between_lines": "PPPP",
    "cos_between_lines": "PPPP",
    "central_angle": "CPP",
    "arc_length": "CPP",
    "sector_area": "CPP",
    "arc_inscribed_angle": "CPP",
    "segment_area": "CPP",
    "circle_area": "C",
    "circle_perimeter": "C",
    "radius": "C",
    "diameter": "C",
}

CIRCLE_ID_RE = re.compile(r"^C\d+$")


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Atom:
    fn: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    lhs: "QuantityExpr"
    rhs: "QuantityExpr"


QuantityExpr = Number | Atom | BinOp


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ParseError(f"unexpected character at {rest[:10]!r}")
        if m.group("num"):
            tokens.append(("num", m.group("num")))
        elif m.group("ident"):
            tokens.append(("ident", m.group("ident")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


def _check_atom(fn: str, args: tuple[str, ...]) -> None:
    if fn not in FUNCTIONS:
        raise UnknownFunction(f"unknown function {fn!r}")
    sig = FUNCTIONS[fn]
    if sig == "P*":
        if len(args) < 3:
            raise ArityError(f"{fn} needs at least 3 points, got {len(args)}")
        slots = "P" * len(args)
    else:
        if len(args) != len(sig):
            raise ArityError(f"{fn} takes {len(sig)} arguments, got {len(args)}")
        slots = sig
    for slot, arg in zip(slots, args):
        is_circle = bool(CIRCLE_ID_RE.match(arg))
        if slot == "C" and not is_circle:
            raise CircleIdRequired(f"{fn}: {arg!r} is not a circle id (want C<digits>)")
        if slot == "P" and is_circle:
            raise ParseError(f"{fn}: {arg!r} is a circle id where a point label is expected")


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]]) -> None:
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        self.pos += 1
        return tok

    def expect(self, value: str) -> None:
        tok = self.take()
        if tok != ("op", value):
            raise ParseError(f"expected {value!r}, got {tok[1]!r}")

    def parse(self) -> QuantityExpr:
        e = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input at {self.peek()[1]!r}")
        return e

    def expr(self) -> QuantityExpr:
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> QuantityExpr:
        node = self.factor()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> QuantityExpr:
        tok = self.take()
        if tok == ("op", "-"):
            inner = self.factor()
            if isinstance(inner, Number):
                return Number(-inner.value)
            return BinOp("-", Number(0.0), inner)
        if tok == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        if tok[0] == "num":
            return Number(float(tok[1]))
        if tok[0] == "ident":
            self.expect("(")
            args = [self.argument()]
            while self.peek() == ("op", ","):
                self.take()
                args.append(self.argument())
            self.expect(")")
            atom = Atom(tok[1], tuple(args))
            _check_atom(atom.fn, atom.args)
            return atom
        raise ParseError(f"unexpected token {tok[1]!r}")

    def argument(self) -> str:
        tok = self.take()
        if tok[0] != "ident":
            raise ParseError(f"expected a label, got {tok[1]!r}")
        return tok[1]


def parse_quantity(text: str) -> QuantityExpr:
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression")
    return _Parser(tokens).parse()


def to_text(e: QuantityExpr) -> str:
    """Pretty-print an AST; parses back to an equal tree."""
    prec = {"+": 1, "-": 1, "*": 2, "/": 2}

    def render(node: QuantityExpr, parent_prec: int, right: bool) -> str:
        if isinstance(node, Number):
            v = node.value
            s = str(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v)
            return f"({s})" if v < 0 and parent_prec > 0 else s
        if isinstance(node, Atom):
            return f"{node.fn}({', '.join(node.args)})"
        p = prec[node.op]
        text = f"{render(node.lhs, p, False)} {node.op} {render(node.rhs, p, True)}"
        if p < parent_prec or (right and p == parent_prec):
            return f"({text})"
        return text

    return render(e, 0, False)


def _xy(points: dict[str, tuple[float, float]], label: str) -> tuple[float, float]:
    try:
        return points[label]
    except KeyError:
        raise UnknownReference(f"unknown point {label!r}") from None


def _circ(circles: dict[str, tuple[tuple[float, float], float]], cid: str) -> tuple[tuple[float, float], float]:
    try:
        return circles[cid]
    except KeyError:
        raise UnknownReference(f"unknown circle {cid!r}") from None


def _angle_deg(points, a: str, b: str, c: str) -> float:
    (ax, ay), (bx, by), (cx, cy) = _xy(points, a), _xy(points, b), _xy(points, c)
    if kernels.seg_len(bx, by, ax, ay) == 0.0 or kernels.seg_len(bx, by, cx, cy) == 0.0:
        raise DegenerateAngle(f"angle({a}, {b}, {c}) has coincident points")
    return kernels.angle_at_deg(ax, ay, bx, by, cx, cy)


def _between_deg(points, a: str, b: str, c: str, d: str) -> float:
    (ax, ay), (bx, by), (cx, cy), (dx, dy) = (
        _xy(points, a),
        _xy(points, b),
        _xy(points, c),
        _xy(points, d),
    )
    if kernels.seg_len(ax, ay, bx, by) == 0.0 or kernels.seg_len(cx, cy, dx, dy) == 0.0:
        raise DegenerateAngle("zero-length line")
    return kernels.line_angle_between_deg(ax, ay, bx, by, cx, cy, dx, dy)


def _central_rad(points, circles, cid: str, a: str, b: str) -> float:
    (ox, oy), _ = _circ(circles, cid)
    (ax, ay), (bx, by) = _xy(points, a), _xy(points, b)
    if kernels.seg_len(ox, oy, ax, ay) == 0.0 or kernels.seg_len(ox, oy, bx, by) == 0.0:
        raise DegenerateAngle(f"central angle at {cid} with a point on the center")
    return radians(kernels.angle_at_deg(ax, ay, ox, oy, bx, by))


def eval_quantity(
    e: QuantityExpr,
    points: dict[str, tuple[float, float]],
    circles: dict[str, tuple[tuple[float, float], float]] | None = None,
) -> float:
    circles = circles or {}

    def ev(node: QuantityExpr) -> float:
        if isinstance(node, Number):
            return node.value
        if isinstance(node, BinOp):
            lhs = ev(node.lhs)
            rhs = ev(node.rhs)
            if node.op == "+":
                return lhs + rhs
            if node.op == "-":
                return lhs - rhs
            if node.op == "*":
                return lhs * rhs
            if abs(rhs) < 1e-12:
                raise DivisionByZero(f"denominator {rhs!r}")
            return lhs / rhs
        return eval_atom(node, points, circles)

    return ev(e)


def eval_atom(
    node: Atom,
    points: dict[str, tuple[float, float]],
    circles: dict[str, tuple[tuple[float, float], float]],
) -> float:
    fn, args = node.fn, node.args
    if fn == "length":
        (ax, ay), (bx, by) = _xy(points, args[0]), _xy(points, args[1])
        return kernels.seg_len(ax, ay, bx, by)
    if fn == "angle":
        return _angle_deg(points, *args)
    if fn in ("tan", "sin", "cos"):
        theta = radians(_angle_deg(points, *args))
        return {"tan": _tan, "sin": _sin, "cos": _cos}[fn](theta)
    if fn == "area":
        pts = [_xy(points, a) for a in args]
        s = 0.0
        for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
            s += x1 * y2 - x2 * y1
        return abs(s) / 2.0
    if fn == "perimeter":
        pts = [_xy(points, a) for a in args]
        total = 0.0
        for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
            total += kernels.seg_len(x1, y1, x2, y2)
        return total
    if fn == "angle_between_lines":
        return _between_deg(points, *args)
    if fn in ("tan_between_lines", "sin_between_lines", "cos_between_lines"):
        theta = radians(_between_deg(points, *args))
        return {"tan_between_lines": _tan, "sin_between_lines": _sin, "cos_between_lines": _cos}[
            fn
        ](theta)
    if fn == "central_angle":
        return degrees(_central_rad(points, circles, *args))
    if fn == "arc_length":
        _, r = _circ(circles, args[0])
        return r * _central_rad(points, circles, *args)
    if fn == "sector_area":
        _, r = _circ(circles, args[0])
        return r * r * _central_rad(points, circles, *args) / 2.0
    if fn == "arc_inscribed_angle":
        return degrees(_central_rad(points, circles, *args)) / 2.0
    if fn == "segment_area":
        _, r = _circ(circles, args[0])
        theta = _central_rad(points, circles, *args)
        return r * r * (theta - _sin(theta)) / 2.0
    if fn == "circle_area":
        _, r = _circ(circles, args[0])
        return pi * r * r
    if fn == "circle_perimeter":
        _, r = _circ(circles, args[0])
        return 2.0 * pi * r
    if fn == "radius":
        _, r = _circ(circles, args[0])
        return r
    if fn == "diameter":
        _, r = _circ(circles, args[0])
        return 2.0 * r
    raise UnknownFunction(fn)


_DECIMAL_RE = re.compile(r"^\d+(?:\.\d+)?$")
_FRACTION_RE = re.compile(r"^(\d+)/(\d+)$")
_SQRT_RE = re.compile(
    r"^(?:(?P<k>\d+(?:\.\d+)?|\d+/\d+)\*)?sqrt\((?P<m>-?\d+)\)(?:/(?P<d>\d+))?$"
)
_PI_RE = re.compile(r"^(?:(?P<k>\d+(?:\.\d+)?|\d+/\d+)\*)?pi(?:/(?P<d>\d+))?$")


def _coeff(text: str | None) -> float:
    if text is None:
        return 1.0
    m = _FRACTION_RE.match(text)
    if m:
        return int(m.group(1)) / int(m.group(2))
    return float(text)


def parse_value_literal(text: str, context: str = "length") -> float:
    """Evaluate an annotation value string.

    context 'angle' reads pi expressions as radians and converts to degrees;
    plain numbers are taken as degrees directly. context 'length' returns
    the plain real value.
    """
    if context not in ("length", "angle"):
        raise ValueError(f"bad context {context!r}")
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueParseError("empty value literal")
    negative = False
    if s[0] in "+-":
        negative = s[0] == "-"
        s = s[1:]

    if _DECIMAL_RE.match(s):
        val = float(s)
    else:
        m = _FRACTION_RE.match(s)
        if m:
            den = int(m.group(2))
            if den == 0:
                raise ValueParseError(f"zero denominator in {text!r}")
            val = int(m.group(1)) / den
        else:
            m = _SQRT_RE.match(s)
            if m:
                radicand = int(m.group("m"))
                if radicand <= 0:
                    raise ValueParseError(f"radicand must be positive in {text!r}")
                val = _coeff(m.group("k")) * radicand ** 0.5
                if m.group("d"):
                    val /= int(m.group("d"))
            else:
                m = _PI_RE.match(s)
                if m:
                    val = _coeff(m.group("k")) * pi
                    if m.group("d"):
                        val /= int(m.group("d"))
                    if context == "angle":
                        val = degrees(val)
                else:
                    raise ValueParseError(f"cannot parse value literal {text!r}")
    return -val if negative else val


def literal_from_fraction(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"
