"""Extended polynomials over partial binary operations, and integer-valued polynomials."""

from __future__ import annotations

import ast
import itertools
import operator
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

from .errors import (ArityMismatch, NonzeroAtOrigin, NotIntegerValued, ParseError, UndefinedProduct,
                     syntax_column)


# ---------------------------------------------------------------------------
# Extended polynomials: trees of variables, binary operations and constants.

@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class OpNode:
    op: str
    left: "ExtendedPoly"
    right: "ExtendedPoly"


@dataclass(frozen=True)
class LeftConst:
    op: str
    const: object
    sub: "ExtendedPoly"


@dataclass(frozen=True)
class RightConst:
    op: str
    sub: "ExtendedPoly"
    const: object


ExtendedPoly = Union[Var, OpNode, LeftConst, RightConst]

DEFAULT_OPS: dict = {"+": operator.add, "*": operator.mul, "max": max, "min": min}


def variables(p: ExtendedPoly) -> list[int]:
    """Variable indices in left-to-right order."""
    if isinstance(p, Var):
        return [p.index]
    if isinstance(p, OpNode):
        return variables(p.left) + variables(p.right)
    return variables(p.sub)


def check_extended(p: ExtendedPoly):
    """Variables must read 0, 1, 2, ... from left to right, each once."""
    vs = variables(p)
    if vs != list(range(len(vs))):
        raise ArityMismatch(f"variables {vs} are not consecutive blocks starting at 0")


def arity(p: ExtendedPoly) -> int:
    return len(variables(p))


def eval_extended(p: ExtendedPoly, args: Sequence, ops: Mapping[str, Callable] = DEFAULT_OPS):
    """Evaluate ``p``; an operation returning None is undefined there."""
    check_extended(p)
    if len(args) != arity(p):
        raise ArityMismatch(f"polynomial takes {arity(p)} arguments, got {len(args)}")
    return _eval(p, args, ops)


def _apply(ops, name, a, b):
    try:
        f = ops[name]
    except KeyError:
        raise UndefinedProduct(f"unknown operation {name!r}") from None
    v = f(a, b)
    if v is None:
        raise UndefinedProduct(f"{a!r} {name} {b!r} is undefined")
    return v


def _eval(p, args, ops):
    if isinstance(p, Var):
        return args[p.index]
    if isinstance(p, OpNode):
        return _apply(ops, p.op, _eval(p.left, args, ops), _eval(p.right, args, ops))
    if isinstance(p, LeftConst):
        return _apply(ops, p.op, p.const, _eval(p.sub, args, ops))
    return _apply(ops, p.op, _eval(p.sub, args, ops), p.const)


def shift(p: ExtendedPoly, k: int) -> ExtendedPoly:
    if isinstance(p, Var):
        return Var(p.index + k)
    if isinstance(p, OpNode):
        return OpNode(p.op, shift(p.left, k), shift(p.right, k))
    if isinstance(p, LeftConst):
        return LeftConst(p.op, p.const, shift(p.sub, k))
    return RightConst(p.op, shift(p.sub, k), p.const)


def random_extended(rng: random.Random, depth: int, ops: Sequence[str] = ("+", "max"),
                    consts: Sequence = range(-5, 6)) -> ExtendedPoly:
    """Random well-formed extended polynomial of depth at most ``depth``."""
    def build(d):
        kind = rng.randrange(4) if d > 0 else 0
        if kind == 0:
            return Var(0)
        if kind == 1:
            left = build(d - 1)
            right = build(d - 1)
            return OpNode(rng.choice(ops), left, shift(right, arity(left)))
        if kind == 2:
            return LeftConst(rng.choice(ops), rng.choice(consts), build(d - 1))
        return RightConst(rng.choice(ops), build(d - 1), rng.choice(consts))

    return build(depth)


def format_extended(p: ExtendedPoly) -> str:
    if isinstance(p, Var):
        return f"x{p.index}"
    if isinstance(p, OpNode):
        return f"({format_extended(p.left)} {p.op} {format_extended(p.right)})"
    if isinstance(p, LeftConst):
        return f"({p.const!r} {p.op} {format_extended(p.sub)})"
    return f"({format_extended(p.sub)} {p.op} {p.const!r})"


# ---------------------------------------------------------------------------
# Rational polynomials in z0, z1, ... as exponent-tuple -> Fraction maps.

@dataclass(frozen=True)
class RationalPoly:
    nvars: int
    terms: tuple  # sorted ((exponents...), Fraction) pairs with nonzero coefficients

    @staticmethod
    def make(nvars: int, terms: Mapping) -> "RationalPoly":
        clean = {tuple(e): Fraction(c) for e, c in terms.items() if c != 0}
        return RationalPoly(nvars, tuple(sorted(clean.items())))

    @staticmethod
    def const(nvars: int, c) -> "RationalPoly":
        return RationalPoly.make(nvars, {(0,) * nvars: Fraction(c)})

    @staticmethod
    def var(nvars: int, i: int) -> "RationalPoly":
        e = [0] * nvars
        e[i] = 1
        return RationalPoly.make(nvars, {tuple(e): 1})

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, o):
        d = self.as_dict()
        for e, c in o.terms:
            d[e] = d.get(e, 0) + c
        return RationalPoly.make(self.nvars, d)

    def __neg__(self):
        return RationalPoly.make(self.nvars, {e: -c for e, c in self.terms})

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        d: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in o.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, 0) + c1 * c2
        return RationalPoly.make(self.nvars, d)

    def scale(self, c) -> "RationalPoly":
        return RationalPoly.make(self.nvars, {e: v * Fraction(c) for e, v in self.terms})

    def degree_in(self, i: int) -> int:
        return max((e[i] for e, _ in self.terms), default=0)

    def __call__(self, point: Sequence[int]) -> Fraction:
        if len(point) != self.nvars:
            raise ArityMismatch(f"expected {self.nvars} coordinates, got {len(point)}")
        total = Fraction(0)
        for e, c in self.terms:
            v = c
            for x, k in zip(point, e):
                v *= Fraction(x) ** k
            total += v
        return total

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            mono = "*".join(f"z{i}" + (f"**{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            coef = str(c) if c.denominator == 1 else f"({c.numerator}/{c.denominator})"
            parts.append(coef if not mono else (mono if c == 1 else f"{coef}*{mono}"))
        return " + ".join(parts)


def binomial_poly(nvars: int, i: int, k: int) -> RationalPoly:
    """C(z_i, k) as a rational polynomial."""
    out = RationalPoly.const(nvars, 1)
    z = RationalPoly.var(nvars, i)
    for j in range(k):
        out = (out * (z - RationalPoly.const(nvars, j))).scale(Fraction(1, j + 1))
    return out


def parse_poly(text: str, nvars: int, line: int = 1, col0: int = 1) -> RationalPoly:
    """Parse an arithmetic expression in ``z`` (one variable) or ``z0, z1, ...``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as e:
        raise ParseError(line, col0 + syntax_column(e, text.strip()), "polynomial expression") from None

    def err(n, what):
        raise ParseError(line, col0 + getattr(n, "col_offset", 0), what)

    def build(n) -> RationalPoly:
        if isinstance(n, ast.Constant) and isinstance(n.value, int) and not isinstance(n.value, bool):
            return RationalPoly.const(nvars, n.value)
        if isinstance(n, ast.Name):
            name = n.id
            if name == "z" and nvars == 1:
                return RationalPoly.var(1, 0)
            if name.startswith("z") and name[1:].isdigit() and int(name[1:]) < nvars:
                return RationalPoly.var(nvars, int(name[1:]))
            err(n, f"variable z0..z{nvars - 1}")
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd)):
            v = build(n.operand)
            return -v if isinstance(n.op, ast.USub) else v
        if isinstance(n, ast.BinOp):
            if isinstance(n.op, ast.Pow):
                if not (isinstance(n.right, ast.Constant) and isinstance(n.right.value, int) and n.right.value >= 0):
                    err(n.right, "non-negative integer exponent")
                base = build(n.left)
                out = RationalPoly.const(nvars, 1)
                for _ in range(n.right.value):
                    out = out * base
                return out
            a, b = build(n.left), build(n.right)
            if isinstance(n.op, ast.Add):
                return a + b
            if isinstance(n.op, ast.Sub):
                return a - b
            if isinstance(n.op, ast.Mult):
                return a * b
            if isinstance(n.op, ast.Div):
                if any(any(e) for e, _ in b.terms) or not b.terms:
                    err(n.right, "nonzero constant divisor")
                return a.scale(1 / b.terms[0][1])
        err(n, "polynomial expression")

    return build(tree.body)


@dataclass(frozen=True)
class IntPolyVec:
    """A map Z^m -> Z^d given by rational polynomials that vanish at the origin."""

    components: tuple[RationalPoly, ...]

    @property
    def nvars(self) -> int:
        return self.components[0].nvars

    @property
    def dim(self) -> int:
        return len(self.components)

    def __call__(self, point: Sequence[int]) -> tuple[int, ...]:
        out = []
        for p in self.components:
            v = p(point)
            if v.denominator != 1:
                raise NotIntegerValued(self.components.index(p), tuple(point), v)
            out.append(int(v))
        return tuple(out)

    def to_text(self) -> str:
        return "; ".join(p.to_text() for p in self.components)


def _grid_points(nvars: int, degrees: Sequence[int]):
    """{0..D_i} per axis, together with the grid shifted by -1 and +1 along each axis."""
    base = [range(0, d + 1) for d in degrees]
    seen = set()
    for pt in itertools.product(*base):
        if pt not in seen:
            seen.add(pt)
            yield pt
    for i in range(nvars):
        for s in (-1, 1):
            for pt in itertools.product(*base):
                q = tuple(x + (s if j == i else 0) for j, x in enumerate(pt))
                if q not in seen:
                    seen.add(q)
                    yield q


def validate_int_poly(components: Sequence[RationalPoly]) -> IntPolyVec:
    """Check integer values on the integer grid and vanishing at the origin.

    A polynomial of degree at most D_i in variable i is integer-valued on all
    of Z^m as soon as it is integer-valued on the box {0..D_i}; the shifted
    grids are a cheap extra guard.
    """
    comps = tuple(components)
    if not comps:
        raise ArityMismatch("no components")
    m = comps[0].nvars
    if any(p.nvars != m for p in comps):
        raise ArityMismatch("components have different numbers of variables")
    for k, p in enumerate(comps):
        if p((0,) * m) != 0:
            raise NonzeroAtOrigin(f"component {k} is {p((0,) * m)} at the origin")
    degrees = [max(p.degree_in(i) for p in comps) for i in range(m)]
    for pt in _grid_points(m, degrees):
        for k, p in enumerate(comps):
            v = p(pt)
            if v.denominator != 1:
                raise NotIntegerValued(k, pt, v)
    return IntPolyVec(comps)


def parse_poly_vec(text: str, nvars: int, line: int = 1, col0: int = 1) -> IntPolyVec:
    comps = []
    offset = 0
    for part in text.split(";"):
        comps.append(parse_poly(part, nvars, line, col0 + offset))
        offset += len(part) + 1
    return validate_int_poly(comps)
