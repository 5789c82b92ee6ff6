"""
Symbolic expressions over random variables.

Terms are immutable: real and integer constants, references to random
variables (``Var``) and operator applications (``App``). This module builds
them, substitutes into them, partially evaluates them against a symbolic
state, and runs the affine analysis that decides whether two Gaussians can be
swapped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Protocol, Union

from errors import ArityError, DivisionByZero, NegativeSqrt

RvId = int


class Op(Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    SQRT = "sqrt"
    ITE = "ite"
    EQ = "="
    NEQ = "!="
    LT = "<"
    LTE = "<="

    @property
    def arity(self) -> int:
        return _ARITY.get(self, 2)


_ARITY = {Op.SQRT: 1, Op.ITE: 3}


class _Arith:
    """Operator overloading so model code can write ``vel - 2 * omega``."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return sub(IntConst(0), self)


@dataclass(frozen=True, slots=True)
class RealConst(_Arith):
    value: float

    def __str__(self):
        return _format_real(self.value)


@dataclass(frozen=True, slots=True)
class IntConst(_Arith):
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Var(_Arith):
    rv: RvId

    def __str__(self):
        return f"X{self.rv}"


@dataclass(frozen=True, slots=True)
class App(_Arith):
    op: Op
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.op.arity:
            raise ArityError(
                f"{self.op.value} takes {self.op.arity} argument(s), got {len(self.args)}"
            )

    def __str__(self):
        return f"app({self.op.value}, {', '.join(str(a) for a in self.args)})"


Expr = Union[RealConst, IntConst, Var, App]
Number = Union[int, float]


class AffineForm(NamedTuple):
    """``e == a * x + b`` for the analyzed variable ``x``; neither part mentions ``x``."""

    a: Expr
    b: Expr


class DeltaLookup(Protocol):
    def delta_value(self, rv: RvId) -> Optional[Expr]:
        """Return the point-mass value bound to ``rv``, or None."""


def _format_real(value: float) -> str:
    if math.isfinite(value) and value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def as_expr(value) -> Expr:
    if isinstance(value, (RealConst, IntConst, Var, App)):
        return value
    if isinstance(value, bool):
        return IntConst(int(value))
    if isinstance(value, int):
        return IntConst(value)
    if isinstance(value, float):
        return RealConst(value)
    # numpy scalars and anything else number-like
    if hasattr(value, "is_integer") or hasattr(value, "__float__"):
        if hasattr(value, "dtype") and value.dtype.kind in "iu":
            return IntConst(int(value))
        return RealConst(float(value))
    raise TypeError(f"cannot use {value!r} as a symbolic expression")


def const(value: Number) -> Expr:
    return as_expr(value)


def is_constant(e: Expr) -> bool:
    return isinstance(e, (RealConst, IntConst))


def _is_literal(e: Expr, value: Number) -> bool:
    return is_constant(e) and e.value == value


def _const_of(result) -> Expr:
    if isinstance(result, bool):
        return IntConst(int(result))
    if isinstance(result, int):
        return IntConst(result)
    return RealConst(float(result))


def _apply(op: Op, vals: list) -> Expr:
    """Fold an operator over constant operand values."""
    if op is Op.ADD:
        return _const_of(vals[0] + vals[1])
    if op is Op.SUB:
        return _const_of(vals[0] - vals[1])
    if op is Op.MUL:
        return _const_of(vals[0] * vals[1])
    if op is Op.DIV:
        if vals[1] == 0:
            raise DivisionByZero(f"division of {vals[0]!r} by zero")
        return RealConst(vals[0] / vals[1])
    if op is Op.SQRT:
        if vals[0] < 0:
            raise NegativeSqrt(f"sqrt of negative constant {vals[0]!r}")
        return RealConst(math.sqrt(vals[0]))
    if op is Op.ITE:
        return _const_of(vals[1] if vals[0] != 0 else vals[2])
    if op is Op.EQ:
        return IntConst(int(vals[0] == vals[1]))
    if op is Op.NEQ:
        return IntConst(int(vals[0] != vals[1]))
    if op is Op.LT:
        return IntConst(int(vals[0] < vals[1]))
    if op is Op.LTE:
        return IntConst(int(vals[0] <= vals[1]))
    raise ArityError(f"unknown operator {op!r}")


def _build(op: Op, *args) -> Expr:
    args = tuple(as_expr(a) for a in args)
    if all(is_constant(a) for a in args):
        return _apply(op, [a.value for a in args])
    return App(op, args)


# Builders. They fold constant operands and drop neutral elements; they are
# what swap and the affine analysis use to construct new terms.

def add(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if _is_literal(a, 0):
        return b
    if _is_literal(b, 0):
        return a
    return _build(Op.ADD, a, b)


def sub(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if _is_literal(b, 0):
        return a
    return _build(Op.SUB, a, b)


def mul(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if _is_literal(a, 0) or _is_literal(b, 0):
        return IntConst(0)
    if _is_literal(a, 1):
        return b
    if _is_literal(b, 1):
        return a
    return _build(Op.MUL, a, b)


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if _is_literal(b, 1) and not is_constant(a):
        return a
    return _build(Op.DIV, a, b)


def sqrt(a) -> Expr:
    return _build(Op.SQRT, a)


def ite(cond, then, otherwise) -> Expr:
    cond = as_expr(cond)
    if is_constant(cond):
        return as_expr(then) if cond.value != 0 else as_expr(otherwise)
    return App(Op.ITE, (cond, as_expr(then), as_expr(otherwise)))


def eq(a, b) -> Expr:
    return _build(Op.EQ, a, b)


def neq(a, b) -> Expr:
    return _build(Op.NEQ, a, b)


def lt(a, b) -> Expr:
    return _build(Op.LT, a, b)


def lte(a, b) -> Expr:
    return _build(Op.LTE, a, b)


def free_rvs(e: Expr) -> frozenset:
    """The set of random variables referenced anywhere in ``e``."""
    found = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            found.add(node.rv)
        elif isinstance(node, App):
            stack.extend(node.args)
    return frozenset(found)


def rvs_in_order(e: Expr) -> list:
    """Free random variables of ``e`` in left-to-right first-occurrence order."""
    seen = []
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            if node.rv not in seen:
                seen.append(node.rv)
        elif isinstance(node, App):
            stack.extend(reversed(node.args))
    return seen


def subst(e: Expr, x: RvId, r: Expr) -> Expr:
    """Replace every ``Var(x)`` in ``e`` by ``r``."""
    if isinstance(e, Var):
        return as_expr(r) if e.rv == x else e
    if isinstance(e, App):
        return App(e.op, tuple(subst(a, x, r) for a in e.args))
    return e


def eval_expr(e: Expr, g: Optional[DeltaLookup] = None) -> Expr:
    """
    Partially evaluate ``e`` against the symbolic state ``g``.

    Variables bound to a Delta are replaced by the (evaluated) point-mass
    value, and any operator whose operands are all constants is folded.
    Everything else is rebuilt unchanged. ``ite`` only evaluates the branch
    its condition selects once the condition is constant.
    """
    if isinstance(e, (RealConst, IntConst)):
        return e
    if isinstance(e, Var):
        if g is not None:
            inner = g.delta_value(e.rv)
            if inner is not None:
                return eval_expr(inner, g)
        return e
    if e.op is Op.ITE:
        cond = eval_expr(e.args[0], g)
        if is_constant(cond):
            return eval_expr(e.args[1] if cond.value != 0 else e.args[2], g)
        return App(Op.ITE, (cond, eval_expr(e.args[1], g), eval_expr(e.args[2], g)))
    args = tuple(eval_expr(a, g) for a in e.args)
    if all(is_constant(a) for a in args):
        return _apply(e.op, [a.value for a in args])
    return App(e.op, args)


def is_const(e: Expr, g: Optional[DeltaLookup] = None) -> bool:
    return is_constant(eval_expr(e, g))


def affine_of(e: Expr, x: RvId, g: Optional[DeltaLookup] = None) -> Optional[AffineForm]:
    """
    Recognize ``e`` as ``a * X + b`` with ``a`` and ``b`` free of ``X``.

    Returns None when the term is not affine in ``x`` or uses an operator the
    analysis does not look through (ite, sqrt, comparisons, products where
    both factors mention ``x``) or cannot be evaluated (a zero
    denominator, a negative square root).
    """
    try:
        return _affine(eval_expr(e, g), x)
    except (DivisionByZero, NegativeSqrt):
        return None


def _affine(e: Expr, x: RvId) -> Optional[AffineForm]:
    if x not in free_rvs(e):
        return AffineForm(IntConst(0), e)
    if isinstance(e, Var):
        return AffineForm(IntConst(1), IntConst(0))
    if e.op in (Op.ADD, Op.SUB):
        left, right = _affine(e.args[0], x), _affine(e.args[1], x)
        if left is None or right is None:
            return None
        combine = add if e.op is Op.ADD else sub
        return AffineForm(combine(left.a, right.a), combine(left.b, right.b))
    if e.op is Op.MUL:
        lhs, rhs = e.args
        if x not in free_rvs(lhs):
            scale, form = lhs, _affine(rhs, x)
        elif x not in free_rvs(rhs):
            scale, form = rhs, _affine(lhs, x)
        else:
            return None
        if form is None:
            return None
        return AffineForm(mul(scale, form.a), mul(scale, form.b))
    if e.op is Op.DIV:
        num, den = e.args
        if x in free_rvs(den) or _is_literal(den, 0):
            return None
        form = _affine(num, x)
        if form is None:
            return None
        return AffineForm(div(form.a, den), div(form.b, den))
    return None


class LinearForm(NamedTuple):
    """``sum(coeffs[rv] * X_rv) + offset`` with plain-number coefficients."""

    coeffs: dict
    offset: Number

    def scaled(self, k: Number) -> "LinearForm":
        return LinearForm({rv: k * c for rv, c in self.coeffs.items()}, k * self.offset)

    def divided(self, k: Number) -> "LinearForm":
        return LinearForm({rv: c / k for rv, c in self.coeffs.items()}, self.offset / k)

    def plus(self, other: "LinearForm", sign: int = 1) -> "LinearForm":
        coeffs = dict(self.coeffs)
        for rv, c in other.coeffs.items():
            coeffs[rv] = coeffs.get(rv, 0) + sign * c
        return LinearForm(coeffs, self.offset + sign * other.offset)

    def to_expr(self) -> Expr:
        """Rebuild as ``c1 * X1 + c2 * X2 + ... + offset``, ids ascending, zero terms dropped."""
        e = None
        for rv in sorted(self.coeffs):
            c = self.coeffs[rv]
            if c == 0:
                continue
            term = mul(c, Var(rv))
            e = term if e is None else add(e, term)
        if e is None:
            return as_expr(self.offset)
        return add(e, self.offset)


def linear_of(e: Expr, g: Optional[DeltaLookup] = None) -> Optional[LinearForm]:
    """
    Decompose ``e`` into a linear combination of variables with constant
    coefficients, or None when some part of it is not linear.
    """
    try:
        return _linear(eval_expr(e, g))
    except (DivisionByZero, NegativeSqrt):
        return None


def _linear(e: Expr) -> Optional[LinearForm]:
    if is_constant(e):
        return LinearForm({}, e.value)
    if isinstance(e, Var):
        return LinearForm({e.rv: 1}, 0)
    if e.op in (Op.ADD, Op.SUB):
        left, right = _linear(e.args[0]), _linear(e.args[1])
        if left is None or right is None:
            return None
        return left.plus(right, 1 if e.op is Op.ADD else -1)
    if e.op is Op.MUL:
        lhs, rhs = e.args
        if is_constant(lhs):
            inner = _linear(rhs)
            return None if inner is None else inner.scaled(lhs.value)
        if is_constant(rhs):
            inner = _linear(lhs)
            return None if inner is None else inner.scaled(rhs.value)
        return None
    if e.op is Op.DIV:
        num, den = e.args
        if not is_constant(den) or den.value == 0:
            return None
        inner = _linear(num)
        return None if inner is None else inner.divided(den.value)
    return None
