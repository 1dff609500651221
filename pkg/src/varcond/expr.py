"""Immutable symbolic expressions over independent variables and jet coordinates.

Nodes are built through the module-level constructors (or the arithmetic
operators, which call them).  The constructors apply a small terminating
rewrite set: constant folding, the 0/1 identities, negation collapsing and
pulling constants to the left so that nested constant factors and summands
merge.  Raw node classes may be instantiated directly to obtain an
unsimplified tree; :func:`simplify` rebuilds such a tree bottom-up.

Example
-------
>>> from varcond.jet import JetCoordinate
>>> u = coord(JetCoordinate(1, (0,)))
>>> ux = coord(JetCoordinate(1, (1,)))
>>> str(diff_wrt_coord(u * ux**2, JetCoordinate(1, (1,))))
'2*u1*u1_x1'
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .errors import DomainError, UnboundCoordinate
from .jet import JetCoordinate

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class Expression:
    __slots__ = ("_hash", "_fn")

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        return type(self) is type(other) and hash(self) == hash(other) and self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
            return h

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self._key()))})"

    def __str__(self):
        return to_text(self)

    @property
    def children(self) -> tuple["Expression", ...]:
        return ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)


def _init(obj, **fields):
    for k, v in fields.items():
        object.__setattr__(obj, k, v)


class Constant(Expression):
    __slots__ = ("value",)

    def __init__(self, value):
        v = float(value)
        _init(self, value=0.0 if v == 0 else v)

    def _key(self):
        return (self.value,)


class IndepVar(Expression):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 1:
            raise ValueError("independent variable index is 1-based")
        _init(self, index=int(index))

    def _key(self):
        return (self.index,)


class JetCoord(Expression):
    __slots__ = ("coordinate",)

    def __init__(self, coordinate: JetCoordinate):
        _init(self, coordinate=coordinate)

    def _key(self):
        return (self.coordinate,)


class Neg(Expression):
    __slots__ = ("child",)

    def __init__(self, child):
        _init(self, child=child)

    def _key(self):
        return (self.child,)

    @property
    def children(self):
        return (self.child,)


class _Binary(Expression):
    __slots__ = ("left", "right")
    symbol = "?"

    def __init__(self, left, right):
        _init(self, left=left, right=right)

    def _key(self):
        return (self.left, self.right)

    @property
    def children(self):
        return (self.left, self.right)


class Add(_Binary):
    __slots__ = ()
    symbol = "+"


class Sub(_Binary):
    __slots__ = ()
    symbol = "-"


class Mul(_Binary):
    __slots__ = ()
    symbol = "*"


class Div(_Binary):
    __slots__ = ()
    symbol = "/"


class Pow(Expression):
    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent: int):
        if isinstance(exponent, bool) or not isinstance(exponent, numbers.Integral):
            if isinstance(exponent, float) and exponent.is_integer():
                exponent = int(exponent)
            else:
                raise TypeError(f"Pow exponent must be an integer, got {exponent!r}")
        _init(self, base=base, exponent=int(exponent))

    def _key(self):
        return (self.base, self.exponent)

    @property
    def children(self):
        return (self.base,)


class Func(Expression):
    __slots__ = ("kind", "child")

    def __init__(self, kind: str, child):
        if kind not in FUNCTIONS:
            raise ValueError(f"unknown function {kind!r}")
        _init(self, kind=kind, child=child)

    def _key(self):
        return (self.kind, self.child)

    @property
    def children(self):
        return (self.child,)


ZERO = Constant(0)
ONE = Constant(1)


def as_expr(value) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, numbers.Real) and not isinstance(value, bool):
        return Constant(value)
    raise TypeError(f"cannot convert {value!r} to an expression")


def const(value) -> Constant:
    return Constant(value)


def var(i: int) -> IndepVar:
    return IndepVar(i)


def coord(c: JetCoordinate) -> JetCoord:
    return JetCoord(c)


def _is_const(e, value=None):
    return isinstance(e, Constant) and (value is None or e.value == value)


# -- simplifying constructors ------------------------------------------------


def add(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if isinstance(b, Neg):
        return sub(a, b.child)
    if isinstance(a, Neg):
        return sub(b, a.child)
    if isinstance(b, Constant):
        if b.value < 0:
            return sub(a, Constant(-b.value))
        return add(b, a)
    if isinstance(a, Constant):
        if isinstance(b, Add) and isinstance(b.left, Constant):
            return add(Constant(a.value + b.left.value), b.right)
        if isinstance(b, Sub) and isinstance(b.left, Constant):
            return sub(Constant(a.value + b.left.value), b.right)
    if a == b:
        return mul(Constant(2), a)
    return Add(a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value - b.value)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    if a == b:
        return ZERO
    if isinstance(b, Neg):
        return add(a, b.child)
    if isinstance(b, Constant) and b.value < 0:
        return add(a, Constant(-b.value))
    if isinstance(a, Neg):
        return neg(add(a.child, b))
    return Sub(a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a, -1):
        return neg(b)
    if _is_const(b, -1):
        return neg(a)
    if isinstance(a, Neg):
        return neg(mul(a.child, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.child))
    if isinstance(b, Constant):
        return mul(b, a)
    if isinstance(a, Constant):
        if a.value < 0:
            return neg(mul(Constant(-a.value), b))
        if isinstance(b, Mul) and isinstance(b.left, Constant):
            return mul(Constant(a.value * b.left.value), b.right)
        if isinstance(b, Div) and isinstance(b.right, Constant) and b.right.value != 0:
            return mul(Constant(a.value / b.right.value), b.left)
    elif isinstance(b, Mul) and isinstance(b.left, Constant):
        return mul(b.left, mul(a, b.right))
    if isinstance(a, Mul) and isinstance(a.left, Constant):
        return mul(a.left, mul(a.right, b))
    if a == b:
        return power(a, 2)
    return Mul(a, b)


def div(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Constant) and isinstance(b, Constant) and b.value != 0:
        return Constant(a.value / b.value)
    if _is_const(a, 0):
        return ZERO
    if _is_const(b, 1):
        return a
    if _is_const(b, -1):
        return neg(a)
    if isinstance(a, Neg):
        return neg(div(a.child, b))
    if isinstance(b, Neg):
        return neg(div(a, b.child))
    # hoist constant factors out of quotients
    if isinstance(a, Mul) and isinstance(a.left, Constant):
        if isinstance(b, Constant) and b.value != 0:
            return mul(Constant(a.left.value / b.value), a.right)
        return mul(a.left, div(a.right, b))
    if isinstance(b, Mul) and isinstance(b.left, Constant) and b.left.value != 0:
        return div(div(a, b.right), b.left)
    return Div(a, b)


def neg(a: Expression) -> Expression:
    if isinstance(a, Constant):
        return Constant(-a.value)
    if isinstance(a, Neg):
        return a.child
    if isinstance(a, Sub):
        return sub(a.right, a.left)
    return Neg(a)


def power(base: Expression, exponent: int) -> Expression:
    base = as_expr(base)
    if isinstance(exponent, float) and exponent.is_integer():
        exponent = int(exponent)
    if isinstance(exponent, bool) or not isinstance(exponent, numbers.Integral):
        raise TypeError(f"Pow exponent must be an integer, got {exponent!r}")
    exponent = int(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Constant):
        if base.value != 0 or exponent > 0:
            try:
                return Constant(base.value ** exponent)
            except OverflowError:
                pass
        return Pow(base, exponent)
    if isinstance(base, Pow):
        return power(base.base, base.exponent * exponent)
    if isinstance(base, Mul) and isinstance(base.left, Constant):
        return mul(power(base.left, exponent), power(base.right, exponent))
    if isinstance(base, Func) and base.kind == "sqrt" and exponent % 2 == 0:
        return power(base.child, exponent // 2)
    if isinstance(base, Neg):
        inner = power(base.child, exponent)
        return inner if exponent % 2 == 0 else neg(inner)
    return Pow(base, exponent)


def func(kind: str, child: Expression) -> Expression:
    child = as_expr(child)
    if isinstance(child, Constant):
        v = child.value
        if kind in ("sin", "cos") or (kind == "exp" and v < 700) or (kind == "log" and v > 0) or (kind == "sqrt" and v >= 0):
            return Constant(getattr(math, kind)(v))
    return Func(kind, child)


def sin(e):
    return func("sin", e)


def cos(e):
    return func("cos", e)


def exp(e):
    return func("exp", e)


def log(e):
    return func("log", e)


def sqrt(e):
    return func("sqrt", e)


_REBUILD = {
    Add: add,
    Sub: sub,
    Mul: mul,
    Div: div,
}


def simplify(e: Expression) -> Expression:
    """Rebuild ``e`` bottom-up through the simplifying constructors."""
    if isinstance(e, (Constant, IndepVar, JetCoord)):
        return e
    if isinstance(e, Neg):
        return neg(simplify(e.child))
    if isinstance(e, _Binary):
        return _REBUILD[type(e)](simplify(e.left), simplify(e.right))
    if isinstance(e, Pow):
        return power(simplify(e.base), e.exponent)
    if isinstance(e, Func):
        return func(e.kind, simplify(e.child))
    raise TypeError(f"not an expression: {e!r}")


# -- structure ---------------------------------------------------------------


def free_coordinates(e: Expression) -> frozenset[JetCoordinate]:
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, JetCoord):
            out.add(node.coordinate)
        else:
            stack.extend(node.children)
    return frozenset(out)


def free_indeps(e: Expression) -> frozenset[int]:
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, IndepVar):
            out.add(node.index)
        else:
            stack.extend(node.children)
    return frozenset(out)


def max_order(e: Expression) -> int:
    """Highest derivative order among the jet coordinates of ``e`` (0 if none)."""
    return max((c.order for c in free_coordinates(e)), default=0)


def substitute(e: Expression, bindings: Mapping[JetCoordinate, Expression]) -> Expression:
    """Simultaneously replace the bound jet coordinates of ``e``."""
    if not bindings:
        return e
    cache = {}

    def walk(node):
        if isinstance(node, JetCoord):
            return as_expr(bindings.get(node.coordinate, node))
        if isinstance(node, (Constant, IndepVar)):
            return node
        key = id(node)
        if key in cache:
            return cache[key]
        if isinstance(node, Neg):
            out = neg(walk(node.child))
        elif isinstance(node, _Binary):
            out = _REBUILD[type(node)](walk(node.left), walk(node.right))
        elif isinstance(node, Pow):
            out = power(walk(node.base), node.exponent)
        else:
            out = func(node.kind, walk(node.child))
        cache[key] = out
        return out

    return walk(e)


# -- differentiation ---------------------------------------------------------


def _diff(e: Expression, target: Expression, memo: dict) -> Expression:
    key = id(e)
    if key in memo:
        return memo[key][1]
    if isinstance(e, (Constant, IndepVar, JetCoord)):
        out = ONE if e == target else ZERO
    elif isinstance(e, Neg):
        out = neg(_diff(e.child, target, memo))
    elif isinstance(e, Add):
        out = add(_diff(e.left, target, memo), _diff(e.right, target, memo))
    elif isinstance(e, Sub):
        out = sub(_diff(e.left, target, memo), _diff(e.right, target, memo))
    elif isinstance(e, Mul):
        da = _diff(e.left, target, memo)
        db = _diff(e.right, target, memo)
        out = add(mul(da, e.right), mul(e.left, db))
    elif isinstance(e, Div):
        da = _diff(e.left, target, memo)
        db = _diff(e.right, target, memo)
        out = sub(div(da, e.right), div(mul(e.left, db), power(e.right, 2)))
    elif isinstance(e, Pow):
        db = _diff(e.base, target, memo)
        out = mul(mul(Constant(e.exponent), power(e.base, e.exponent - 1)), db)
    elif isinstance(e, Func):
        dc = _diff(e.child, target, memo)
        if _is_const(dc, 0):
            out = ZERO
        elif e.kind == "sin":
            out = mul(cos(e.child), dc)
        elif e.kind == "cos":
            out = neg(mul(sin(e.child), dc))
        elif e.kind == "exp":
            out = mul(e, dc)
        elif e.kind == "log":
            out = div(dc, e.child)
        else:
            out = div(dc, mul(Constant(2), e))
    else:
        raise TypeError(f"not an expression: {e!r}")
    # keep e alive so id() stays unique for the lifetime of memo
    memo[key] = (e, out)
    return out


def diff_wrt_coord(e: Expression, c: JetCoordinate) -> Expression:
    """Partial derivative with respect to jet coordinate ``c``; everything
    else, including x, is held fixed."""
    if c not in free_coordinates(e):
        return ZERO
    return _diff(e, JetCoord(c), {})


def diff_wrt_indep(e: Expression, i: int) -> Expression:
    """Explicit partial derivative along ``x_i``; jet coordinates are treated
    as symbols independent of x (this is not the total derivative)."""
    if i not in free_indeps(e):
        return ZERO
    return _diff(e, IndepVar(i), {})


# -- evaluation --------------------------------------------------------------


@dataclass(frozen=True)
class Point:
    indep: Sequence[float]
    jet: Mapping[JetCoordinate, float]


def _checked_pow(b, n):
    if b == 0 and n < 0:
        raise DomainError(f"0 raised to negative power {n}")
    try:
        return b ** n
    except OverflowError:
        raise DomainError(f"overflow in {b}^{n}") from None


def _checked_div(a, b):
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def _checked_log(v):
    if v <= 0:
        raise DomainError(f"log of nonpositive value {v}")
    return math.log(v)


def _checked_sqrt(v):
    if v < 0:
        raise DomainError(f"sqrt of negative value {v}")
    return math.sqrt(v)


def _checked_exp(v):
    try:
        return math.exp(v)
    except OverflowError:
        raise DomainError(f"exp overflow at {v}") from None


_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": _checked_exp,
    "log": _checked_log,
    "sqrt": _checked_sqrt,
}


def _build(e: Expression) -> Callable:
    if isinstance(e, Constant):
        v = e.value
        return lambda x, jet: v
    if isinstance(e, IndepVar):
        i = e.index - 1
        return lambda x, jet: x[i]
    if isinstance(e, JetCoord):
        c = e.coordinate

        def lookup(x, jet):
            try:
                return jet[c]
            except KeyError:
                raise UnboundCoordinate(f"no value bound for coordinate {c}") from None

        return lookup
    if isinstance(e, Neg):
        f = compile_expression(e.child)
        return lambda x, jet: -f(x, jet)
    if isinstance(e, Pow):
        f = compile_expression(e.base)
        n = e.exponent
        if n == 2:
            def sq(x, jet):
                v = f(x, jet)
                return v * v

            return sq
        return lambda x, jet: _checked_pow(f(x, jet), n)
    if isinstance(e, Func):
        f = compile_expression(e.child)
        g = _FUNCS[e.kind]
        return lambda x, jet: g(f(x, jet))
    fa = compile_expression(e.left)
    fb = compile_expression(e.right)
    if isinstance(e, Add):
        return lambda x, jet: fa(x, jet) + fb(x, jet)
    if isinstance(e, Sub):
        return lambda x, jet: fa(x, jet) - fb(x, jet)
    if isinstance(e, Mul):
        return lambda x, jet: fa(x, jet) * fb(x, jet)
    return lambda x, jet: _checked_div(fa(x, jet), fb(x, jet))


def compile_expression(e: Expression) -> Callable[[Sequence[float], Mapping], float]:
    """Closure ``f(indep, jet) -> float`` evaluating ``e``; cached on the node."""
    try:
        return e._fn
    except AttributeError:
        fn = _build(e)
        object.__setattr__(e, "_fn", fn)
        return fn


def evaluate(e: Expression, p: Point) -> float:
    """Value of ``e`` at ``p`` in double precision.

    Raises DomainError on x/0, log of a nonpositive value, sqrt of a
    negative value or overflow, and UnboundCoordinate when ``p`` lacks a
    coordinate occurring in ``e``.
    """
    try:
        return float(compile_expression(e)(p.indep, p.jet))
    except IndexError:
        raise UnboundCoordinate(f"point has only {len(p.indep)} independent values") from None


# -- printing ----------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e):
    if isinstance(e, Constant):
        return 3 if e.value < 0 else 5
    return _PREC.get(type(e), 5)


def _fmt_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_text(e: Expression, spec=None) -> str:
    """Render ``e`` in the parser's syntax with minimal parentheses.

    With a JetSpec the declared variable names are used, otherwise the
    canonical ``x<i>`` / ``u<j>`` names.
    """
    dep_names = getattr(spec, "dep_names", None)
    indep_names = getattr(spec, "indep_names", None)

    def wrap(child, min_prec):
        s = go(child)
        return f"({s})" if _prec(child) < min_prec else s

    def go(node):
        if isinstance(node, Constant):
            return _fmt_number(node.value)
        if isinstance(node, IndepVar):
            return indep_names[node.index - 1] if indep_names else f"x{node.index}"
        if isinstance(node, JetCoord):
            return node.coordinate.name(dep_names, indep_names)
        if isinstance(node, Neg):
            return "-" + wrap(node.child, 4)
        if isinstance(node, Pow):
            base = wrap(node.base, 5)
            n = node.exponent
            return f"{base}^{n}" if n >= 0 else f"{base}^({n})"
        if isinstance(node, Func):
            return f"{node.kind}({go(node.child)})"
        p = _PREC[type(node)]
        left = wrap(node.left, p)
        right = wrap(node.right, p + 1 if isinstance(node, (Sub, Div)) else p)
        if isinstance(node, (Add, Sub)):
            return f"{left} {node.symbol} {right}"
        return f"{left}{node.symbol}{right}"

    return go(e)
