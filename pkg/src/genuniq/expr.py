"""Rational expression trees over variables ``x1..xl`` and the row token ``n``.

Templates may contain the row token and the row-indexed builtins ``chebP``,
``tanQ`` and ``tanR``.  :func:`expand_row` fixes ``n`` to an integer and
rewrites every builtin into plain ``+ - * /`` and integer powers, so the
result is a pure rational expression (possibly a DAG with shared subtrees).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ModelError

BUILTINS = ("chebP", "tanQ", "tanR")


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Row:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: "Expr"  # must fold to an integer once the row is fixed


@dataclass(frozen=True)
class Call:
    name: str
    row: "Expr"
    arg: "Expr"


Expr = Union[Const, Var, Row, Neg, BinOp, Pow, Call]


def add(a, b):
    return BinOp("+", a, b)


def sub(a, b):
    return BinOp("-", a, b)


def mul(a, b):
    return BinOp("*", a, b)


def div(a, b):
    return BinOp("/", a, b)


def _children(e: Expr):
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, Pow):
        return (e.base, e.exponent)
    if isinstance(e, Call):
        return (e.row, e.arg)
    return ()


def walk(e: Expr):
    """Yield every distinct node (by identity) of a tree or DAG."""
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(_children(node))


def variables(e: Expr) -> set[int]:
    return {node.index for node in walk(e) if isinstance(node, Var)}


def is_pure(e: Expr) -> bool:
    """True when no row token or builtin call remains."""
    return not any(isinstance(node, (Row, Call)) for node in walk(e))


def fold_int(e: Expr, n: int) -> int:
    """Evaluate a constant expression in the row token to an integer."""
    if isinstance(e, Const):
        v = e.value
    elif isinstance(e, Row):
        return n
    elif isinstance(e, Neg):
        return -fold_int(e.arg, n)
    elif isinstance(e, BinOp):
        a, b = fold_int(e.left, n), fold_int(e.right, n)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0 or a % b:
            raise ModelError("non-integer exponent or row argument")
        return a // b
    elif isinstance(e, Pow):
        a, k = fold_int(e.base, n), fold_int(e.exponent, n)
        if k < 0:
            raise ModelError("negative power inside an integer expression")
        return a**k
    else:
        raise ModelError("exponents and builtin row arguments may only use constants and n")
    if complex(v).imag != 0 or float(complex(v).real) != int(complex(v).real):
        raise ModelError(f"expected an integer, got {v}")
    return int(complex(v).real)


# -- builtin expansions -------------------------------------------------------

def cheb_expr(n: int, x: Expr) -> Expr:
    """T_n(x) via the three-term recurrence; subtrees are shared."""
    if n < 0:
        raise ModelError("chebP requires n >= 0")
    if n == 0:
        return Const(1)
    two_x = mul(Const(2), x)
    prev, cur = Const(1), x
    for _ in range(n - 1):
        prev, cur = cur, sub(mul(two_x, cur), prev)
    return cur


def _half_angle_powers(n: int, t: Expr):
    # with w = (1+it)/(1-it): cos(n*theta) = (w^n + w^-n)/2, sin = (w^n - w^-n)/(2i)
    up = add(Const(1), mul(Const(1j), t))
    down = sub(Const(1), mul(Const(1j), t))
    return Pow(div(up, down), Const(n)), Pow(div(down, up), Const(n))


def tan_q_expr(n: int, t: Expr) -> Expr:
    if n < 0:
        raise ModelError("tanQ requires n >= 0")
    if n == 0:
        return Const(1)
    wp, wm = _half_angle_powers(n, t)
    return div(add(wp, wm), Const(2))


def tan_r_expr(n: int, t: Expr) -> Expr:
    if n < 0:
        raise ModelError("tanR requires n >= 0")
    if n == 0:
        return Const(0)
    wp, wm = _half_angle_powers(n, t)
    return div(sub(wp, wm), Const(2j))


_EXPANDERS = {"chebP": cheb_expr, "tanQ": tan_q_expr, "tanR": tan_r_expr}


def expand_row(e: Expr, n: int) -> Expr:
    """Substitute the row token and expand builtins, giving a pure rational expression."""
    memo: dict[int, Expr] = {}

    def go(node: Expr) -> Expr:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, (Const, Var)):
            out = node
        elif isinstance(node, Row):
            out = Const(n)
        elif isinstance(node, Neg):
            out = Neg(go(node.arg))
        elif isinstance(node, BinOp):
            out = BinOp(node.op, go(node.left), go(node.right))
        elif isinstance(node, Pow):
            k = fold_int(node.exponent, n)
            base = go(node.base)
            out = Pow(base, Const(k)) if k >= 0 else div(Const(1), Pow(base, Const(-k)))
        elif isinstance(node, Call):
            if node.name not in _EXPANDERS:
                raise ModelError(f"unknown primitive {node.name!r}")
            out = _EXPANDERS[node.name](fold_int(node.row, n), go(node.arg))
        else:  # pragma: no cover
            raise TypeError(node)
        memo[key] = out
        return out

    return go(e)


# -- evaluation ---------------------------------------------------------------

def evaluate(e: Expr, env, pole_eps: float = 1e-12, batch: int = 1):
    """Evaluate a pure expression.

    ``env`` maps 0-based variable slot to a value (``Dual`` or complex array of
    shape ``(batch,)``).  Returns ``(value, bad)`` where ``bad`` is a boolean
    array flagging points at which some division failed the relative pole
    guard ``|den| > pole_eps * (1 + |num|)``.
    """
    bad = np.zeros(batch, dtype=bool)
    memo: dict[int, object] = {}

    def raw(v):
        return getattr(v, "value", v)

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Const):
            out = complex(node.value)
        elif isinstance(node, Var):
            out = env[node.index - 1]
        elif isinstance(node, Neg):
            out = -go(node.arg)
        elif isinstance(node, BinOp):
            a, b = go(node.left), go(node.right)
            if node.op == "+":
                out = a + b
            elif node.op == "-":
                out = a - b
            elif node.op == "*":
                out = a * b
            else:
                den, num = np.abs(raw(b)), np.abs(raw(a))
                guard = den <= pole_eps * (1.0 + num)
                if np.any(guard):
                    np.logical_or(bad, guard, out=bad)
                    if np.ndim(guard) == 0:
                        b = 1.0 if not hasattr(b, "value") else b
                out = a / b
        elif isinstance(node, Pow):
            if not isinstance(node.exponent, Const):
                raise ModelError("unexpanded exponent; call expand_row first")
            k = int(node.exponent.value.real)
            base = go(node.base)
            out = base**k if k >= 0 else 1.0 / base ** (-k)
        else:
            raise ModelError("expression still contains a row token or builtin")
        memo[key] = out
        return out

    with np.errstate(all="ignore"):
        value = go(e)
    return value, bad


# -- text form ----------------------------------------------------------------

def _fmt_real(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _fmt_const(c: complex) -> tuple[str, int]:
    c = complex(c)
    if c.imag == 0:
        s = _fmt_real(c.real)
        return (s, 5) if c.real >= 0 else (f"({s})", 5)
    if c.real == 0:
        if c.imag == 1:
            return "i", 5
        return f"({_fmt_real(c.imag)}*i)", 5
    sign = "+" if c.imag >= 0 else "-"
    return f"({_fmt_real(c.real)} {sign} {_fmt_real(abs(c.imag))}*i)", 5


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _text(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return f"x{e.index}", 5
    if isinstance(e, Row):
        return "n", 5
    if isinstance(e, Call):
        return f"{e.name}({to_text(e.row)}, {to_text(e.arg)})", 5
    if isinstance(e, Neg):
        s, p = _text(e.arg)
        return ("-" + (s if p >= 3 else f"({s})")), 3
    if isinstance(e, Pow):
        b, pb = _text(e.base)
        x, px = _text(e.exponent)
        return f"{b if pb >= 5 else f'({b})'}^{x if px >= 5 else f'({x})'}", 4
    prec = _PREC[e.op]
    ls, lp = _text(e.left)
    rs, rp = _text(e.right)
    if lp < prec:
        ls = f"({ls})"
    if rp < prec or (rp == prec and e.op in "-/"):
        rs = f"({rs})"
    return f"{ls} {e.op} {rs}", prec


def to_text(e: Expr) -> str:
    return _text(e)[0]
