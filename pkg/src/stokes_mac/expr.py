"""Safe arithmetic expressions in x, y with exact first and second derivatives.

Expressions are parsed with :mod:`ast` and only a whitelist of nodes is
accepted.  Evaluation runs on second-order jets ``(v, vx, vy, vxx, vxy, vyy)``
so forcing terms and traction data follow from the expression itself.

Syntax: numbers, ``x``, ``y``, ``pi``, ``+ - * /``, ``^`` or ``**`` with any
exponent, and the functions ``sin cos exp sqrt log`` and
``pw(c, a, b)`` (``a`` where ``c >= 0``, else ``b``).
"""
from __future__ import annotations

import ast
import math

import numpy as np

from .errors import InvalidProblemError


class Jet:
    """Value with gradient and Hessian in (x, y)."""

    __slots__ = ("v", "x", "y", "xx", "xy", "yy")

    def __init__(self, v, x=0.0, y=0.0, xx=0.0, xy=0.0, yy=0.0):
        self.v, self.x, self.y, self.xx, self.xy, self.yy = v, x, y, xx, xy, yy

    def tuple(self, shape):
        return tuple(np.broadcast_to(np.asarray(c, dtype=float), shape).copy()
                     for c in (self.v, self.x, self.y, self.xx, self.xy, self.yy))

    # chain rule for g(self) given g, g', g''
    def apply(self, g0, g1, g2) -> "Jet":
        return Jet(
            g0,
            g1 * self.x,
            g1 * self.y,
            g1 * self.xx + g2 * self.x * self.x,
            g1 * self.xy + g2 * self.x * self.y,
            g1 * self.yy + g2 * self.y * self.y,
        )

    def __add__(self, o):
        o = lift(o)
        return Jet(self.v + o.v, self.x + o.x, self.y + o.y, self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.x, -self.y, -self.xx, -self.xy, -self.yy)

    def __sub__(self, o):
        return self + (-lift(o))

    def __rsub__(self, o):
        return lift(o) + (-self)

    def __mul__(self, o):
        o = lift(o)
        return Jet(
            self.v * o.v,
            self.x * o.v + self.v * o.x,
            self.y * o.v + self.v * o.y,
            self.xx * o.v + 2 * self.x * o.x + self.v * o.xx,
            self.xy * o.v + self.x * o.y + self.y * o.x + self.v * o.xy,
            self.yy * o.v + 2 * self.y * o.y + self.v * o.yy,
        )

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.v
        return self.apply(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, o):
        return self * lift(o).reciprocal()

    def __rtruediv__(self, o):
        return lift(o) * self.reciprocal()

    def __pow__(self, o):
        o = lift(o)
        if _is_const(o) and np.ndim(o.v) == 0:
            k, v = float(o.v), self.v
            # skip v**(negative) terms that vanish anyway, so r^1 and r^2 are finite at 0
            g1 = k * v ** (k - 1) if k != 0.0 else 0.0 * v
            g2 = k * (k - 1) * v ** (k - 2) if k not in (0.0, 1.0) else 0.0 * v
            return self.apply(v**k, g1, g2)
        return exp(o * log(self))

    def __rpow__(self, o):
        return lift(o) ** self


def lift(a) -> Jet:
    return a if isinstance(a, Jet) else Jet(a)


def _is_const(j: Jet) -> bool:
    return all(np.all(np.asarray(c) == 0.0) for c in (j.x, j.y, j.xx, j.xy, j.yy))


def sin(a):
    a = lift(a)
    s, c = np.sin(a.v), np.cos(a.v)
    return a.apply(s, c, -s)


def cos(a):
    a = lift(a)
    s, c = np.sin(a.v), np.cos(a.v)
    return a.apply(c, -s, -c)


def exp(a):
    a = lift(a)
    e = np.exp(a.v)
    return a.apply(e, e, e)


def sqrt(a):
    a = lift(a)
    r = np.sqrt(a.v)
    return a.apply(r, 0.5 / r, -0.25 / (r * a.v))


def log(a):
    a = lift(a)
    return a.apply(np.log(a.v), 1.0 / a.v, -1.0 / a.v**2)


def pw(c, a, b):
    c, a, b = lift(c), lift(a), lift(b)
    m = np.asarray(c.v) >= 0.0
    return Jet(*(np.where(m, getattr(a, k), getattr(b, k)) for k in Jet.__slots__))


FUNCS = {"sin": sin, "cos": cos, "exp": exp, "sqrt": sqrt, "log": log, "pw": pw}
CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b, ast.Mult: lambda a, b: a * b,
           ast.Div: lambda a, b: a / b, ast.Pow: lambda a, b: a**b}


class Expression:
    """Compiled expression; call ``jet(x, y)`` for the derivative 6-tuple."""

    def __init__(self, text: str):
        self.text = text
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise InvalidProblemError(f"cannot parse expression {text!r}: {exc.msg}") from exc
        self._check(tree.body)
        self.tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise InvalidProblemError(f"{self.text!r}: only numeric literals allowed")
        elif isinstance(node, ast.Name):
            if node.id not in ("x", "y") and node.id not in CONSTS:
                raise InvalidProblemError(f"{self.text!r}: unknown name {node.id!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise InvalidProblemError(f"{self.text!r}: operator {type(node.op).__name__} not allowed")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCS or node.keywords:
                raise InvalidProblemError(f"{self.text!r}: unknown function call")
            want = 3 if node.func.id == "pw" else 1
            if len(node.args) != want:
                raise InvalidProblemError(f"{self.text!r}: {node.func.id} takes {want} argument(s)")
            for a in node.args:
                self._check(a)
        else:
            raise InvalidProblemError(f"{self.text!r}: construct {type(node).__name__} not allowed")

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return Jet(float(node.value))
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else Jet(CONSTS[node.id])
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        return FUNCS[node.func.id](*(self._eval(a, env) for a in node.args))

    def jet(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        env = {"x": Jet(x, 1.0, 0.0), "y": Jet(y, 0.0, 1.0)}
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._eval(self.tree, env).tuple(x.shape)

    __call__ = jet

    def value(self, x, y):
        return self.jet(x, y)[0]

    def __repr__(self):
        return f"Expression({self.text!r})"
