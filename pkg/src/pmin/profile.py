"""Scalar profile functions of the ruling parameter ``t`` and surface profiles.

A :class:`ProfileFunction` wraps an expression tree.  Trees are built by
:func:`parse_expression` from a small grammar, from tabulated samples
(cubic interpolation), or programmatically through arithmetic on
``ProfileFunction`` objects.  Every node knows its exact first derivative,
so ``f.derivative()`` is again a ``ProfileFunction``.

Evaluation is vectorised over numpy arrays and raises :class:`DomainError`
whenever a value is undefined or not finite.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, ExpressionSyntaxError, ProfileError

__all__ = [
    "ProfileFunction",
    "SurfaceProfile",
    "parse_expression",
    "eval_with_derivative",
    "tabulated",
    "constant",
    "variable",
    "FUNCTIONS",
]


# --------------------------------------------------------------------------
# expression tree
# --------------------------------------------------------------------------

class Node:
    """Base class of expression nodes.  Nodes are immutable."""

    printable = True

    def eval(self, t):
        raise NotImplementedError

    def diff(self) -> "Node":
        raise NotImplementedError

    def is_const(self) -> bool:
        return False


class Const(Node):
    def __init__(self, value: float, name: str | None = None):
        self.value = float(value)
        self.name = name

    def eval(self, t):
        return self.value

    def diff(self):
        return ZERO

    def is_const(self):
        return True

    def __str__(self):
        if self.name:
            return self.name
        text = repr(self.value)
        return f"({text})" if self.value < 0 or text.startswith("-") else text


class Var(Node):
    def eval(self, t):
        return t

    def diff(self):
        return ONE

    def __str__(self):
        return "t"


ZERO = Const(0.0)
ONE = Const(1.0)
T = Var()


class Neg(Node):
    def __init__(self, arg: Node):
        self.arg = arg

    def eval(self, t):
        return -self.arg.eval(t)

    def diff(self):
        return neg(self.arg.diff())

    def __str__(self):
        return f"(-{self.arg})"


class Binary(Node):
    symbol = "?"

    def __init__(self, left: Node, right: Node):
        self.left = left
        self.right = right

    @property
    def printable(self):
        return self.left.printable and self.right.printable

    def __str__(self):
        return f"({self.left} {self.symbol} {self.right})"


class Add(Binary):
    symbol = "+"

    def eval(self, t):
        return self.left.eval(t) + self.right.eval(t)

    def diff(self):
        return add(self.left.diff(), self.right.diff())


class Sub(Binary):
    symbol = "-"

    def eval(self, t):
        return self.left.eval(t) - self.right.eval(t)

    def diff(self):
        return sub(self.left.diff(), self.right.diff())


class Mul(Binary):
    symbol = "*"

    def eval(self, t):
        return self.left.eval(t) * self.right.eval(t)

    def diff(self):
        return add(mul(self.left.diff(), self.right), mul(self.left, self.right.diff()))


class Div(Binary):
    symbol = "/"

    def eval(self, t):
        return np.divide(self.left.eval(t), self.right.eval(t))

    def diff(self):
        num = sub(mul(self.left.diff(), self.right), mul(self.left, self.right.diff()))
        return div(num, power(self.right, Const(2.0)))


class Pow(Binary):
    symbol = "^"

    def eval(self, t):
        return np.power(self.left.eval(t), self.right.eval(t))

    def diff(self):
        base, expo = self.left, self.right
        if expo.is_const():
            k = expo.eval(0.0)
            return mul(mul(Const(k), power(base, Const(k - 1.0))), base.diff())
        # d(f^g) = f^g (g' log f + g f'/f)
        inner = add(mul(expo.diff(), func("log", base)), div(mul(expo, base.diff()), base))
        return mul(self, inner)


def _dsec2(u):
    return div(ONE, power(func("cos", u), Const(2.0)))


# name -> (numpy evaluator, derivative of outer function expressed in its argument)
FUNCTIONS: dict[str, tuple[Callable, Callable[[Node], Node]]] = {
    "sin": (np.sin, lambda u: func("cos", u)),
    "cos": (np.cos, lambda u: neg(func("sin", u))),
    "tan": (np.tan, _dsec2),
    "atan": (np.arctan, lambda u: div(ONE, add(ONE, power(u, Const(2.0))))),
    # continuous branch with values in (0, pi)
    "acot": (lambda x: 0.5 * np.pi - np.arctan(x),
             lambda u: neg(div(ONE, add(ONE, power(u, Const(2.0)))))),
    "sqrt": (np.sqrt, lambda u: div(ONE, mul(Const(2.0), func("sqrt", u)))),
    "exp": (np.exp, lambda u: func("exp", u)),
    "log": (np.log, lambda u: div(ONE, u)),
}


class Func(Node):
    def __init__(self, name: str, arg: Node):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg

    @property
    def printable(self):
        return self.arg.printable

    def eval(self, t):
        return FUNCTIONS[self.name][0](self.arg.eval(t))

    def diff(self):
        return mul(FUNCTIONS[self.name][1](self.arg), self.arg.diff())

    def __str__(self):
        return f"{self.name}({self.arg})"


class Spline(Node):
    """Piecewise cubic from tabulated samples; no extrapolation."""

    printable = False

    def __init__(self, ppoly, lo: float, hi: float):
        self.ppoly = ppoly
        self.lo = lo
        self.hi = hi

    def eval(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.asarray(self.ppoly(t_arr), dtype=float)
        outside = (t_arr < self.lo) | (t_arr > self.hi)
        if np.any(outside):
            out = np.where(outside, np.nan, out)
        return out if out.ndim else float(out)

    def diff(self):
        return Spline(self.ppoly.derivative(), self.lo, self.hi)

    def __str__(self):
        return f"<table on [{self.lo!r}, {self.hi!r}]>"


class Compose(Node):
    """``outer(inner(t))``."""

    printable = False

    def __init__(self, outer: Node, inner: Node):
        self.outer = outer
        self.inner = inner

    def eval(self, t):
        return self.outer.eval(self.inner.eval(t))

    def diff(self):
        return mul(Compose(self.outer.diff(), self.inner), self.inner.diff())

    def __str__(self):
        return f"<compose {self.outer} of {self.inner}>"


class Inverse(Node):
    """Inverse of a strictly monotone node on ``[lo, hi]``.

    Evaluated by vectorised bisection followed by two Newton steps.
    """

    printable = False

    def __init__(self, fn: Node, lo: float, hi: float):
        self.fn = fn
        self.lo = float(lo)
        self.hi = float(hi)
        f_lo, f_hi = float(fn.eval(self.lo)), float(fn.eval(self.hi))
        self.increasing = f_hi > f_lo
        self.range = (min(f_lo, f_hi), max(f_lo, f_hi))
        self._dfn = fn.diff()

    def eval(self, u):
        u_arr = np.asarray(u, dtype=float)
        # endpoint round-off is tolerated; the argument is clipped back in
        slack = 1e-12 * (1.0 + max(abs(self.range[0]), abs(self.range[1])))
        inside = (u_arr >= self.range[0] - slack) & (u_arr <= self.range[1] + slack)
        u_arr = np.clip(u_arr, *self.range)
        sign = 1.0 if self.increasing else -1.0
        lo = np.full(u_arr.shape, self.lo)
        hi = np.full(u_arr.shape, self.hi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = sign * (np.asarray(self.fn.eval(mid)) - u_arr) < 0.0
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        tau = 0.5 * (lo + hi)
        for _ in range(2):
            slope = np.asarray(self._dfn.eval(tau), dtype=float)
            step = np.divide(np.asarray(self.fn.eval(tau)) - u_arr, slope,
                             out=np.zeros_like(tau), where=slope != 0.0)
            cand = tau - step
            tau = np.where((cand >= self.lo) & (cand <= self.hi), cand, tau)
        tau = np.where(inside, tau, np.nan)
        return tau if tau.ndim else float(tau)

    def diff(self):
        return div(ONE, Compose(self._dfn, self))

    def __str__(self):
        return f"<inverse of {self.fn} on [{self.lo!r}, {self.hi!r}]>"


# smart constructors with light constant folding ------------------------------

def _c(node):
    return node.is_const()


def _cval(node):
    return float(node.eval(0.0))


def neg(a: Node) -> Node:
    if _c(a) and not getattr(a, "name", None):
        return Const(-_cval(a))
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Node, b: Node) -> Node:
    if _c(a) and _cval(a) == 0.0:
        return b
    if _c(b) and _cval(b) == 0.0:
        return a
    return Add(a, b)


def sub(a: Node, b: Node) -> Node:
    if _c(b) and _cval(b) == 0.0:
        return a
    if _c(a) and _cval(a) == 0.0:
        return neg(b)
    return Sub(a, b)


def mul(a: Node, b: Node) -> Node:
    for x, y in ((a, b), (b, a)):
        if _c(x):
            v = _cval(x)
            if v == 0.0:
                return ZERO
            if v == 1.0:
                return y
    return Mul(a, b)


def div(a: Node, b: Node) -> Node:
    if _c(a) and _cval(a) == 0.0:
        return ZERO
    if _c(b) and _cval(b) == 1.0:
        return a
    return Div(a, b)


def power(a: Node, b: Node) -> Node:
    if _c(b) and _cval(b) == 1.0:
        return a
    if _c(b) and _cval(b) == 0.0:
        return ONE
    return Pow(a, b)


def func(name: str, arg: Node) -> Node:
    return Func(name, arg)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(src):
            if src[pos:].strip() == "":
                break
            m = _TOKEN.match(src, pos)
            if not m or m.end() == pos:
                offset = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
                raise ExpressionSyntaxError(f"unexpected character {src[offset]!r}", offset, src)
            kind = m.lastgroup
            text = m.group(kind)
            start = m.start(kind)
            if text == "**":
                text = "^"
            self.tokens.append((kind, text, start))
            pos = m.end()
        self.tokens.append(("end", "", len(src)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, got, pos = self.take()
        if got != text:
            raise ExpressionSyntaxError(f"expected {text!r}, got {got or 'end of input'!r}", pos, self.src)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", pos, self.src)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.factor())
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.factor())
        return base

    def primary(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if text == "t":
                return T
            if text == "pi":
                return Const(math.pi, "pi")
            if text in FUNCTIONS or text == "pow":
                self.expect("(")
                arg = self.expr()
                if text == "pow":
                    self.expect(",")
                    expo = self.expr()
                    self.expect(")")
                    return Pow(arg, expo)
                self.expect(")")
                return Func(text, arg)
            raise ExpressionSyntaxError(f"unknown name {text!r}", pos, self.src)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionSyntaxError(f"unexpected {text or 'end of input'!r}", pos, self.src)


# --------------------------------------------------------------------------
# public function type
# --------------------------------------------------------------------------

def _as_node(value) -> Node:
    if isinstance(value, ProfileFunction):
        return value.node
    if isinstance(value, Node):
        return value
    return Const(float(value))


@dataclass(frozen=True, eq=False)
class ProfileFunction:
    """Scalar function of ``t`` with an exact first derivative."""

    node: Node
    source: str | None = field(default=None, compare=False)

    def __call__(self, t):
        with np.errstate(all="ignore"):
            out = self.node.eval(t)
        return _checked(out, t)

    @cached_property
    def _derivative(self) -> "ProfileFunction":
        return ProfileFunction(self.node.diff())

    def derivative(self) -> "ProfileFunction":
        return self._derivative

    def eval_with_derivative(self, t):
        return self(t), self._derivative(t)

    @property
    def is_expression(self) -> bool:
        return self.node.printable

    @property
    def is_constant(self) -> bool:
        return self.node.is_const()

    def to_text(self) -> str:
        if not self.node.printable:
            raise ValueError("tabulated or composed functions have no expression text")
        return str(self.node)

    def __str__(self):
        return self.source if self.source is not None else str(self.node)

    def __repr__(self):
        return f"ProfileFunction({str(self)!r})"

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        return ProfileFunction(add(self.node, _as_node(other)))

    def __radd__(self, other):
        return ProfileFunction(add(_as_node(other), self.node))

    def __sub__(self, other):
        return ProfileFunction(sub(self.node, _as_node(other)))

    def __rsub__(self, other):
        return ProfileFunction(sub(_as_node(other), self.node))

    def __mul__(self, other):
        return ProfileFunction(mul(self.node, _as_node(other)))

    def __rmul__(self, other):
        return ProfileFunction(mul(_as_node(other), self.node))

    def __truediv__(self, other):
        return ProfileFunction(div(self.node, _as_node(other)))

    def __rtruediv__(self, other):
        return ProfileFunction(div(_as_node(other), self.node))

    def __neg__(self):
        return ProfileFunction(neg(self.node))

    def apply(self, name: str) -> "ProfileFunction":
        """Wrap in one of the grammar functions, e.g. ``f.apply("cos")``."""
        return ProfileFunction(Func(name, self.node))

    def compose(self, inner: "ProfileFunction") -> "ProfileFunction":
        return ProfileFunction(Compose(self.node, inner.node))

    def inverse(self, lo: float, hi: float) -> "ProfileFunction":
        """Inverse function; ``self`` must be strictly monotone on ``[lo, hi]``."""
        return ProfileFunction(Inverse(self.node, lo, hi))


def _checked(out, t):
    arr = np.asarray(out, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if arr.shape != t_arr.shape:
        arr = np.broadcast_to(arr, t_arr.shape).copy() if t_arr.ndim else arr.reshape(())
    if not np.all(np.isfinite(arr)):
        bad = np.flatnonzero(~np.isfinite(np.atleast_1d(arr)))[0]
        where = float(np.atleast_1d(t_arr)[bad]) if t_arr.ndim else float(t_arr)
        raise DomainError(f"profile function undefined at t={where!r}", where)
    return arr if arr.ndim else float(arr)


def parse_expression(src: str) -> ProfileFunction:
    """Parse an expression in ``t`` into a :class:`ProfileFunction`.

    >>> parse_expression("acot(t/2)")(2.0)  # doctest: +ELLIPSIS
    0.785398...
    """
    node = _Parser(src).parse()
    return ProfileFunction(node, source=src.strip())


def eval_with_derivative(f: ProfileFunction, t):
    return f.eval_with_derivative(t)


def constant(value: float) -> ProfileFunction:
    return ProfileFunction(Const(value))


def variable() -> ProfileFunction:
    return ProfileFunction(T)


def tabulated(ts: Sequence[float], values: Sequence[float]) -> ProfileFunction:
    """Cubic interpolant of samples (not-a-knot ends, exact on cubics)."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts.ndim != 1 or ts.shape != values.shape or len(ts) < 2:
        raise ProfileError("tabulated profile needs matching 1-D sample arrays")
    if np.any(np.diff(ts) <= 0):
        raise ProfileError("tabulated sample abscissae must be strictly increasing")
    spline = CubicSpline(ts, values)
    return ProfileFunction(Spline(spline, float(ts[0]), float(ts[-1])))


def _coerce(value, key: str) -> ProfileFunction:
    if isinstance(value, ProfileFunction):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return constant(float(value))
    if isinstance(value, str):
        try:
            return parse_expression(value)
        except ExpressionSyntaxError as exc:
            exc.key = key
            raise
    if isinstance(value, dict) and {"t", "f"} <= set(value):
        return tabulated(value["t"], value["f"])
    raise ProfileError(f"cannot interpret {key!r}: {value!r}")


# --------------------------------------------------------------------------
# surface profile
# --------------------------------------------------------------------------

PERIODIC_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SurfaceProfile:
    """The four profile functions plus parameter ranges.

    The surface is ``X(s, t) = (s sin(theta) + alpha, -s cos(theta) + beta,
    s (beta sin(theta) + alpha cos(theta)) + gamma)``.
    """

    theta: ProfileFunction
    alpha: ProfileFunction
    beta: ProfileFunction
    gamma: ProfileFunction
    t_range: tuple[float, float] = (-10.0, 10.0)
    s_range: tuple[float, float] = (-10.0, 10.0)
    topology: str = "band"
    name: str | None = None

    def __post_init__(self):
        for key in ("t_range", "s_range"):
            lo, hi = (float(v) for v in getattr(self, key))
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ProfileError(f"{key} must be a finite interval [a, b] with a < b")
            object.__setattr__(self, key, (lo, hi))
        if self.topology not in ("band", "annulus"):
            raise ProfileError(f"topology must be 'band' or 'annulus', not {self.topology!r}")
        ts = np.linspace(*self.t_range, 33)
        for key in ("theta", "alpha", "beta", "gamma"):
            f = getattr(self, key)
            if not isinstance(f, ProfileFunction):
                object.__setattr__(self, key, f := _coerce(f, key))
            f(ts)
        if self.topology == "annulus":
            a, b = self.t_range
            for key in ("theta", "alpha", "beta", "gamma"):
                f = getattr(self, key)
                (fa, da), (fb, db) = f.eval_with_derivative(a), f.eval_with_derivative(b)
                jump = fb - fa
                if key == "theta":
                    # a ruling is a line: theta and theta + k pi give the same one
                    jump -= math.pi * round(jump / math.pi)
                if abs(jump) > PERIODIC_TOL or abs(da - db) > PERIODIC_TOL:
                    raise ProfileError(f"annulus profile: {key} is not periodic on {self.t_range}")

    @property
    def functions(self):
        return self.theta, self.alpha, self.beta, self.gamma

    @property
    def is_expression(self) -> bool:
        return all(f.is_expression for f in self.functions)

    def with_ranges(self, t_range=None, s_range=None) -> "SurfaceProfile":
        return SurfaceProfile(self.theta, self.alpha, self.beta, self.gamma,
                              t_range or self.t_range, s_range or self.s_range,
                              self.topology, self.name)

    @classmethod
    def from_delta_xi(cls, theta, delta, xi, gamma, **kw) -> "SurfaceProfile":
        theta, delta, xi = (_coerce(v, k) for v, k in ((theta, "theta"), (delta, "delta"), (xi, "xi")))
        c, s = theta.apply("cos"), theta.apply("sin")
        alpha = delta * c + xi * s
        beta = delta * s - xi * c
        return cls(theta, alpha, beta, _coerce(gamma, "gamma"), **kw)

    @classmethod
    def from_dict(cls, doc: dict, name: str | None = None) -> "SurfaceProfile":
        if not isinstance(doc, dict):
            raise ProfileError("profile document must be an object")
        missing = [k for k in ("theta", "gamma") if k not in doc]
        if missing:
            raise ProfileError(f"missing keys: {', '.join(missing)}")
        kw = dict(
            t_range=tuple(doc.get("t_range", (-10.0, 10.0))),
            s_range=tuple(doc.get("s_range", (-10.0, 10.0))),
            topology=doc.get("topology", "band"),
            name=name or doc.get("name"),
        )
        for key in ("t_range", "s_range"):
            if len(kw[key]) != 2:
                raise ProfileError(f"{key} must have two entries")
        if "delta" in doc or "xi" in doc:
            if "alpha" in doc or "beta" in doc:
                raise ProfileError("give either alpha/beta or delta/xi, not both")
            return cls.from_delta_xi(doc["theta"], doc.get("delta", 0.0), doc.get("xi", 0.0),
                                     doc["gamma"], **kw)
        return cls(_coerce(doc["theta"], "theta"), _coerce(doc.get("alpha", 0.0), "alpha"),
                   _coerce(doc.get("beta", 0.0), "beta"), _coerce(doc["gamma"], "gamma"), **kw)

    @classmethod
    def load(cls, path) -> "SurfaceProfile":
        path = Path(path)
        doc = json.loads(path.read_text())
        return cls.from_dict(doc, name=doc.get("name", path.stem))

    def to_dict(self, samples: int = 201) -> dict:
        """JSON-ready description; non-printable functions become sample tables."""
        out = {}
        ts = np.linspace(*self.t_range, samples)
        for key, f in zip(("theta", "alpha", "beta", "gamma"), self.functions):
            out[key] = f.to_text() if f.is_expression else {"t": ts.tolist(), "f": f(ts).tolist()}
        out["t_range"] = list(self.t_range)
        out["s_range"] = list(self.s_range)
        out["topology"] = self.topology
        if self.name:
            out["name"] = self.name
        return out
