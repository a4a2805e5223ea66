"""Tiny expression language for right-hand sides f(x, y).

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          -- right associative
    atom   := NUMBER | 'x' | 'y' | FUNC '(' expr {',' expr} ')' | '(' expr ')'

with FUNC one of sin, cos, exp, log, abs, sqrt (one argument) and pow
(two arguments).  Parsed trees are immutable and evaluation is pure, so
concurrent use is safe.  Evaluation accepts scalars or numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalDomainError, RhsNameError, RhsSyntaxError

__all__ = [
    "Num",
    "Var",
    "Neg",
    "Bin",
    "Call",
    "RhsExpr",
    "FUNCTIONS",
    "parse_rhs",
    "format_rhs",
    "eval_rhs",
    "estimate_lipschitz",
    "builtin_rhs",
    "EXPR_SYNTAX",
]

EXPR_SYNTAX = (
    "Operators + - * / ^ (with ^ binding tightest, then unary -, then * /, "
    "then + -; ^ is right associative); variables x and y; functions "
    "sin, cos, exp, log, abs, sqrt and two-argument pow."
)

FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "log": 1,
    "abs": 1,
    "sqrt": 1,
    "pow": 2,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # 'x' or 'y'


@dataclass(frozen=True)
class Neg:
    arg: "RhsExpr"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: "RhsExpr"
    right: "RhsExpr"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


RhsExpr = Union[Num, Var, Neg, Bin, Call]


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            off = len(text) - len(stripped)
            raise RhsSyntaxError(
                f"unexpected character {stripped[0]!r} at offset {off}",
                offset=off,
                expected="number, identifier, or operator",
            )
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: str):
        kind, val, off = self.peek()
        shown = "end of input" if kind == "end" else repr(val)
        raise RhsSyntaxError(
            f"expected {expected} but found {shown} at offset {off}",
            offset=off,
            expected=expected,
        )

    def expect_op(self, op: str):
        kind, val, _ = self.peek()
        if kind == "op" and val == op:
            return self.next()
        self.fail(f"'{op}'")

    def parse(self) -> RhsExpr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            self.fail("end of input")
        return e

    def expr(self) -> RhsExpr:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                node = Bin(val, node, self.term())
            else:
                return node

    def term(self) -> RhsExpr:
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                node = Bin(val, node, self.unary())
            else:
                return node

    def unary(self) -> RhsExpr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> RhsExpr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> RhsExpr:
        kind, val, off = self.peek()
        if kind == "num":
            self.next()
            return Num(float(val))
        if kind == "name":
            self.next()
            if val in ("x", "y"):
                return Var(val)
            if val in FUNCTIONS:
                self.expect_op("(")
                args = [self.expr()]
                while True:
                    k2, v2, _ = self.peek()
                    if k2 == "op" and v2 == ",":
                        self.next()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                arity = FUNCTIONS[val]
                if len(args) != arity:
                    raise RhsSyntaxError(
                        f"{val} takes {arity} argument(s), got {len(args)} "
                        f"at offset {off}",
                        offset=off,
                        expected=f"{arity} argument(s)",
                    )
                return Call(val, tuple(args))
            raise RhsNameError(
                f"unknown identifier {val!r} at offset {off}", name=val, offset=off
            )
        if kind == "op" and val == "(":
            self.next()
            e = self.expr()
            self.expect_op(")")
            return e
        self.fail("a number, variable, function, or '('")


def parse_rhs(text: str) -> RhsExpr:
    """Parse expression text; errors carry the byte offset."""
    return _Parser(text).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(e: RhsExpr) -> int:
    if isinstance(e, Bin):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    return 5


def format_rhs(e: RhsExpr) -> str:
    """Canonical text; parse(format_rhs(t)) is structurally equal to t."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = format_rhs(e.arg)
        if _prec(e.arg) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(format_rhs(a) for a in e.args)})"
    if isinstance(e, Bin):
        p = _PREC[e.op]
        ls = format_rhs(e.left)
        rs = format_rhs(e.right)
        if e.op == "^":
            # right associative: parenthesize an equal-precedence left child
            if _prec(e.left) <= p:
                ls = f"({ls})"
            if _prec(e.right) < p:
                rs = f"({rs})"
        else:
            if _prec(e.left) < p:
                ls = f"({ls})"
            if _prec(e.right) <= p:
                rs = f"({rs})"
        return f"{ls}{e.op}{rs}"
    raise TypeError(f"not an expression node: {e!r}")


def _first_bad(x, y, mask):
    bad = np.argmax(~mask)
    xb = x if np.ndim(x) == 0 else np.ravel(np.broadcast_to(x, mask.shape))[bad]
    yb = y if np.ndim(y) == 0 else np.ravel(np.broadcast_to(y, mask.shape))[bad]
    return float(xb), float(yb)


def _check(node: RhsExpr, out, x, y):
    finite = np.isfinite(out)
    if np.all(finite):
        return out
    xb, yb = _first_bad(x, y, np.atleast_1d(finite))
    raise EvalDomainError(
        f"{format_rhs(node)} is not finite at x={xb}, y={yb}",
        node=format_rhs(node),
        x=xb,
        y=yb,
    )


def eval_rhs(e: RhsExpr, x, y):
    """Evaluate f(x, y); accepts scalars or broadcastable numpy arrays."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)

    def ev(node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            return xa if node.name == "x" else ya
        if isinstance(node, Neg):
            return -ev(node.arg)
        if isinstance(node, Bin):
            l = ev(node.left)
            r = ev(node.right)
            with np.errstate(all="ignore"):
                if node.op == "+":
                    out = l + r
                elif node.op == "-":
                    out = l - r
                elif node.op == "*":
                    out = l * r
                elif node.op == "/":
                    out = np.divide(l, r)
                else:
                    out = np.power(l, r)
            return _check(node, out, xa, ya)
        if isinstance(node, Call):
            args = [ev(a) for a in node.args]
            with np.errstate(all="ignore"):
                if node.fn == "sin":
                    out = np.sin(args[0])
                elif node.fn == "cos":
                    out = np.cos(args[0])
                elif node.fn == "exp":
                    out = np.exp(args[0])
                elif node.fn == "log":
                    out = np.log(args[0])
                elif node.fn == "abs":
                    out = np.abs(args[0])
                elif node.fn == "sqrt":
                    out = np.sqrt(args[0])
                else:
                    out = np.power(args[0], args[1])
            return _check(node, out, xa, ya)
        raise TypeError(f"not an expression node: {node!r}")

    out = np.asarray(ev(e), dtype=float)
    shape = np.broadcast_shapes(xa.shape, ya.shape)
    if out.shape != shape:
        out = np.broadcast_to(out, shape).copy()
    if not np.all(np.isfinite(out)):
        xb, yb = _first_bad(xa, ya, np.atleast_1d(np.isfinite(out)))
        raise EvalDomainError(
            f"expression is not finite at x={xb}, y={yb}", x=xb, y=yb
        )
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(out)
    return out


def estimate_lipschitz(
    e: RhsExpr,
    x_range: tuple,
    y_range: tuple,
    samples: int = 128,
) -> float:
    """Heuristic bound on |df/dy| over a sample lattice, inflated by 1.25.

    Central differences with step 1e-6 times the y-range width; this is
    a sampling estimate, never a proof of a Lipschitz constant.
    """
    if samples < 100:
        raise ValueError(f"samples must be at least 100, got {samples}")
    x_lo, x_hi = map(float, x_range)
    y_lo, y_hi = map(float, y_range)
    if x_hi < x_lo or y_hi < y_lo:
        raise ValueError("ranges must be nonempty")
    width = y_hi - y_lo
    if width <= 0.0:
        raise ValueError("y_range must have positive width for differencing")
    step = 1e-6 * width
    xs = np.linspace(x_lo, x_hi, samples)
    ys = np.linspace(y_lo, y_hi, samples)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    try:
        dplus = eval_rhs(e, X, Y + step)
        dminus = eval_rhs(e, X, Y - step)
    except EvalDomainError as err:
        raise EvalDomainError(
            f"lipschitz sampling failed: {err} (lattice point x={err.x}, y={err.y})",
            node=err.node,
            x=err.x,
            y=err.y,
        ) from err
    deriv = np.abs(dplus - dminus) / (2.0 * step)
    return float(np.max(deriv)) * 1.25


def builtin_rhs(name: str) -> RhsExpr | None:
    """Named right-hand sides that bypass the parser.

    ``zero`` is the constant 0; ``linear:LAMBDA`` is lambda*y.
    """
    if name == "zero":
        return Num(0.0)
    if name.startswith("linear:"):
        lam = float(name.split(":", 1)[1])
        return Bin("*", Num(lam), Var("y"))
    return None
