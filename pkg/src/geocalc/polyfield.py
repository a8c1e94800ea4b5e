"""Polynomial multivector fields from short text expressions.

Grammar (whitespace is ignored)::

    expr   := [+|-] term { (+|-) term }
    term   := factor { * factor }
    factor := number | x<i> [^ <int>] | e<indices> | ( expr )

Variables ``x1 .. xn`` are coordinates, ``e12`` etc. are basis blades (same
index rules as the multivector notation) and parentheses may be used one
level deep. Factors multiply left to right with the geometric product, so
``e2*e1`` is ``-e12``. Example: ``"x1^2*e1 - 3*x2*e12"``.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict

import numpy as np

from .algebra import Algebra, _mask_from_indices, blade_label, blade_sign
from .errors import MultivectorSyntaxError
from .fields import FieldFn

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<var>x\d+)"
    r"|(?P<blade>e\d+(?:_\d+)*)|(?P<op>[-+*^()]))"
)


class Polynomial:
    """Sparse polynomial with multivector coefficients.

    Stored as ``{(exponents, blade_mask): coefficient}``.
    """

    def __init__(self, n: int, terms=None):
        self.n = n
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0.0}

    @classmethod
    def constant(cls, n, value=1.0, mask=0):
        return cls(n, {((0,) * n, mask): float(value)})

    def __add__(self, other):
        out = defaultdict(float, self.terms)
        for k, v in other.terms.items():
            out[k] += v
        return Polynomial(self.n, out)

    def __neg__(self):
        return Polynomial(self.n, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        out = defaultdict(float)
        for (ea, ma), ca in self.terms.items():
            for (eb, mb), cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[(e, ma ^ mb)] += ca * cb * blade_sign(ma, mb)
        return Polynomial(self.n, out)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.n == other.n and self.terms == other.terms

    def derivative(self, j: int) -> "Polynomial":
        """d/dx^{j+1} (0-based ``j``)."""
        out = defaultdict(float)
        for (e, m), c in self.terms.items():
            if e[j] == 0:
                continue
            e2 = list(e)
            e2[j] -= 1
            out[(tuple(e2), m)] += c * e[j]
        return Polynomial(self.n, out)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def is_scalar(self) -> bool:
        return all(m == 0 for _, m in self.terms)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        dim = 1 << self.n
        out = np.zeros(x.shape[:-1] + (dim,))
        for (e, m), c in sorted(self.terms.items()):
            mono = np.full(x.shape[:-1], c)
            for j, p in enumerate(e):
                if p:
                    mono = mono * x[..., j] ** p
            out[..., m] += mono
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (e, m), c in sorted(self.terms.items(), key=lambda kv: (bin(kv[0][1]).count("1"), kv[0][1], kv[0][0])):
            factors = [repr(abs(c))]
            for j, p in enumerate(e):
                if p:
                    factors.append(f"x{j + 1}" + (f"^{p}" if p > 1 else ""))
            if m:
                factors.append(blade_label(m))
            body = "*".join(factors)
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = []
        pos = 0
        end = len(text.rstrip())
        while pos < end:
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise MultivectorSyntaxError("unexpected character", text, len(text) - len(text[pos:].lstrip()))
            self.tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
            pos = m.end()
        self.i = 0
        self.depth = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def error(self, msg, pos=None):
        raise MultivectorSyntaxError(msg, self.text, self.peek()[2] if pos is None else pos)

    def parse(self) -> Polynomial:
        if not self.tokens:
            self.error("empty expression", 0)
        poly = self.expr()
        if self.i != len(self.tokens):
            self.error("unexpected token")
        return poly

    def expr(self) -> Polynomial:
        sign = 1.0
        while self.peek()[1] in ("+", "-"):
            if self.take()[1] == "-":
                sign = -sign
        total = self.term()
        if sign < 0:
            total = -total
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            total = total + (-t if op == "-" else t)
        return total

    def term(self) -> Polynomial:
        out = self.factor()
        while self.peek()[1] == "*":
            self.take()
            out = out * self.factor()
        return out

    def factor(self) -> Polynomial:
        kind, value, pos = self.take()
        n = self.n
        if kind == "num":
            return Polynomial.constant(n, float(value))
        if kind == "var":
            j = int(value[1:])
            if not 1 <= j <= n:
                self.error(f"variable {value} outside x1..x{n}", pos)
            p = 1
            if self.peek()[1] == "^":
                self.take()
                k2, v2, p2 = self.take()
                if k2 != "num" or not v2.isdigit():
                    self.error("exponent must be a non-negative integer", p2)
                p = int(v2)
            e = [0] * n
            e[j - 1] = p
            return Polynomial(n, {(tuple(e), 0): 1.0})
        if kind == "blade":
            body = value[1:]
            idx = [int(s) for s in body.split("_")] if "_" in body else [int(c) for c in body]
            try:
                mask, sign = _mask_from_indices(idx, n)
            except ValueError:
                self.error(f"blade {value} has an index above {n}", pos)
            return Polynomial.constant(n, sign, mask)
        if value == "(":
            if self.depth >= 1:
                self.error("parentheses may only be nested one level", pos)
            self.depth += 1
            inner = self.expr()
            self.depth -= 1
            if self.take()[1] != ")":
                self.error("missing ')'", pos)
            return inner
        self.error("expected a number, variable, blade or '('", pos)


def parse_polynomial(expr: str, n: int) -> Polynomial:
    return _Parser(expr, n).parse()


def parse_poly_field(expr: str, n: int) -> FieldFn:
    """Polynomial field with exact evaluation and analytic derivatives."""
    alg = Algebra(n)
    poly = parse_polynomial(expr, n)
    partial_polys = [poly.derivative(j) for j in range(n)]

    def partials(x):
        return np.stack([p.evaluate(x) for p in partial_polys], axis=-2)

    field = FieldFn(alg, poly.evaluate, partials, name=expr, smoothness=math.inf)
    field.polynomial = poly
    return field
