"""Plain-text multivector notation.

Terms are written ``coef*e{indices}`` and joined with ``+``/``-``; a term
without a blade is the scalar part::

    1.5*e12 - 2*e3 + 0.5

Indices are 1-based. When every index is a single digit they are simply
concatenated (``e123``); otherwise they are separated by underscores
(``e2_11``). Coefficients are printed with ``repr(float)``, so printing and
re-parsing reproduces every coefficient bit for bit.
"""

from __future__ import annotations

import re

import numpy as np

from .algebra import Algebra, Multivector, _mask_from_indices, blade_label
from .errors import MultivectorSyntaxError

_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf|nan"
_TOKEN = re.compile(
    rf"\s*(?:(?P<num>{_NUMBER})|(?P<blade>e\d+(?:_\d+)*)|(?P<op>[-+*]))"
)


def _blade_indices(label: str) -> list[int]:
    body = label[1:]
    if "_" in body:
        return [int(part) for part in body.split("_")]
    return [int(ch) for ch in body]


def _tokenize(text: str):
    pos = 0
    tokens = []
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise MultivectorSyntaxError("unexpected character", text, len(text) - len(text[pos:].lstrip()))
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


def parse_multivector(text: str, alg: Algebra) -> Multivector:
    """Parse the textual notation into a multivector of ``alg``."""
    tokens = _tokenize(text)
    if not tokens:
        raise MultivectorSyntaxError("empty multivector text", text, 0)
    coeffs = np.zeros(alg.dim)
    i = 0
    sign = 1.0
    expect_term = True
    while i < len(tokens):
        kind, value, pos = tokens[i]
        if expect_term:
            if kind == "op" and value in "+-":
                if value == "-":
                    sign = -sign
                i += 1
                continue
            coef = 1.0
            if kind == "num":
                coef = float(value)
                i += 1
                if i < len(tokens) and tokens[i][1] == "*":
                    if i + 1 >= len(tokens) or tokens[i + 1][0] != "blade":
                        raise MultivectorSyntaxError("expected blade after '*'", text, tokens[i][2])
                    kind, value, pos = tokens[i + 1]
                    i += 1
                else:
                    coeffs[0] += sign * coef
                    sign, expect_term = 1.0, False
                    continue
            if kind != "blade":
                raise MultivectorSyntaxError("expected a term", text, pos)
            try:
                mask, bsign = _mask_from_indices(_blade_indices(value), alg.n)
            except ValueError as exc:
                raise MultivectorSyntaxError(str(exc), text, pos) from None
            coeffs[mask] += sign * bsign * coef
            i += 1
            sign, expect_term = 1.0, False
        else:
            if kind != "op" or value not in "+-":
                raise MultivectorSyntaxError("expected '+' or '-'", text, pos)
            expect_term = True
    if expect_term:
        raise MultivectorSyntaxError("dangling operator", text, len(text))
    return Multivector(alg, coeffs)


def _blade_order(alg: Algebra) -> list[int]:
    return sorted(range(alg.dim), key=lambda m: (bin(m).count("1"), [i for i in range(alg.n) if m >> i & 1]))


def format_multivector(mv: Multivector) -> str:
    """Render a single multivector; scalar first, then blades by grade."""
    if mv.shape:
        raise ValueError("format_multivector takes a single multivector")
    parts = []
    for mask in _blade_order(mv.alg):
        c = float(mv.coeffs[mask])
        if c == 0.0:
            continue
        label = blade_label(mask)
        body = repr(abs(c)) + ("*" + label if label else "")
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts) if parts else "0"
