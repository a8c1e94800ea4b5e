"""Tensor-product quadrature on k-rectangles and deterministic reduction."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

RULES = ("gauss_legendre", "midpoint")

#: Nodes per work chunk. Fixed so the reduction order never depends on threads.
CHUNK = 16384


@dataclass(frozen=True)
class QuadratureSpec:
    """``q`` points per subinterval, ``m`` subintervals per axis."""

    rule: str = "gauss_legendre"
    points_per_axis: int = 8
    subdivisions_per_axis: int = 8

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown quadrature rule {self.rule!r}; choose from {RULES}")
        if self.points_per_axis < 1 or self.subdivisions_per_axis < 1:
            raise ValueError("points_per_axis and subdivisions_per_axis must be >= 1")

    @property
    def q(self) -> int:
        return self.points_per_axis

    @property
    def m(self) -> int:
        return self.subdivisions_per_axis

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return replace(self, subdivisions_per_axis=self.m * factor)

    def node_count(self, k: int) -> int:
        return (self.q * self.m) ** k

    def axis_rule(self, lo: float, hi: float):
        x, w = _reference_rule(self.rule, self.q)
        h = (hi - lo) / self.m
        starts = lo + h * np.arange(self.m)
        nodes = (starts[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
        weights = np.tile(0.5 * h * w, self.m)
        return nodes, weights

    def nodes(self, rect):
        """Nodes ``(N, k)`` and weights ``(N,)`` for a KRectangle (or None -> a point)."""
        if rect is None:
            return np.zeros((1, 0)), np.ones(1)
        axes = [self.axis_rule(lo, hi) for lo, hi in rect.bounds]
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
        return pts, w


@lru_cache(maxsize=None)
def _reference_rule(rule: str, q: int):
    if rule == "gauss_legendre":
        x, w = np.polynomial.legendre.leggauss(q)
    else:
        x = -1.0 + (2.0 * np.arange(q) + 1.0) / q
        w = np.full(q, 2.0 / q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def tree_sum(parts):
    """Pairwise sum of a list of arrays in a fixed order."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to sum")
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def integrate_nodes(integrand, nodes, weights, threads: int = 1, chunk: int = CHUNK):
    """``sum_j w_j * integrand(nodes[j])`` with chunked, deterministic reduction.

    ``integrand`` maps an ``(N, k)`` block of nodes to ``(N, d)`` values.
    The node set is cut into fixed-size chunks; each chunk's weighted sum is
    formed with a plain sequential reduction and the chunk sums are combined
    pairwise. Because the partition does not depend on ``threads``, the
    result is bit-identical for any thread count.
    """
    starts = range(0, len(weights), chunk)

    def work(i):
        vals = np.asarray(integrand(nodes[i : i + chunk]), dtype=float)
        return (weights[i : i + chunk, None] * vals).sum(axis=0)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(i) for i in starts]
    return tree_sum(parts)
