"""Directed integrals over patches and their boundaries; the fundamental theorem check.

All integrals are evaluated with the tensor-product rules of
:mod:`geocalc.quadrature`. Integrands keep the order ``g * measure * f`` at
every node; nothing is commuted.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import Algebra, Multivector
from .errors import IntegrandError
from .fields import FieldFn, as_field
from .patches import (
    REGULARITY_EPS,
    PatchComplex,
    PatchMap,
    as_complex,
    boundary_chain,
    check_regular,
    face_measure,
    frame_from_tangents,
    wedge_all,
)
from .quadrature import QuadratureSpec, integrate_nodes, tree_sum

DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class IntegralResult:
    value: Multivector
    node_count: int
    est_error: Optional[float] = None


def _finite(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise IntegrandError(f"non-finite values in {what}")
    return values


def _interior_kernel(patch: PatchMap, g: FieldFn, f: FieldFn, fd: bool):
    alg = patch.algebra

    def kernel(s):
        T = patch.tangents(s, fd=fd)
        X = wedge_all(alg.vector(T))
        check_regular(T, X, patch.name)
        x = patch(s)
        val = X
        if g.constant is None or not np.all(g.constant.coeffs == _ONE[alg.n]):
            val = Multivector(alg, g.values(x)) * val
        if f.constant is None or not np.all(f.constant.coeffs == _ONE[alg.n]):
            val = val * Multivector(alg, f.values(x))
        return _finite(val.coeffs, f"directed integrand on {patch.name!r}")

    return kernel


class _Ones(dict):
    def __missing__(self, n):
        c = np.zeros(1 << n)
        c[0] = 1.0
        self[n] = c
        return c


_ONE = _Ones()


def _patch_integral(patch, kernel, quad, threads):
    nodes, weights = quad.nodes(patch.domain)
    return integrate_nodes(kernel, nodes, weights, threads), len(weights)


def directed_integral(g, patch, f, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1,
                      estimate_error: bool = False, fd: bool = False) -> IntegralResult:
    """``int_M g dx_(k) f``, i.e. ``int_R g(x(s)) x_(k)(s) f(x(s)) ds``.

    ``patch`` may be a single :class:`PatchMap` or a :class:`PatchComplex`
    (orientation-weighted sum). With ``estimate_error`` the integral is
    repeated with twice the subdivisions and the difference is reported as
    ``est_error``.
    """
    cx = as_complex(patch)
    alg = cx.algebra
    g = as_field(g, alg)
    f = as_field(f, alg)

    def run(q):
        parts, count = [], 0
        for p, sign in cx:
            v, c = _patch_integral(p, _interior_kernel(p, g, f, fd), q, threads)
            parts.append(sign * v)
            count += c
        return tree_sum(parts), count

    value, count = run(quad)
    est = None
    if estimate_error:
        fine, _ = run(quad.refined(2))
        est = float(np.max(np.abs(fine - value)))
    return IntegralResult(Multivector(alg, value), count, est)


def directed_content(patch, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1, **kw) -> IntegralResult:
    """``D(M) = int_M dx_(k)``."""
    return directed_integral(None, patch, None, quad, threads, **kw)


def _face_kernel(patch: PatchMap, face, g: FieldFn, f: FieldFn, fd: bool):
    alg = patch.algebra

    def kernel(t):
        s = face.lift(t)
        x = patch(s)
        T = patch.tangents(s, fd=fd)
        val = face_measure(patch, face, T)
        if g.constant is None or not np.all(g.constant.coeffs == _ONE[alg.n]):
            val = Multivector(alg, g.values(x)) * val
        if f.constant is None or not np.all(f.constant.coeffs == _ONE[alg.n]):
            val = val * Multivector(alg, f.values(x))
        return _finite(val.coeffs, f"boundary integrand on {patch.name!r} face {face}")

    return kernel


def face_integrals(g, patch: PatchMap, f, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1, fd: bool = False):
    """Per-face values of ``int g dx_(k-1) f`` in boundary-chain order."""
    alg = patch.algebra
    g = as_field(g, alg)
    f = as_field(f, alg)
    out = []
    for face in boundary_chain(patch.domain):
        nodes, weights = quad.nodes(face.rectangle)
        out.append((face, integrate_nodes(_face_kernel(patch, face, g, f, fd), nodes, weights, threads), len(weights)))
    return out


def boundary_integral(g, patch, f, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1, fd: bool = False) -> IntegralResult:
    """``int_{beta(M)} g dx_(k-1) f`` summed over the 2k oriented faces.

    Face measures are ``sign * x_(k) x^i``, computed in the inverse-free
    form of :func:`geocalc.patches.face_measure` so that collapsed faces
    (e.g. the centre of a polar disk) simply contribute zero. For k = 1 the
    faces are the two endpoints and the result is exactly
    ``g(b) f(b) - g(a) f(a)``.
    """
    cx = as_complex(patch)
    alg = cx.algebra
    parts, count = [], 0
    for p, sign in cx:
        faces = face_integrals(g, p, f, quad, threads, fd)
        parts.append(sign * tree_sum([v for _, v, _ in faces]))
        count += sum(c for _, _, c in faces)
    return IntegralResult(Multivector(alg, tree_sum(parts)), count)


# ---------------------------------------------------------------------
# fundamental theorem


def _ftc_kernel(patch: PatchMap, g: FieldFn, f: FieldFn, fd: bool):
    alg = patch.algebra

    def kernel(s):
        T = patch.tangents(s, fd=fd)
        x = patch(s)
        frame = frame_from_tangents(alg, x, T, patch.name)
        X = frame.kvector
        gv = Multivector(alg, g.values(x))
        fv = Multivector(alg, f.values(x))
        acc = np.zeros(s.shape[:-1] + (alg.dim,))
        for i in range(patch.k):
            Xr = X * frame.reciprocal(i)
            if g.constant is None:
                acc += (Multivector(alg, g.directional(x, T[..., i, :], fd=fd)) * Xr * fv).coeffs
            if f.constant is None:
                acc += (gv * Xr * Multivector(alg, f.directional(x, T[..., i, :], fd=fd))).coeffs
        return _finite(acc, f"derivative integrand on {patch.name!r}")

    return kernel


def derivative_integral(g, patch, f, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1, fd: bool = False) -> IntegralResult:
    """``int_M g dx_(k) d f`` with the two-sided derivative.

    The integrand at each node is ``sum_i d/ds^i (g' x_(k) x^i f')``: the
    frame product ``x_(k) x^i`` is held fixed and only ``g`` and ``f`` are
    differentiated along the coordinate curves.
    """
    cx = as_complex(patch)
    alg = cx.algebra
    g = as_field(g, alg)
    f = as_field(f, alg)
    parts, count = [], 0
    for p, sign in cx:
        v, c = _patch_integral(p, _ftc_kernel(p, g, f, fd), quad, threads)
        parts.append(sign * v)
        count += c
    return IntegralResult(Multivector(alg, tree_sum(parts)), count)


def residual_norms(lhs: Multivector, rhs: Multivector):
    """Absolute (max-coefficient) and relative residuals."""
    diff = float(np.max(np.abs(lhs.coeffs - rhs.coeffs)))
    return diff, diff / max(1.0, float(np.max(np.abs(rhs.coeffs))))


@dataclass(frozen=True)
class ConvergenceRow:
    scenario: str
    k: int
    n: int
    q: int
    m: int
    lhs_norm: float
    rhs_norm: float
    abs_residual: float
    rel_residual: float
    nodes: int
    wall_ms: float


CONVERGENCE_HEADER = ["scenario", "k", "n", "q", "m", "lhs_norm", "rhs_norm", "abs_residual",
                      "rel_residual", "nodes", "wall_ms"]

#: relative residuals below this are at the roundoff floor and no longer
#: expected to shrink under refinement
ROUNDOFF_FLOOR = 1e-11


@dataclass
class FTCReport:
    """Both sides of the fundamental theorem over a refinement sequence.

    ``lhs``, ``rhs`` and the residuals refer to the first (coarsest) level;
    ``table`` holds one :class:`ConvergenceRow` per level.
    """

    lhs: Multivector
    rhs: Multivector
    abs_residual: float
    rel_residual: float
    table: list = field(default_factory=list)
    levels: list = field(default_factory=list)

    def converged(self, factor: float = 3.0, floor: float = ROUNDOFF_FLOOR) -> bool:
        """Each refinement shrinks the residual by ``factor`` unless already at ``floor``."""
        rel = [r.rel_residual for r in self.table]
        return all(b <= a / factor or max(a, b) <= floor for a, b in zip(rel, rel[1:]))

    def final(self) -> ConvergenceRow:
        return self.table[-1]

    def to_csv(self, header: bool = True) -> str:
        return rows_to_csv(self.table, CONVERGENCE_HEADER if header else None)


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def rows_to_csv(rows, header=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for r in rows:
        w.writerow([_fmt(getattr(r, h)) for h in (header or CONVERGENCE_HEADER)])
    return buf.getvalue()


def ftc_check(g, f, patch, quad: QuadratureSpec = DEFAULT_QUAD, levels: int = 3, scenario: str = "ftc",
              threads: int = 1, fd: bool = False, timing: bool = True) -> FTCReport:
    """Compare ``int_M g dx_(k) d f`` with ``int_{beta(M)} g dx_(k-1) f``.

    Runs ``levels`` quadratures with m, 2m, 4m, ... subdivisions and
    records one convergence row per level.
    """
    cx = as_complex(patch)
    rows, pairs = [], []
    q = quad
    for _ in range(levels):
        t0 = time.perf_counter()
        lhs = derivative_integral(g, cx, f, q, threads, fd)
        rhs = boundary_integral(g, cx, f, q, threads, fd)
        wall = (time.perf_counter() - t0) * 1e3 if timing else 0.0
        a, r = residual_norms(lhs.value, rhs.value)
        rows.append(ConvergenceRow(scenario, cx.k, cx.n, q.q, q.m, float(lhs.value.norm()), float(rhs.value.norm()),
                                   a, r, lhs.node_count + rhs.node_count, wall))
        pairs.append((lhs.value, rhs.value))
        q = q.refined(2)
    lhs0, rhs0 = pairs[0]
    return FTCReport(lhs0, rhs0, rows[0].abs_residual, rows[0].rel_residual, rows, pairs)


# ---------------------------------------------------------------------
# corollary D(beta(M)) = 0 and orientation diagnostics


def _face_signature(patch: PatchMap, face, ndigits: int = 8):
    """Rounded images of the face's corners and centre, order-free."""
    rect = face.rectangle
    if rect is None:
        pts = np.zeros((1, 0))
    else:
        corners = np.array(np.meshgrid(*[list(b) for b in rect.bounds], indexing="ij")).reshape(rect.k, -1).T
        pts = np.vstack([corners, (rect.lower + rect.upper)[None] / 2])
    img = np.round(patch(face.lift(pts)), ndigits) + 0.0
    return tuple(sorted(map(tuple, img)))


@dataclass
class CorollaryReport:
    """``D(beta(M))`` of a patch or complex.

    ``content`` is the directed content of the boundary chain that remains
    after faces shared by two patches are removed. For a consistently
    oriented complex the shared faces cancel and this vanishes like the
    single-patch corollary; a flipped patch leaves twice the shared face.
    """

    content: Multivector
    face_total: Multivector
    shared_faces: int
    tolerance: float

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.content.coeffs)))

    @property
    def ok(self) -> bool:
        return self.norm <= self.tolerance


def corollary_check(patch, quad: QuadratureSpec = DEFAULT_QUAD, tol: float = 1e-8, threads: int = 1,
                    fd: bool = False) -> CorollaryReport:
    cx = as_complex(patch)
    alg = cx.algebra
    entries = []
    for p, sign in cx:
        for face, v, _ in face_integrals(None, p, None, quad, threads, fd):
            entries.append((sign * v, _face_signature(p, face) if len(cx) > 1 else None))
    total = tree_sum([v for v, _ in entries])
    if len(cx) > 1:
        keys = [k for _, k in entries]
        counts = {}
        for key in keys:
            counts[key] = counts.get(key, 0) + 1
        shared = [i for i, key in enumerate(keys) if counts[key] > 1]
        outer = [entries[i][0] for i in range(len(entries)) if i not in set(shared)]
        content = tree_sum(outer) if outer else np.zeros(alg.dim)
    else:
        shared = []
        content = total
    return CorollaryReport(Multivector(alg, content), Multivector(alg, total), len(shared) // 2, tol)
