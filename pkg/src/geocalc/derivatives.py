"""Vector derivatives: two-sided on patches, flat on R^n, and the identity suite."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import Algebra, Multivector
from .fields import (
    FieldFn,
    as_field,
    identity_field,
    log_norm_field,
    norm_power_field,
    radial_field,
)
from .patches import PatchMap, tangent_frame

DEFAULT_SEED = 0xC11FF0D

#: formulas 4-7 are singular at the origin; closer points are rejected
ORIGIN_EPS = 1e-8


@dataclass(frozen=True)
class TwoSidedDerivativeResult:
    """``g d f`` at the requested point(s) and its per-axis contributions."""

    value: Multivector
    per_axis_terms: Multivector


def _directional(field: FieldFn, x, v, fd):
    return field.directional(x, v, fd=fd)


def two_sided_derivative(g, f, patch: PatchMap, s, fd: bool = False) -> TwoSidedDerivativeResult:
    """Two-sided vector derivative ``g(x) d f(x)`` at parameter point(s) ``s``.

    Computes ``sum_i d/ds^i (g' x^i f')`` where only the primed factors are
    differentiated: each reciprocal vector ``x^i`` is frozen at its value at
    ``s`` and only ``g`` and ``f`` vary along the i-th coordinate curve.
    Expanded, the i-th term is ``(d_i g) x^i f + g x^i (d_i f)`` with
    ``d_i = x_i . grad``. ``g`` and ``f`` may be FieldFn objects, constants
    or ``None`` (meaning 1).
    """
    alg = patch.algebra
    g = as_field(g, alg)
    f = as_field(f, alg)
    s = np.asarray(s, dtype=float)
    frame = tangent_frame(patch, s, fd=fd)
    x = frame.point
    T = frame.tangents.vector_coords()
    gv = Multivector(alg, g.values(x))
    fv = Multivector(alg, f.values(x))
    terms = []
    for i in range(patch.k):
        r = frame.reciprocal(i)
        term = alg.zero(s.shape[:-1])
        if g.constant is None:
            term = term + Multivector(alg, _directional(g, x, T[..., i, :], fd)) * r * fv
        if f.constant is None:
            term = term + gv * r * Multivector(alg, _directional(f, x, T[..., i, :], fd))
        terms.append(term.coeffs)
    per_axis = Multivector(alg, np.stack(terms, axis=-2))
    return TwoSidedDerivativeResult(per_axis.sum(axis=-1), per_axis)


def flat_vector_derivative(f, x, fd: bool = False) -> Multivector:
    """``sum_i e_i df/dx^i`` at point(s) ``x`` (basis vectors act from the left)."""
    x = np.asarray(x, dtype=float)
    alg = f.alg
    partials = Multivector(alg, f.partial_derivatives(x, fd=fd))
    return (alg.basis_vectors() * partials).sum(axis=-1)


def curl_wedge(f: FieldFn, x, fd: bool = False) -> Multivector:
    """``d ^ f`` of a vector field (grade-2 part of the flat derivative)."""
    return flat_vector_derivative(f, x, fd).grade(2)


# ---------------------------------------------------------------------
# identity suite


def sample_points(n: int, count: int, rng: np.random.Generator, box=2.0, hole=0.1) -> np.ndarray:
    """Uniform points in ``[-box, box]^n`` outside the ball of radius ``hole``."""
    out = np.empty((0, n))
    while len(out) < count:
        pts = rng.uniform(-box, box, size=(2 * count, n))
        pts = pts[np.linalg.norm(pts, axis=-1) >= max(hole, ORIGIN_EPS)]
        out = np.concatenate([out, pts])
    return out[:count]


@dataclass
class FormulaResult:
    formula_id: str
    description: str
    trials: int
    max_rel_err: float
    mean_rel_err: float


@dataclass
class IdentityReport:
    """Relative errors of the vector-derivative formulas at random points."""

    n: int
    method: str
    seed: int
    results: list = field(default_factory=list)

    def max_error(self) -> float:
        return max(r.max_rel_err for r in self.results)

    def passed(self, tol: float) -> bool:
        return all(r.max_rel_err <= tol for r in self.results)

    def by_id(self, formula_id: str) -> FormulaResult:
        for r in self.results:
            if r.formula_id == formula_id:
                return r
        raise KeyError(formula_id)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["formula_id", "trials", "max_rel_err", "mean_rel_err"])
        for r in self.results:
            w.writerow([r.formula_id, r.trials, repr(r.max_rel_err), repr(r.mean_rel_err)])
        return buf.getvalue()


def _rel_err(computed: Multivector, expected: Multivector, scale) -> np.ndarray:
    diff = (computed - expected).norm()
    return diff / np.maximum(expected.norm(), scale)


def identity_suite(
    n: int,
    trials: int = 1000,
    seed: int = DEFAULT_SEED,
    method: str = "fd",
    powers=(-2, -1, 0, 1, 2, 3, 4),
) -> IdentityReport:
    """Check the vector-derivative formulas 1-7 at random nonzero points.

    ``method='fd'`` differentiates numerically, ``'analytic'`` uses the
    closed-form partials shipped with the test fields. The relative error
    of each check divides by ``max(|expected|, max_j |df/dx^j|)`` so that
    identities whose right side vanishes (``d ^ x = 0``, formula 6 with
    ``k = n``) are measured against the size of the derivatives involved.
    Formula 6 is evaluated for every power in ``powers`` and for ``k = n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if method not in ("fd", "analytic"):
        raise ValueError("method must be 'fd' or 'analytic'")
    fd = method == "fd"
    alg = Algebra(n)
    rng = np.random.default_rng(seed)
    x = sample_points(n, trials, rng)
    a = rng.standard_normal((trials, n))
    X = alg.vector(x)
    r = np.linalg.norm(x, axis=-1)
    report = IdentityReport(n, method, seed)

    def scale_of(f):
        return np.max(np.linalg.norm(f.partial_derivatives(x, fd=fd), axis=-1), axis=-1)

    def record(fid, desc, errs):
        errs = np.asarray(errs)
        report.results.append(FormulaResult(fid, desc, trials, float(errs.max()), float(errs.mean())))

    ident = identity_field(alg)
    dx = flat_vector_derivative(ident, x, fd)
    sc = scale_of(ident)
    e1 = np.maximum(
        _rel_err(dx.grade(0), alg.scalar(np.full(trials, float(n))), sc),
        _rel_err(dx.grade(2), alg.zero((trials,)), sc),
    )
    record("1", "d.x = n, d^x = 0", e1)

    # a . d x: directional derivative along a; d x . a: derivative then dot
    A = alg.vector(a)
    lhs = Multivector(alg, ident.directional(x, a, fd=fd))
    partials = Multivector(alg, ident.partial_derivatives(x, fd=fd))
    rhs = (alg.basis_vectors() * (partials | A[:, None])).sum(axis=-1)
    asc = np.linalg.norm(a, axis=-1)
    record("2", "a.d x = a = d x.a", np.maximum(_rel_err(lhs, A, asc), _rel_err(rhs, A, asc)))

    f3 = norm_power_field(alg, 2)
    record("3", "d x^2 = 2x", _rel_err(flat_vector_derivative(f3, x, fd), X * 2.0, scale_of(f3)))

    f4 = norm_power_field(alg, 1)
    record("4", "d|x| = x/|x|", _rel_err(flat_vector_derivative(f4, x, fd), X / r, scale_of(f4)))

    errs5 = []
    for k in powers:
        fk = norm_power_field(alg, k)
        exp5 = X * (k * r ** (k - 2.0))
        errs5.append(_rel_err(flat_vector_derivative(fk, x, fd), exp5, np.maximum(scale_of(fk), 1e-300)))
    record("5", "d|x|^k = k|x|^(k-2) x", np.max(errs5, axis=0))

    errs6 = []
    for k in sorted(set(powers) | {n}):
        fk = radial_field(alg, k)
        exp6 = alg.scalar((n - k) / r**k)
        errs6.append(_rel_err(flat_vector_derivative(fk, x, fd), exp6, scale_of(fk)))
    record("6", "d (x/|x|^k) = (n-k)/|x|^k", np.max(errs6, axis=0))

    f7 = log_norm_field(alg)
    record("7", "d log|x| = x^-1", _rel_err(flat_vector_derivative(f7, x, fd), X / r**2, scale_of(f7)))
    return report


def cauchy_kernel_derivative_norm(n: int, points, source=None, fd: bool = True) -> np.ndarray:
    """``|d K|`` for the Cauchy kernel (formula 6 with k = n) at ``points``."""
    alg = Algebra(n)
    k = radial_field(alg, n, center=source)
    return flat_vector_derivative(k, points, fd).norm()
