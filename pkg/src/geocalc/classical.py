"""Classical integral theorems as grade parts of the fundamental theorem.

Each check computes the two sides of the classical statement along its own
code path (flat derivatives from the field's partials, explicit normals and
line elements) and, separately, extracts the same quantities from the
blade coefficients of :func:`geocalc.integrate.ftc_check`. The report
carries both so the specializations can be cross-validated.

Orientation conventions:

* The fundamental theorem induces on the boundary of a k-patch the measure
  ``x_(k) x^i`` on the outward face. For a planar region this traverses
  the boundary clockwise; for a surface in R^3 it runs opposite to the
  right-hand rule about ``n = I^{-1} x_(2)/|x_(2)|``.
* Cross product: ``a x b = -I (a ^ b)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import Multivector
from .derivatives import flat_vector_derivative
from .errors import EndpointMismatchError, GradeError
from .fields import FieldFn, as_field
from .integrate import DEFAULT_QUAD, derivative_integral, ftc_check
from .patches import PatchMap, boundary_chain, check_regular, face_measure, wedge_all
from .quadrature import QuadratureSpec, integrate_nodes, tree_sum

CSV_HEADER = ["theorem", "scenario", "lhs", "rhs", "residual", "nodes"]


@dataclass
class TheoremReport:
    """Result of one classical check.

    ``lhs``/``rhs`` are the classical sides computed independently,
    ``ftc_lhs``/``ftc_rhs`` the same quantities read off the general
    theorem, ``oracle`` an optional exact value supplied by the caller.
    """

    theorem: str
    scenario: str
    lhs: float
    rhs: float
    nodes: int
    ftc_lhs: Optional[float] = None
    ftc_rhs: Optional[float] = None
    oracle: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def consistency(self) -> float:
        """Largest gap between the classical sides and their extractions."""
        if self.ftc_lhs is None:
            return 0.0
        return max(abs(self.lhs - self.ftc_lhs), abs(self.rhs - self.ftc_rhs))

    def oracle_error(self) -> float:
        if self.oracle is None:
            raise ValueError("no oracle value attached")
        return max(abs(self.lhs - self.oracle), abs(self.rhs - self.oracle))

    def csv_row(self):
        return [self.theorem, self.scenario, repr(float(self.lhs)), repr(float(self.rhs)),
                repr(float(self.residual)), str(self.nodes)]

    def summary(self) -> str:
        s = f"{self.theorem} [{self.scenario}]: lhs={self.lhs:.12g} rhs={self.rhs:.12g} residual={self.residual:.3e}"
        if self.oracle is not None:
            s += f" oracle={self.oracle:.12g}"
        return s


def reports_to_csv(reports, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def _require_vector_field(f: FieldFn, x):
    vals = f.values(x)
    nonvec = np.delete(vals, 1 << np.arange(f.alg.n), axis=-1)
    if np.any(np.abs(nonvec) > 1e-12 * max(1.0, np.abs(vals).max())):
        raise GradeError(f"field {f.name!r} is not vector valued")


def _interior(patch: PatchMap, quad, kernel, threads):
    nodes, w = quad.nodes(patch.domain)
    return integrate_nodes(kernel, nodes, w, threads), len(w)


def _faces(patch: PatchMap, quad, kernel_for_face, threads):
    total, count = [], 0
    for face in boundary_chain(patch.domain):
        nodes, w = quad.nodes(face.rectangle)
        total.append(integrate_nodes(kernel_for_face(face), nodes, w, threads))
        count += len(w)
    return tree_sum(total), count


def _face_tangent_measure(patch: PatchMap, face, T):
    """Induced boundary line element of a 2-patch face, as coordinates."""
    return face_measure(patch, face, T).vector_coords()


# ---------------------------------------------------------------------


def path_independence_check(g, f, curves, quad: QuadratureSpec = DEFAULT_QUAD, scenario="path",
                            endpoint_tol: float = 1e-10, threads: int = 1):
    """``int_C g dx . d f = g(b) f(b) - g(a) f(a)`` on curves sharing endpoints.

    Returns one :class:`TheoremReport` per curve whose sides are the
    coefficient norms of the quadrature integral and of the endpoint
    formula, and whose ``extra['spread']`` is the largest difference between
    the curves' integrals.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("need at least one curve")
    alg = curves[0].algebra
    for c in curves:
        if c.k != 1:
            raise ValueError("path independence needs 1-patches")
    ends = [(c(c.domain.lower), c(c.domain.upper)) for c in curves]
    a0, b0 = ends[0]
    for a, b in ends[1:]:
        if np.max(np.abs(a - a0)) > endpoint_tol or np.max(np.abs(b - b0)) > endpoint_tol:
            raise EndpointMismatchError("curves do not share endpoints")
    g = as_field(g, alg)
    f = as_field(f, alg)
    endpoint = (Multivector(alg, g.values(b0)) * Multivector(alg, f.values(b0))
                - Multivector(alg, g.values(a0)) * Multivector(alg, f.values(a0)))
    values, reports = [], []
    for c in curves:
        res = derivative_integral(g, c, f, quad, threads)
        values.append(res.value)
        diff = float(np.max(np.abs(res.value.coeffs - endpoint.coeffs)))
        rep = TheoremReport("path", f"{scenario}:{c.name}", float(res.value.norm()), float(endpoint.norm()),
                            res.node_count, extra={"value": res.value, "endpoint": endpoint, "max_diff": diff})
        reports.append(rep)
    spread = max(float(np.max(np.abs(v.coeffs - values[0].coeffs))) for v in values)
    for r in reports:
        r.extra["spread"] = spread
    return reports


# ---------------------------------------------------------------------


@dataclass
class GreenReport:
    """Both grade forms of Green's theorem plus the classical scalar form."""

    wedge_form: TheoremReport
    dot_form_lhs: Multivector
    dot_form_rhs: Multivector
    classical: TheoremReport
    ftc_consistency: float

    @property
    def dot_residual(self) -> float:
        return float(np.max(np.abs(self.dot_form_lhs.coeffs - self.dot_form_rhs.coeffs)))

    def reports(self):
        dot = TheoremReport("green_dot", self.wedge_form.scenario, float(self.dot_form_lhs.coefficient(1, 2)),
                            float(self.dot_form_rhs.coefficient(1, 2)), self.wedge_form.nodes)
        return [self.wedge_form, dot, self.classical]


def greens_theorem_check(f: FieldFn, patch: PatchMap, quad: QuadratureSpec = DEFAULT_QUAD, scenario="green",
                         oracle: Optional[float] = None, threads: int = 1) -> GreenReport:
    """Green's theorem on a planar 2-patch for a vector field ``f = (P, Q)``.

    Checks ``int dx_(2) d^f = oint dx . f`` (scalars) and
    ``int dx_(2) d.f = oint dx ^ f`` (bivectors), and the classical form
    ``iint (dQ/dx - dP/dy) dA = oint P dx + Q dy`` with the usual
    counter-clockwise boundary. ``oracle`` may hold the exact value of the
    classical double integral.
    """
    if patch.n != 2 or patch.k != 2:
        raise ValueError("Green's theorem needs a 2-patch in R^2")
    alg = patch.algebra
    e12 = alg.blade(1, 2)

    def interior(s):
        T = patch.tangents(s)
        X = wedge_all(alg.vector(T))
        check_regular(T, X, patch.name)
        x = patch(s)
        _require_vector_field(f, x)
        df = flat_vector_derivative(f, x)
        wedge_part = (X * df.grade(2)).grade(0)
        dot_part = X * df.grade(0)
        # classical: (dQ/dx - dP/dy) * signed area element
        J = f.partial_derivatives(x)
        curl = J[..., 0, 2] - J[..., 1, 1]
        det = T[..., 0, 0] * T[..., 1, 1] - T[..., 0, 1] * T[..., 1, 0]
        out = np.zeros(s.shape[:-1] + (alg.dim + 1,))
        out[..., : alg.dim] = wedge_part.coeffs + dot_part.coeffs
        out[..., alg.dim] = curl * det
        return out

    def face_kernel(face):
        def kernel(t):
            s = face.lift(t)
            T = patch.tangents(s)
            x = patch(s)
            dx = face_measure(patch, face, T)
            fv = Multivector(alg, f.values(x))
            out = np.zeros(t.shape[:-1] + (alg.dim + 1,))
            out[..., : alg.dim] = ((dx | fv) + (dx ^ fv)).coeffs
            # counter-clockwise is minus the induced orientation
            out[..., alg.dim] = -np.sum(fv.vector_coords() * dx.vector_coords(), axis=-1)
            return out

        return kernel

    inside, n_in = _interior(patch, quad, interior, threads)
    bdry, n_b = _faces(patch, quad, face_kernel, threads)
    lhs_mv = Multivector(alg, inside[: alg.dim])
    rhs_mv = Multivector(alg, bdry[: alg.dim])
    ftc = ftc_check(None, f, patch, quad, levels=1, threads=threads)
    wedge = TheoremReport("green_wedge", scenario, float(lhs_mv.scalar), float(rhs_mv.scalar), n_in + n_b,
                          float(ftc.lhs.scalar), float(ftc.rhs.scalar))
    classical = TheoremReport("green_classical", scenario, float(inside[alg.dim]), float(bdry[alg.dim]), n_in + n_b,
                              -float(ftc.lhs.scalar), -float(ftc.rhs.scalar), oracle=oracle)
    consistency = max(wedge.consistency, classical.consistency,
                      float(np.max(np.abs(lhs_mv.grade(2).coeffs - ftc.lhs.grade(2).coeffs))),
                      float(np.max(np.abs(rhs_mv.grade(2).coeffs - ftc.rhs.grade(2).coeffs))))
    return GreenReport(wedge, lhs_mv.grade(2), rhs_mv.grade(2), classical, consistency)


# ---------------------------------------------------------------------


def cross_product(a: Multivector, b: Multivector) -> Multivector:
    """``a x b = -I (a ^ b)`` in G_3."""
    if a.alg.n != 3:
        raise ValueError("cross product lives in G_3")
    return -(a.alg.pseudoscalar() * (a ^ b))


def curl(f: FieldFn, x) -> Multivector:
    """``d x f = -I (d ^ f)``."""
    return -(f.alg.pseudoscalar() * flat_vector_derivative(f, x).grade(2))


def unit_normal(kvector: Multivector) -> Multivector:
    """Right-hand-rule normal ``I^{-1} x_(n-1) / |x_(n-1)|`` of a hypersurface element."""
    alg = kvector.alg
    n = (alg.pseudoscalar_inverse() * kvector).grade(1)
    return n / kvector.norm()


def stokes_theorem_check(f: FieldFn, patch: PatchMap, quad: QuadratureSpec = DEFAULT_QUAD, scenario="stokes",
                         oracle: Optional[float] = None, threads: int = 1) -> TheoremReport:
    """``int_S (d x f) . n |dx_(2)| = oint f . dx`` on a 2-patch in R^3.

    ``n`` follows the right-hand rule from ``x_(2)`` and the line integral
    runs the matching way round (opposite to the induced measure).
    """
    if patch.n != 3 or patch.k != 2:
        raise ValueError("Stokes' theorem needs a 2-patch in R^3")
    alg = patch.algebra

    def interior(s):
        T = patch.tangents(s)
        X = wedge_all(alg.vector(T))
        check_regular(T, X, patch.name)
        x = patch(s)
        _require_vector_field(f, x)
        n_dA = (alg.pseudoscalar_inverse() * X).grade(1)
        return (curl(f, x) | n_dA).scalar[..., None]

    def face_kernel(face):
        def kernel(t):
            s = face.lift(t)
            T = patch.tangents(s)
            x = patch(s)
            dx = -_face_tangent_measure(patch, face, T)
            return np.sum(Multivector(alg, f.values(x)).vector_coords() * dx, axis=-1)[..., None]

        return kernel

    lhs, n_in = _interior(patch, quad, interior, threads)
    rhs, n_b = _faces(patch, quad, face_kernel, threads)
    ftc = ftc_check(None, f, patch, quad, levels=1, threads=threads)
    return TheoremReport("stokes", scenario, float(lhs[0]), float(rhs[0]), n_in + n_b,
                         -float(ftc.lhs.scalar), -float(ftc.rhs.scalar), oracle=oracle)


def gauss_divergence_check(f: FieldFn, solid: PatchMap, quad: QuadratureSpec = DEFAULT_QUAD, scenario="gauss",
                           oracle: Optional[float] = None, threads: int = 1) -> TheoremReport:
    """``int d . f |dx_(3)| = oint n . f |dx_(2)|`` on a 3-patch in R^3.

    The outward ``n |dx_(2)|`` is ``I^{-1}`` times the induced face measure,
    which is how the directed identity turns into the scalar flux form.
    """
    if solid.n != 3 or solid.k != 3:
        raise ValueError("the divergence theorem needs a 3-patch in R^3")
    alg = solid.algebra
    Iinv = alg.pseudoscalar_inverse()

    def interior(s):
        T = solid.tangents(s)
        X = wedge_all(alg.vector(T))
        check_regular(T, X, solid.name)
        x = solid(s)
        _require_vector_field(f, x)
        div = flat_vector_derivative(f, x).scalar
        return (div * np.linalg.det(T))[..., None]

    def face_kernel(face):
        def kernel(t):
            s = face.lift(t)
            T = solid.tangents(s)
            x = solid(s)
            n_dA = (Iinv * face_measure(solid, face, T)).grade(1)
            return (n_dA | Multivector(alg, f.values(x))).scalar[..., None]

        return kernel

    lhs, n_in = _interior(solid, quad, interior, threads)
    rhs, n_b = _faces(solid, quad, face_kernel, threads)
    ftc = ftc_check(None, f, solid, quad, levels=1, threads=threads)
    return TheoremReport("gauss", scenario, float(lhs[0]), float(rhs[0]), n_in + n_b,
                         float((Iinv * ftc.lhs).scalar), float((Iinv * ftc.rhs).scalar), oracle=oracle)
