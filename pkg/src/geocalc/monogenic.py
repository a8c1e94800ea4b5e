"""Monogenic fields, the Cauchy kernel and interior reconstruction.

Sign convention. With ``n`` the outward unit normal of a closed boundary
``S`` and ``K(x) = (x' - x)/|x' - x|^n``,

    f(x') = -(1/Omega) oint_S K n f |dS|

for monogenic ``f`` (a constant is reproduced as ``+c``). For general C^1
fields the volume term ``(1/Omega) int_M K (d f) |dV|`` is added.
``|dS| n`` is taken as ``I^{-1}`` times the oriented boundary measure, so
boundary complexes must carry the induced (outward) orientation, as
:func:`geocalc.library.circle_boundary` and
:func:`geocalc.library.sphere_boundary` do.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import Algebra, Multivector
from ._fd import FD_SCALE, central_derivative
from .derivatives import flat_vector_derivative
from .errors import DomainError, InteriorMarginError
from .fields import FieldFn, as_field, radial_field
from .integrate import DEFAULT_QUAD, _face_signature
from .patches import PatchMap, as_complex, boundary_chain, check_regular, face_patch, glue_patches, wedge_all
from .quadrature import QuadratureSpec, integrate_nodes, tree_sum

#: certificate thresholds on max |d f|
TAU_FD = 1e-6
TAU_ANALYTIC = 1e-10

#: interior margin, in boundary node spacings
MARGIN_SPACINGS = 5.0
#: exclusion ball of the full formula, in volume cell widths
EXCLUSION_CELLS = 2.0


def omega(n: int) -> float:
    """Area of the unit sphere in R^n, ``2 pi^(n/2) / Gamma(n/2)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class CauchyKernel:
    """``K(y) = (y - source)/|y - source|^n``; monogenic away from ``source``."""

    source: tuple
    dim: int

    @classmethod
    def at(cls, source) -> "CauchyKernel":
        s = tuple(float(v) for v in np.ravel(source))
        return cls(s, len(s))

    def field(self) -> FieldFn:
        f = radial_field(Algebra(self.dim), self.dim, center=np.array(self.source))
        f.name = "cauchy_kernel"
        return f

    def __call__(self, y) -> Multivector:
        return self.field()(y)


# ---------------------------------------------------------------------
# certificate


@dataclass(frozen=True)
class SampleBox:
    """Deterministic grid of ``points_per_axis**n`` points in a box."""

    lower: tuple
    upper: tuple
    points_per_axis: int = 11

    def points(self) -> np.ndarray:
        axes = [np.linspace(a, b, self.points_per_axis) for a, b in zip(self.lower, self.upper)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))


def _region_points(region, n) -> np.ndarray:
    if isinstance(region, SampleBox):
        return region.points()
    if isinstance(region, PatchMap):
        # interior grid of the parameter domain
        q = 11 if region.k <= 2 else 7
        rect = region.domain
        axes = [np.linspace(lo, hi, q + 2)[1:-1] for lo, hi in rect.bounds]
        s = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, rect.k)
        return region(s)
    pts = np.asarray(region, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != n:
        raise ValueError(f"sample points must have shape (count, {n})")
    return pts


@dataclass
class MonogenicityReport:
    field: str
    max_norm: float
    tolerance: float
    method: str
    points: int
    excluded: int

    @property
    def certified(self) -> bool:
        return self.max_norm <= self.tolerance

    def summary(self) -> str:
        verdict = "monogenic" if self.certified else "NOT monogenic"
        return (f"{self.field}: max|df| = {self.max_norm:.3e} over {self.points} points "
                f"({self.method}, tol {self.tolerance:g}) -> {verdict}")


def monogenicity_certificate(f: FieldFn, region, fd: Optional[bool] = None, tolerance: Optional[float] = None,
                             exclusion: float = 0.2) -> MonogenicityReport:
    """Largest ``|d f|`` over a deterministic sample of ``region``.

    ``region`` is a :class:`SampleBox`, a patch (sampled on an interior
    parameter grid) or an explicit ``(count, n)`` array. Points closer than
    ``exclusion`` to ``f.singularity`` are dropped. FD is used when the
    field has no analytic derivative or ``fd=True``; the tolerance then
    defaults to ``1e-6``, otherwise ``1e-10``.
    """
    n = f.alg.n
    pts = _region_points(region, n)
    excluded = 0
    if f.singularity is not None:
        keep = np.linalg.norm(pts - f.singularity, axis=-1) >= exclusion
        excluded = int(np.count_nonzero(~keep))
        pts = pts[keep]
    if len(pts) == 0:
        raise DomainError("no sample points left after excluding the singularity")
    use_fd = (not f.has_analytic_derivative) if fd is None else bool(fd)
    if tolerance is None:
        tolerance = TAU_FD if use_fd else TAU_ANALYTIC
    norms = flat_vector_derivative(f, pts, fd=use_fd).norm()
    return MonogenicityReport(f.name, float(norms.max()), tolerance, "fd" if use_fd else "analytic",
                              len(pts), excluded)


# ---------------------------------------------------------------------
# boundary reconstruction


def _node_spacing(patch: PatchMap, quad: QuadratureSpec) -> float:
    """Rough largest physical distance between neighbouring quadrature nodes."""
    nodes, _ = quad.nodes(patch.domain)
    speeds = np.linalg.norm(patch.tangents(nodes), axis=-1).max(axis=0)
    widths = np.asarray(patch.domain.widths) / (quad.m * quad.q)
    return float(np.max(speeds * widths))


def _check_margin(cx, xp, quad, margin):
    dist = math.inf
    spacing = 0.0
    for patch, _ in zip(cx.patches, cx.orientations):
        nodes, _ = quad.nodes(patch.domain)
        dist = min(dist, float(np.linalg.norm(patch(nodes) - xp, axis=-1).min()))
        spacing = max(spacing, _node_spacing(patch, quad))
    delta = MARGIN_SPACINGS * spacing if margin is None else float(margin)
    if dist < delta:
        raise InteriorMarginError(f"point {tuple(xp)} lies {dist:.3g} from the boundary nodes; needs >= {delta:.3g}")
    return dist, delta


def _boundary_term(f: FieldFn, cx, xp, quad, threads):
    alg = f.alg
    Iinv = alg.pseudoscalar_inverse()
    kern = CauchyKernel.at(xp).field()
    parts, count = [], 0
    for patch, o in zip(cx.patches, cx.orientations):
        def integrand(s, patch=patch, o=o):
            T = patch.tangents(s)
            X = wedge_all(alg.vector(T)) * float(o)
            x = patch(s)
            # kernel in the boundary variable: (x' - x)/|x' - x|^n = -K_x(x')
            g = -Multivector(alg, kern.values(x))
            return (g * (Iinv * X).grade(1) * Multivector(alg, f.values(x))).coeffs

        nodes, w = quad.nodes(patch.domain)
        parts.append(integrate_nodes(integrand, nodes, w, threads))
        count += len(w)
    return Multivector(alg, -tree_sum(parts) / omega(alg.n)), count


def cauchy_reconstruct(f, boundary, x_prime, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1,
                       margin: Optional[float] = None) -> Multivector:
    """Value of a monogenic ``f`` at ``x_prime`` from its boundary values.

    ``boundary`` is a closed, outward oriented (n-1)-complex. Whether it
    actually encloses ``x_prime`` is not checked. Raises
    :class:`InteriorMarginError` when ``x_prime`` is closer to the boundary
    nodes than ``margin`` (default five node spacings).
    """
    return reconstruction_report(f, boundary, x_prime, quad, threads, margin).reconstructed


@dataclass
class ReconstructionResult:
    """Reconstructed value with bookkeeping for the CSV report."""

    n: int
    scenario: str
    point: tuple
    reconstructed: Multivector
    direct: Optional[Multivector]
    nodes: int
    excluded_radius: float = 0.0
    boundary_term: Optional[Multivector] = None
    volume_term: Optional[Multivector] = None
    error_bound: float = 0.0

    @property
    def value(self) -> Multivector:
        return self.reconstructed

    @property
    def abs_err(self) -> float:
        if self.direct is None:
            return math.nan
        return float(np.max(np.abs(self.reconstructed.coeffs - self.direct.coeffs)))

    def csv_row(self):
        from .notation import format_multivector

        direct = "" if self.direct is None else format_multivector(self.direct)
        return [str(self.n), self.scenario, " ".join(repr(float(v)) for v in self.point), direct,
                format_multivector(self.reconstructed), repr(self.abs_err), str(self.nodes),
                repr(float(self.excluded_radius))]


RECONSTRUCTION_HEADER = ["n", "scenario", "x_prime", "direct_value", "reconstructed_value", "abs_err", "nodes",
                         "excluded_radius"]


def reconstruction_csv(results, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(RECONSTRUCTION_HEADER)
    for r in results:
        w.writerow(r.csv_row())
    return buf.getvalue()


def _point(x_prime, n):
    xp = np.asarray(x_prime, dtype=float).reshape(-1)
    if xp.shape != (n,):
        raise ValueError(f"x' must have {n} coordinates")
    return xp


def reconstruction_report(f, boundary, x_prime, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1,
                          margin: Optional[float] = None, scenario: str = "cauchy") -> ReconstructionResult:
    """:func:`cauchy_reconstruct` plus direct evaluation and node count."""
    cx = as_complex(boundary)
    alg = cx.algebra
    if cx.k != alg.n - 1:
        raise ValueError("the boundary must be an (n-1)-complex")
    f = as_field(f, alg)
    xp = _point(x_prime, alg.n)
    _check_margin(cx, xp, quad, margin)
    value, count = _boundary_term(f, cx, xp, quad, threads)
    direct = Multivector(alg, f.values(xp))
    return ReconstructionResult(alg.n, scenario, tuple(map(float, xp)), value, direct, count, boundary_term=value)


def _cell_width_near(region: PatchMap, quad: QuadratureSpec, xp) -> float:
    """Physical size of the quadrature cell closest to ``xp``."""
    nodes, _ = quad.nodes(region.domain)
    i = int(np.argmin(np.linalg.norm(region(nodes) - xp, axis=-1)))
    s = nodes[i]
    speeds = np.linalg.norm(region.tangents(s), axis=-1)
    return float(np.max(speeds * np.asarray(region.domain.widths) / quad.m))


def _outer_boundary(region: PatchMap):
    """Faces of ``region`` minus collapsed faces and internal seams.

    Two faces with the same image (the cut of a polar disk) cancel and a
    face whose tangent measure vanishes (the centre of that disk)
    contributes nothing, but either could lie on top of ``x'``.
    """
    faces = boundary_chain(region.domain)
    sigs = [_face_signature(region, fc) for fc in faces]
    keep = []
    for fc, sig in zip(faces, sigs):
        if sigs.count(sig) > 1:
            continue
        p, flag = face_patch(region, fc)
        probe = QuadratureSpec(points_per_axis=3, subdivisions_per_axis=2).nodes(p.domain)[0]
        X = wedge_all(p.algebra.vector(p.tangents(probe)))
        if float(X.norm().max()) <= 1e-14 * max(1.0, float(np.abs(p(probe)).max())):
            continue
        keep.append((p, flag))
    return glue_patches(keep)


def laplacian(f: FieldFn, x, fd: bool = False) -> Multivector:
    """``d^2 f = sum_j d_j d_j f`` by central differences of the first partials."""
    x = np.asarray(x, dtype=float)
    n = f.alg.n
    h = FD_SCALE * max(1.0, float(np.linalg.norm(x)))
    total = np.zeros(f.alg.dim)
    for j in range(n):
        total += central_derivative(lambda y, j=j: f.partial_derivatives(y, fd)[..., j, :], x, np.eye(n)[j], h)
    return Multivector(f.alg, total)


def _kernel_potential(alg: Algebra, d: np.ndarray) -> np.ndarray:
    """Scalar ``G`` with ``grad_x G = K``: ``-log r`` in R^2, ``r^(2-n)/(n-2)`` above."""
    r = np.linalg.norm(d, axis=-1)
    if alg.n == 2:
        return -np.log(r)
    return r ** (2.0 - alg.n) / (alg.n - 2.0)


def _kernel_volume_integral(cx, xp, quad, threads) -> Multivector:
    """``int_M K |dV|`` as the boundary integral ``oint n G |dS|``."""
    alg = cx.algebra
    Iinv = alg.pseudoscalar_inverse()
    parts = []
    for patch, o in zip(cx.patches, cx.orientations):
        def integrand(s, patch=patch, o=o):
            X = wedge_all(alg.vector(patch.tangents(s))) * float(o)
            G = _kernel_potential(alg, patch(s) - xp)
            return ((Iinv * X).grade(1) * G).coeffs

        nodes, w = quad.nodes(patch.domain)
        parts.append(integrate_nodes(integrand, nodes, w, threads))
    return Multivector(alg, tree_sum(parts))


def full_cauchy_formula(f, region: PatchMap, x_prime, quad: QuadratureSpec = DEFAULT_QUAD, threads: int = 1,
                        margin: Optional[float] = None, boundary=None, fd: bool = False,
                        exclusion_cells: float = EXCLUSION_CELLS, subtract: bool = True,
                        scenario: str = "full_cauchy") -> ReconstructionResult:
    """``f(x')`` for a C^1 (not necessarily monogenic) ``f`` on an n-patch.

    Adds the volume term ``(1/Omega) int K (d f) |dV|`` to the boundary
    term. Nodes inside a ball of radius ``r0`` around ``x'``
    (``exclusion_cells`` volume cell widths near ``x'``) are dropped.

    With ``subtract=True`` the constant ``d f(x')`` is first taken out of
    the volume integrand and integrated exactly through
    ``int_M K |dV| = oint n G |dS|``, so the quadrature only sees the
    bounded remainder ``K (d f(x) - d f(x'))`` and the excluded mass is
    at most ``r0 * max |d f(x) - d f(x')|`` over the ball; its leading
    part ``-(r0^2 / 2n) d^2 f(x')`` (the linear term of ``d f`` against
    the odd kernel) is added back. Without subtraction the
    raw integrand is cut off and the bound is ``r0 * max |d f|``. Either
    bound (already divided by Omega) is reported as ``error_bound``.

    The boundary defaults to the faces of ``region`` with their induced
    orientation, minus seams and collapsed faces; pass ``boundary`` to use
    a different discretization. A negatively oriented region has its
    boundary flipped so that normals point outward.
    """
    alg = region.algebra
    if region.k != alg.n:
        raise ValueError("the region must be an n-patch in R^n")
    f = as_field(f, alg)
    xp = _point(x_prime, alg.n)
    Iinv = alg.pseudoscalar_inverse()
    mid = (np.asarray(region.domain.lower) + np.asarray(region.domain.upper)) / 2
    orient = np.sign((wedge_all(alg.vector(region.tangents(mid))) * Iinv).scalar)
    cx = _outer_boundary(region) if boundary is None else as_complex(boundary)
    if boundary is None and orient < 0:
        cx = glue_patches([(p, -o) for p, o in cx])
    _check_margin(cx, xp, quad, margin)
    bterm, bcount = _boundary_term(f, cx, xp, quad, threads)

    r0 = exclusion_cells * _cell_width_near(region, quad, xp)
    df0 = flat_vector_derivative(f, xp, fd) if subtract else alg.zero()

    def integrand(s):
        T = region.tangents(s)
        X = wedge_all(alg.vector(T))
        check_regular(T, X, region.name)
        vol = np.abs((X * Iinv).scalar)
        x = region(s)
        d = x - xp
        r = np.linalg.norm(d, axis=-1)
        keep = (r >= r0) & (r > 0)
        safe = np.where(keep, r, 1.0)[..., None]
        g = alg.vector(np.where(keep[..., None], -d / safe**alg.n, 0.0))
        df = flat_vector_derivative(f, x, fd) - df0
        return (g * df).coeffs * vol[..., None]

    nodes, w = quad.nodes(region.domain)
    vol_sum = Multivector(alg, integrate_nodes(integrand, nodes, w, threads))
    count = bcount + len(w)
    vterm = vol_sum / omega(alg.n)
    if subtract:
        vterm = vterm + _kernel_volume_integral(cx, xp, quad, threads) * df0 / omega(alg.n)
        count += bcount
        # leading part of the excluded ball, -(r0^2 / 2n) lap f(x')
        vterm = vterm - laplacian(f, xp, fd) * (r0**2 / (2.0 * alg.n))

    # excluded mass: int_{B(r0)} |K| |h| <= Omega r0 max|h|
    ring = np.linalg.norm(region(nodes) - xp, axis=-1) < r0
    probe = np.vstack([xp[None, :], region(nodes[ring])])
    hmax = float((flat_vector_derivative(f, probe, fd) - df0).norm().max())
    value = vterm + bterm
    direct = Multivector(alg, f.values(xp))
    return ReconstructionResult(alg.n, scenario, tuple(map(float, xp)), value, direct, count, r0,
                                boundary_term=bterm, volume_term=vterm, error_bound=r0 * hmax)
