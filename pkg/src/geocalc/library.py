"""Builtin patches, boundary complexes and fields, with name registries.

Registry entries are factories taking keyword parameters; fields also take
the ambient dimension ``n``. ``PATCHES`` and ``FIELDS`` map names to
``(factory, description)`` pairs.
"""

from __future__ import annotations

import math

import numpy as np

from . import fields as F
from .algebra import Algebra
from .patches import KRectangle, PatchMap, glue_patches
from .polyfield import parse_polynomial, parse_poly_field


def _bounds(bounds, k):
    if bounds is None:
        return KRectangle.unit(k)
    return KRectangle(tuple(tuple(b) for b in bounds))


def identity_patch(k: int = 2, n: int = None, bounds=None) -> PatchMap:
    """x(s) = s, embedded in the first k coordinates of R^n (n defaults to k)."""
    n = k if n is None else n
    E = np.eye(n)[:k]
    return PatchMap(_bounds(bounds, k), n, lambda s: s @ E,
                    lambda s: np.broadcast_to(E, s.shape[:-1] + (k, n)), f"identity_{k}",
                    params={"k": k, "n": n, "bounds": bounds})


def figure2_patch() -> PatchMap:
    """x(s1, s2) = (s1, s2, (1 - sin(s1^2))/2 - 3 s2) on [0, 1]^2."""

    def func(s):
        s1, s2 = s[..., 0], s[..., 1]
        return np.stack([s1, s2, (1.0 - np.sin(s1**2)) / 2.0 - 3.0 * s2], axis=-1)

    def jac(s):
        s1 = s[..., 0]
        J = np.zeros(s.shape[:-1] + (2, 3))
        J[..., 0, 0] = 1.0
        J[..., 0, 2] = -s1 * np.cos(s1**2)
        J[..., 1, 1] = 1.0
        J[..., 1, 2] = -3.0
        return J

    return PatchMap(KRectangle.unit(2), 3, func, jac, "figure2")


def disk_polar_patch(radius: float = 1.0, center=(0.0, 0.0), inner: float = 0.0) -> PatchMap:
    """Polar map (r, theta) -> c + r(cos theta, sin theta) on [inner, R] x [0, 2 pi].

    With ``inner = 0`` the face r = 0 collapses to the centre; frames are
    regular at every interior point and the collapsed face has zero measure.
    """
    c = np.asarray(center, dtype=float)

    def func(s):
        r, t = s[..., 0], s[..., 1]
        return c + np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def jac(s):
        r, t = s[..., 0], s[..., 1]
        J = np.empty(s.shape[:-1] + (2, 2))
        J[..., 0, 0], J[..., 0, 1] = np.cos(t), np.sin(t)
        J[..., 1, 0], J[..., 1, 1] = -r * np.sin(t), r * np.cos(t)
        return J

    return PatchMap(KRectangle(((inner, radius), (0.0, 2 * math.pi))), 2, func, jac, "disk_polar",
                    params={"radius": radius, "center": list(c), "inner": inner})


def sphere_octant_patch(radius: float = 1.0) -> PatchMap:
    """Spherical coordinates (polar theta, azimuth phi) on [0, pi/2]^2.

    The face theta = 0 collapses to the north pole. The tangent bivector
    orients the surface by its outward normal.
    """

    def func(s):
        th, ph = s[..., 0], s[..., 1]
        return radius * np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)

    def jac(s):
        th, ph = s[..., 0], s[..., 1]
        J = np.empty(s.shape[:-1] + (2, 3))
        J[..., 0, :] = radius * np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], axis=-1)
        J[..., 1, :] = radius * np.stack([-np.sin(th) * np.sin(ph), np.sin(th) * np.cos(ph), np.zeros_like(th)], axis=-1)
        return J

    half = math.pi / 2
    return PatchMap(KRectangle(((0.0, half), (0.0, half))), 3, func, jac, "sphere_octant",
                    params={"radius": radius})


def linear_patch(A, offset=None, bounds=None) -> PatchMap:
    """x(s) = offset + A s for an n x k matrix A (default domain [0, 1]^k)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n, k = A.shape
    b = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
    return PatchMap(_bounds(bounds, k), n, lambda s: s @ A.T + b,
                    lambda s: np.broadcast_to(A.T, s.shape[:-1] + (k, n)), "linear",
                    params={"A": A.tolist(), "offset": b.tolist(), "bounds": bounds})


def graph2d_patch(expr: str, bounds=None) -> PatchMap:
    """Graph surface x(s) = (s1, s2, h(s1, s2)) of a scalar polynomial ``h``.

    ``expr`` uses the polynomial-field grammar with ``x1, x2`` standing for
    the parameters.
    """
    h = parse_polynomial(expr, 2)
    if not h.is_scalar():
        raise ValueError("graph2d needs a scalar expression")
    h1, h2 = h.derivative(0), h.derivative(1)

    def func(s):
        return np.concatenate([s, h.evaluate(s)[..., :1]], axis=-1)

    def jac(s):
        J = np.zeros(s.shape[:-1] + (2, 3))
        J[..., 0, 0] = 1.0
        J[..., 1, 1] = 1.0
        J[..., 0, 2] = h1.evaluate(s)[..., 0]
        J[..., 1, 2] = h2.evaluate(s)[..., 0]
        return J

    return PatchMap(_bounds(bounds, 2), 3, func, jac, "graph2d", params={"expr": expr, "bounds": bounds})


def arc_patch(radius: float = 1.0, start: float = 0.0, stop: float = math.pi, center=(0.0, 0.0)) -> PatchMap:
    """Circular arc t -> c + R(cos t, sin t), t in [start, stop]."""
    c = np.asarray(center, dtype=float)

    def func(s):
        t = s[..., 0]
        return c + radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def jac(s):
        t = s[..., 0]
        return radius * np.stack([-np.sin(t), np.cos(t)], axis=-1)[..., None, :]

    return PatchMap(KRectangle(((start, stop),)), 2, func, jac, "arc",
                    params={"radius": radius, "start": start, "stop": stop, "center": list(c)})


def segment_patch(a, b) -> PatchMap:
    """Straight segment from a to b, s in [0, 1]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = linear_patch((b - a)[:, None], offset=a)
    return PatchMap(p.domain, p.n, p.func, p.jacobian, "segment", params={"a": a.tolist(), "b": b.tolist()})


def parabola_patch(a: float = 0.0, b: float = 1.0, curvature: float = 1.0) -> PatchMap:
    """Plane curve t -> (t, c t^2) on [a, b]."""

    def func(s):
        t = s[..., 0]
        return np.stack([t, curvature * t**2], axis=-1)

    def jac(s):
        t = s[..., 0]
        return np.stack([np.ones_like(t), 2 * curvature * t], axis=-1)[..., None, :]

    return PatchMap(KRectangle(((a, b),)), 2, func, jac, "parabola",
                    params={"a": a, "b": b, "curvature": curvature})


def unit_cube_patch() -> PatchMap:
    p = identity_patch(3)
    return PatchMap(p.domain, 3, p.func, p.jacobian, "unit_cube")


def circle_boundary(radius: float = 1.0, center=(0.0, 0.0)):
    """Counter-clockwise circle with the orientation it inherits as a disk boundary.

    For regions in R^2 the induced boundary measure of the fundamental
    theorem is ``I n`` (n the outward normal), which runs clockwise; the
    counter-clockwise parametrization therefore carries flag -1.
    """
    return glue_patches([(arc_patch(radius, 0.0, 2 * math.pi, center), -1)])


def _cube_face(radius, center, axis, side):
    c = np.asarray(center, dtype=float)
    others = [j for j in range(3) if j != axis]

    def cube_point(t):
        p = np.empty(t.shape[:-1] + (3,))
        p[..., axis] = side
        p[..., others[0]] = t[..., 0]
        p[..., others[1]] = t[..., 1]
        return p

    def func(t):
        p = cube_point(t)
        return c + radius * p / np.linalg.norm(p, axis=-1, keepdims=True)

    def jac(t):
        p = cube_point(t)
        r = np.linalg.norm(p, axis=-1, keepdims=True)
        J = np.empty(t.shape[:-1] + (2, 3))
        for row, j in enumerate(others):
            dp = np.zeros(3)
            dp[j] = 1.0
            # d/dt (p/|p|) = dp/|p| - p (p.dp)/|p|^3
            J[..., row, :] = radius * (dp / r - p * p[..., j : j + 1] / r**3)
        return J

    return PatchMap(KRectangle(((-1.0, 1.0), (-1.0, 1.0))), 3, func, jac, f"sphere_face{axis}{'+' if side > 0 else '-'}")


def sphere_boundary(radius: float = 1.0, center=(0.0, 0.0, 0.0)):
    """Sphere as six radially projected cube faces, oriented outward."""
    items = []
    for axis in range(3):
        for side in (1, -1):
            # same flag as the matching face of the unit cube
            items.append((_cube_face(radius, center, axis, side), side * (-1) ** (2 - axis)))
    return glue_patches(items)


def split_square(flip_right: bool = False):
    """Unit square glued from its left and right halves."""
    left = identity_patch(2, bounds=[[0.0, 0.5], [0.0, 1.0]])
    right = identity_patch(2, bounds=[[0.5, 1.0], [0.0, 1.0]])
    return glue_patches([(left, 1), (right, -1 if flip_right else 1)])


PATCHES = {
    "identity_k": (identity_patch, "x(s) = s on [0,1]^k (params: k, n, bounds)"),
    "figure2": (figure2_patch, "graph (s1, s2, (1 - sin(s1^2))/2 - 3 s2) over [0,1]^2"),
    "disk_polar": (disk_polar_patch, "polar disk (params: radius, center, inner)"),
    "sphere_octant": (sphere_octant_patch, "first octant of a sphere (params: radius)"),
    "linear": (linear_patch, "x(s) = offset + A s (params: A, offset, bounds)"),
    "graph2d": (graph2d_patch, "graph of a scalar polynomial (params: expr, bounds)"),
    "arc": (arc_patch, "circular arc (params: radius, start, stop, center)"),
    "segment": (segment_patch, "segment from a to b (params: a, b)"),
    "parabola": (parabola_patch, "curve (t, c t^2) (params: a, b, curvature)"),
    "unit_cube": (unit_cube_patch, "identity map of [0,1]^3"),
}

COMPLEXES = {
    "circle": (circle_boundary, "circle as an induced disk boundary (params: radius, center)"),
    "sphere": (sphere_boundary, "cubed sphere, outward oriented (params: radius, center)"),
    "split_square": (split_square, "unit square from two halves (params: flip_right)"),
}


def _constant(n, value="1"):
    alg = Algebra(n)
    return F.FieldFn.constant_field(alg, alg.parse(str(value)) if isinstance(value, str) else value)


def _complex_power(n, power=2):
    p = int(power)
    f = F.complex_field(Algebra(n), lambda z: z**p, lambda z: p * z ** (p - 1), name=f"z^{p}")
    return f


def _complex_exp(n):
    return F.complex_field(Algebra(n), np.exp, np.exp, name="exp(z)")


FIELDS = {
    "identity_vector": (lambda n: F.identity_field(Algebra(n)), "f(x) = x"),
    "constant": (_constant, "constant multivector (params: value, e.g. '1 + 2*e12')"),
    "linear": (lambda n, A: F.linear_field(Algebra(n), A), "f(x) = A x (params: A)"),
    "rotation": (lambda n, omega=1.0: F.rotation_field(Algebra(n), omega), "omega (-x2, x1, 0...)"),
    "norm_power": (lambda n, k=2: F.norm_power_field(Algebra(n), k), "|x|^k (params: k)"),
    "log_norm": (lambda n: F.log_norm_field(Algebra(n)), "log|x|"),
    "radial": (lambda n, k=1, center=None: F.radial_field(Algebra(n), k, center), "(x-c)/|x-c|^k"),
    "cauchy_kernel": (lambda n, source=None: F.cauchy_kernel(Algebra(n), source if source is not None else np.zeros(n)),
                      "(x-s)/|x-s|^n (params: source)"),
    "complex_power": (_complex_power, "z^p as u + v e12 in G_2 (params: power)"),
    "complex_exp": (_complex_exp, "exp(z) as u + v e12 in G_2"),
    "poly": (lambda n, expr: parse_poly_field(expr, n), "polynomial expression (params: expr)"),
}


def field_dimension(key: str, **params):
    """Ambient dimension a field entry requires, or None if it adapts to any n."""
    if key in ("complex_power", "complex_exp"):
        return 2
    if key == "linear" and "A" in params:
        return len(params["A"])
    if key in ("cauchy_kernel", "radial") and params.get("source", params.get("center")) is not None:
        return len(params.get("source", params.get("center")))
    return None


def make_patch(key: str, **params):
    """Patch or complex from the registries."""
    if key in PATCHES:
        return PATCHES[key][0](**params)
    if key in COMPLEXES:
        return COMPLEXES[key][0](**params)
    raise KeyError(key)


def make_field(key: str, n: int, **params):
    if key not in FIELDS:
        raise KeyError(key)
    return FIELDS[key][0](n, **params)
