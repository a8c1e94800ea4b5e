"""Parameter rectangles, patch maps, tangent and reciprocal frames.

A k-patch is the image ``M = x(R)`` of a k-rectangle ``R`` under a map
``x: R -> R^n``. Arrays of parameter points have shape ``(..., k)``; maps
return ``(..., n)`` and Jacobians ``(..., k, n)`` with row ``i`` the tangent
vector ``x_i = dx/ds^i``.

Faces and axes are numbered from 0 in code. Face ``(i, +1)`` pins
``s^i = b^i`` and face ``(i, -1)`` pins ``s^i = a^i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._fd import FD_SCALE, central_derivative, one_sided_weights
from .algebra import Algebra, Multivector, blade_inverse, grade_project
from .errors import DomainError, RegularityError

#: |x_(k)| below this fraction of prod |x_i| counts as a degenerate frame.
REGULARITY_EPS = 1e-10


@dataclass(frozen=True)
class KRectangle:
    """``R = [a^1, b^1] x ... x [a^k, b^k]``."""

    bounds: tuple

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not b:
            raise ValueError("a k-rectangle needs k >= 1 intervals")
        for lo, hi in b:
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise ValueError(f"degenerate interval [{lo}, {hi}]")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def unit(cls, k: int) -> "KRectangle":
        return cls(((0.0, 1.0),) * k)

    @property
    def k(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, s, margin: float = 1e-12) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        tol = margin * np.maximum(self.widths, 1.0)
        return np.all((s >= self.lower - tol) & (s <= self.upper + tol), axis=-1)

    def faces(self) -> list:
        return boundary_chain(self)


@dataclass(frozen=True)
class Face:
    """One oriented face ``R^i_+`` (side +1) or ``R^i_-`` (side -1)."""

    parent: KRectangle
    axis: int
    side: int

    def __post_init__(self):
        if not 0 <= self.axis < self.parent.k:
            raise ValueError(f"axis {self.axis} outside 0..{self.parent.k - 1}")
        if self.side not in (1, -1):
            raise ValueError("side must be +1 or -1")

    @property
    def sign(self) -> int:
        return self.side

    @property
    def value(self) -> float:
        lo, hi = self.parent.bounds[self.axis]
        return hi if self.side > 0 else lo

    @property
    def rectangle(self) -> Optional[KRectangle]:
        """The (k-1)-rectangle of surviving parameters; None when k = 1."""
        rest = tuple(b for i, b in enumerate(self.parent.bounds) if i != self.axis)
        return KRectangle(rest) if rest else None

    def lift(self, t) -> np.ndarray:
        """Insert the pinned coordinate into face parameters ``t``."""
        t = np.asarray(t, dtype=float)
        pinned = np.full(t.shape[:-1] + (1,), self.value)
        return np.concatenate([t[..., : self.axis], pinned, t[..., self.axis :]], axis=-1)

    def __str__(self):
        return f"s{self.axis + 1}={self.value:g} ({'+' if self.side > 0 else '-'})"


def boundary_chain(rect: KRectangle) -> list:
    """The 2k oriented faces ``(R^1_+, R^1_-, ..., R^k_+, R^k_-)``."""
    return [Face(rect, i, side) for i in range(rect.k) for side in (1, -1)]


@dataclass(frozen=True)
class PatchMap:
    """A parametrized k-patch ``x: R -> R^n``.

    ``func`` maps ``(..., k)`` parameter arrays to ``(..., n)`` points and
    ``jacobian`` (optional) to ``(..., k, n)`` tangent rows. Without a
    Jacobian the tangents come from 4th-order differences that switch to
    one-sided stencils near the edges of the domain, so ``func`` is never
    evaluated outside ``R``. Both callables must be pure.
    """

    domain: KRectangle
    ambient_dim: int
    func: Callable
    jacobian: Optional[Callable] = None
    name: str = "patch"
    smoothness: int = 2
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.domain.k > self.ambient_dim:
            raise ValueError(f"k={self.domain.k} exceeds ambient dimension {self.ambient_dim}")

    @property
    def k(self) -> int:
        return self.domain.k

    @property
    def n(self) -> int:
        return self.ambient_dim

    @property
    def algebra(self) -> Algebra:
        return Algebra(self.ambient_dim)

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.asarray(self.func(s), dtype=float)

    def check_domain(self, s, margin: float = 1e-12):
        if not np.all(self.domain.contains(s, margin)):
            raise DomainError(f"parameter point outside {self.domain.bounds} for patch {self.name!r}")

    def tangents(self, s, fd: bool = False) -> np.ndarray:
        """Tangent vectors ``x_i(s)`` as an array of shape ``(..., k, n)``."""
        s = np.asarray(s, dtype=float)
        self.check_domain(s)
        if self.jacobian is not None and not fd:
            return np.broadcast_to(np.asarray(self.jacobian(s), dtype=float), s.shape[:-1] + (self.k, self.n))
        return self._fd_tangents(s)

    def _fd_tangents(self, s: np.ndarray) -> np.ndarray:
        lo, hi = self.domain.lower, self.domain.upper
        cols = []
        for i in range(self.k):
            h = FD_SCALE * np.maximum(np.abs(s[..., i]), 1.0)
            h = np.minimum(h, (hi[i] - lo[i]) / 8.0)
            acc = np.zeros(s.shape[:-1] + (self.n,))
            fwd = s[..., i] - 2 * h < lo[i]
            bwd = s[..., i] + 2 * h > hi[i]
            kinds = np.where(fwd, 1, np.where(bwd, 2, 0))
            for code, kind in enumerate(("central", "forward", "backward")):
                sel = kinds == code
                if not np.any(sel):
                    continue
                ss = s[sel]
                hh = h[sel]
                part = np.zeros(ss.shape[:-1] + (self.n,))
                for off, w in one_sided_weights(kind):
                    shifted = ss.copy()
                    shifted[..., i] = ss[..., i] + off * hh
                    if kind != "central":
                        # pin to the edge exactly to avoid stepping out by roundoff
                        shifted[..., i] = np.clip(shifted[..., i], lo[i], hi[i])
                    part = part + w * self(shifted)
                acc[sel] = part / (12.0 * hh[:, None])
            cols.append(acc)
        return np.stack(cols, axis=-2)

    def reversed_axis(self, axis: int) -> "PatchMap":
        """Same image with ``s^axis`` replaced by ``a + b - s^axis``."""
        lo, hi = self.domain.bounds[axis]

        def flip(s):
            s = np.array(s, dtype=float)
            s[..., axis] = lo + hi - s[..., axis]
            return s

        jac = None
        if self.jacobian is not None:

            def jac(s):
                J = np.array(self.jacobian(flip(s)), dtype=float)
                J[..., axis, :] *= -1
                return J

        return PatchMap(self.domain, self.n, lambda s: self.func(flip(s)), jac, self.name + f"~{axis}", self.smoothness)

    def without_jacobian(self) -> "PatchMap":
        return PatchMap(self.domain, self.n, self.func, None, self.name + "[fd]", self.smoothness, self.params)


def wedge_all(vectors: Multivector) -> Multivector:
    """Outer product over the last batch axis: ``v_1 ^ v_2 ^ ... ^ v_k``."""
    k = vectors.shape[-1]
    out = vectors[..., 0]
    for i in range(1, k):
        out = out ^ vectors[..., i]
    return out


def wedge_except(vectors: Multivector, skip: int) -> Multivector:
    """Wedge of all vectors but the one at ``skip``; 1 if nothing is left."""
    k = vectors.shape[-1]
    rest = [i for i in range(k) if i != skip]
    if not rest:
        return vectors.alg.scalar(np.ones(vectors.shape[:-1]))
    out = vectors[..., rest[0]]
    for i in rest[1:]:
        out = out ^ vectors[..., i]
    return out


@dataclass(frozen=True)
class FrameData:
    """Tangent frame of a patch at one or more parameter points.

    ``tangents`` and ``reciprocals`` are batched multivectors whose last
    batch axis runs over i = 0..k-1; ``kvector`` is ``x_1 ^ ... ^ x_k``.
    """

    point: np.ndarray
    tangents: Multivector
    kvector: Multivector
    reciprocals: Multivector

    @property
    def k(self) -> int:
        return self.tangents.shape[-1]

    def tangent(self, i: int) -> Multivector:
        return self.tangents[..., i]

    def reciprocal(self, i: int) -> Multivector:
        return self.reciprocals[..., i]

    def gram_check(self) -> np.ndarray:
        """Max |x^i . x_j - delta_ij| at each point."""
        r = self.reciprocals.vector_coords()
        t = self.tangents.vector_coords()
        G = np.einsum("...in,...jn->...ij", r, t)
        return np.max(np.abs(G - np.eye(self.k)), axis=(-2, -1))


def check_regular(tangent_coords: np.ndarray, kvector: Multivector, name="patch", eps=REGULARITY_EPS):
    scale = np.prod(np.linalg.norm(tangent_coords, axis=-1), axis=-1)
    bad = ~(kvector.norm() > eps * scale) | (scale == 0)
    if np.any(bad):
        where = np.argwhere(np.atleast_1d(bad))[0]
        raise RegularityError(f"tangent k-vector of {name!r} vanishes (first bad node {tuple(where)})")


def frame_from_tangents(alg: Algebra, point, T: np.ndarray, name="patch", eps=REGULARITY_EPS) -> FrameData:
    """Build a :class:`FrameData` from tangent coordinates ``T (..., k, n)``."""
    k = T.shape[-2]
    tangents = alg.vector(T)
    X = wedge_all(tangents)
    check_regular(T, X, name, eps)
    Xinv = blade_inverse(X)
    recips = []
    for i in range(k):
        # the inner product of grades k-1 and k is the grade-1 part of the
        # product; using the product also covers k = 1 (empty wedge = 1)
        r = grade_project(wedge_except(tangents, i) * Xinv, 1)
        recips.append(r.coeffs * (-1.0) ** i)
    R = Multivector(alg, np.stack(recips, axis=-2))
    return FrameData(np.asarray(point), tangents, X, R)


def tangent_frame(patch: PatchMap, s, fd: bool = False, eps: float = REGULARITY_EPS) -> FrameData:
    """Tangents ``x_i``, tangent k-vector ``x_(k)`` and reciprocals ``x^i`` at ``s``.

    Reciprocals follow ``x^i = (-1)^(i-1) (wedge_{j != i} x_j) . x_(k)^{-1}``
    (1-based ``i``). Raises :class:`RegularityError` where ``|x_(k)|`` falls
    below ``eps`` times the product of the tangent lengths and
    :class:`DomainError` for points outside the domain.
    """
    s = np.asarray(s, dtype=float)
    T = patch.tangents(s, fd=fd)
    return frame_from_tangents(patch.algebra, patch(s), T, patch.name, eps)


def frame_divergence(patch: PatchMap, s, j: Optional[int] = None, fd: bool = False) -> Multivector:
    """Central-difference value of ``sum_{i<=j} d/ds^i (x_(j) . x^i)``.

    ``x_(j)`` and ``x^i`` belong to the sub-frame of the first ``j`` tangents
    (``j`` defaults to ``k``). The sum vanishes identically for smooth maps,
    which is why the frame may be frozen under the dotted derivative; the
    returned (j-1)-vector measures how far the numerics are from that.
    Points must lie at least two steps inside the domain.
    """
    s = np.asarray(s, dtype=float)
    j = patch.k if j is None else int(j)
    if not 1 <= j <= patch.k:
        raise ValueError(f"j must be in 1..{patch.k}")
    alg = patch.algebra

    def composite(p):
        T = patch.tangents(p, fd=fd)[..., :j, :]
        frame = frame_from_tangents(alg, p, T, patch.name)
        return (frame.kvector[..., None] | frame.reciprocals).coeffs

    total = None
    for i in range(j):
        h = FD_SCALE * np.maximum(np.abs(s[..., i]), 1.0)
        direction = np.zeros(patch.k)
        direction[i] = 1.0
        # returns (..., j, dim); only the i-th reciprocal is differentiated
        d = central_derivative(composite, s, direction, h)[..., i, :]
        total = d if total is None else total + d
    return Multivector(alg, total)


def face_frame(patch: PatchMap, face: Face, t, fd: bool = False):
    """Frame of the patch on a boundary face and the face's oriented measure.

    The measure is ``sign * x_(k) x^i``, the directed (k-1)-vector of the
    face; ``sign * x^i`` points along the outward normal. For k = 1 the
    measure is the scalar ``sign``.
    """
    t = np.asarray(t, dtype=float)
    if face.parent != patch.domain:
        raise ValueError("face does not belong to this patch's domain")
    if patch.k == 1 and t.ndim == 0:
        t = np.zeros(0)
    s = face.lift(t)
    frame = tangent_frame(patch, s, fd=fd)
    measure = frame.kvector * frame.reciprocal(face.axis) * float(face.sign)
    return frame, measure


def face_measure(patch: PatchMap, face: Face, T: np.ndarray) -> Multivector:
    """Oriented face measure from tangent coordinates, without inverses.

    Uses ``x_(k) x^i = (-1)^(k-i) wedge_{j != i} x_j`` (1-based ``i``), which
    agrees with :func:`face_frame` on regular frames and degrades gracefully
    to zero on collapsed faces such as the centre of a polar disk.
    """
    alg = patch.algebra
    k = patch.k
    sign = face.sign * (-1.0) ** (k - 1 - face.axis)
    if k == 1:
        return alg.scalar(np.full(T.shape[:-2], float(face.sign)))
    return wedge_except(alg.vector(T), face.axis) * sign


# ---------------------------------------------------------------------
# complexes of glued patches


@dataclass(frozen=True)
class PatchComplex:
    """Patches glued along faces, each carrying an orientation flag (+1/-1).

    Integrals over the complex are flag-weighted sums of per-patch
    integrals. Whether shared faces really carry opposite induced
    orientations is the caller's responsibility; integrator diagnostics can
    check it after the fact.
    """

    patches: tuple
    orientations: tuple

    def __post_init__(self):
        if not self.patches:
            raise ValueError("a patch complex needs at least one patch")
        if len(self.patches) != len(self.orientations):
            raise ValueError("one orientation flag per patch")
        ks = {p.k for p in self.patches}
        ns = {p.n for p in self.patches}
        if len(ks) > 1 or len(ns) > 1:
            raise ValueError("all patches in a complex need the same k and n")
        for o in self.orientations:
            if o not in (1, -1):
                raise ValueError("orientation flags must be +1 or -1")

    @property
    def k(self) -> int:
        return self.patches[0].k

    @property
    def n(self) -> int:
        return self.patches[0].n

    @property
    def algebra(self) -> Algebra:
        return Algebra(self.n)

    def __iter__(self):
        return iter(zip(self.patches, self.orientations))

    def __len__(self):
        return len(self.patches)


def glue_patches(items: Sequence) -> PatchComplex:
    """Build a :class:`PatchComplex` from patches or ``(patch, flag)`` pairs."""
    patches, flags = [], []
    for item in items:
        if isinstance(item, PatchMap):
            patches.append(item)
            flags.append(1)
        else:
            p, o = item
            patches.append(p)
            flags.append(int(o))
    if not patches:
        raise ValueError("cannot glue an empty list of patches")
    return PatchComplex(tuple(patches), tuple(flags))


def as_complex(obj) -> PatchComplex:
    if isinstance(obj, PatchComplex):
        return obj
    if isinstance(obj, PatchMap):
        return PatchComplex((obj,), (1,))
    return glue_patches(obj)


def face_patch(patch: PatchMap, face: Face) -> tuple:
    """A face of a k-patch as a (k-1)-patch plus the flag of its induced orientation.

    The (k-1)-patch keeps the surviving parameters in order, so its tangent
    (k-1)-vector is ``wedge_{j != i} x_j``; the flag converts that to the
    induced boundary measure.
    """
    rect = face.rectangle
    if rect is None:
        raise ValueError("faces of a 1-patch are points")

    def func(t):
        return patch(face.lift(t))

    jac = None
    if patch.jacobian is not None:

        def jac(t):
            J = np.asarray(patch.jacobian(face.lift(t)), dtype=float)
            return np.delete(J, face.axis, axis=-2)

    flag = int(face.sign * (-1) ** (patch.k - 1 - face.axis))
    return PatchMap(rect, patch.n, func, jac, f"{patch.name}[{face}]", patch.smoothness), flag


def boundary_complex(patch: PatchMap) -> PatchComplex:
    """All faces of a patch as a complex with induced orientations."""
    return glue_patches([face_patch(patch, f) for f in boundary_chain(patch.domain)])
