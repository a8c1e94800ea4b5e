"""Dense Euclidean geometric algebra G_n.

A :class:`Multivector` stores one real coefficient per basis blade. Blades
are addressed by bitmask: bit ``i`` set means ``e_{i+1}`` is a factor, and
factors are kept in ascending order. Coefficient arrays may carry leading
batch axes, so ``coeffs.shape == batch_shape + (2**n,)``; every operation
broadcasts over those axes. This is what lets the integrators evaluate a
whole block of quadrature nodes with a handful of numpy calls.

Products are bilinear maps described by a Cayley table: for blades ``i`` and
``j`` the geometric product is ``sign[i, j] * e_{i ^ j}``. The inner and
outer products reuse the same table with some signs zeroed out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from numbers import Real
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    GradeError,
    SignatureMismatchError,
    SingularBladeError,
)

MAX_DIMENSION = 12

#: Relative threshold below which a blade counts as singular.
BLADE_EPS = 1e-12

#: |sin(theta)| below this makes :func:`euler_decompose` report no plane.
PARALLEL_EPS = 1e-10


def blade_sign(a: int, b: int) -> int:
    """Sign of ``e_a e_b`` for Euclidean basis blades given as bitmasks.

    Each factor of ``b`` has to move left past every factor of ``a`` with a
    larger index; the parity of that count is the sign.
    """
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


def _popcount(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    while np.any(x):
        out += x & 1
        x = x >> 1
    return out


class _Tables(NamedTuple):
    grades: np.ndarray
    gp: np.ndarray
    outer: np.ndarray
    inner: np.ndarray
    reverse: np.ndarray


@lru_cache(maxsize=None)
def _tables(n: int) -> _Tables:
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    grades = _popcount(idx)
    a = idx[:, None]
    b = idx[None, :]
    # popcount-prefix method: shift a right one bit at a time and count the
    # overlaps with b; each overlap is one transposition.
    swaps = np.zeros((dim, dim), dtype=np.int64)
    shifted = a >> 1
    while np.any(shifted):
        swaps += _popcount(shifted & b)
        shifted = shifted >> 1
    gp = np.where(swaps & 1, -1, 1).astype(np.int8)
    ga = grades[:, None]
    gb = grades[None, :]
    gr = grades[idx[:, None] ^ idx[None, :]]
    outer = np.where(gr == ga + gb, gp, 0).astype(np.int8)
    inner_mask = (gr == np.abs(ga - gb)) & (ga > 0) & (gb > 0)
    inner = np.where(inner_mask, gp, 0).astype(np.int8)
    rev = np.where((grades * (grades - 1) // 2) % 2, -1.0, 1.0)
    for t in (grades, gp, outer, inner, rev):
        t.setflags(write=False)
    return _Tables(grades, gp, outer, inner, rev)


def _mask_from_indices(indices: Iterable[int], n: int) -> tuple[int, int]:
    """Bitmask and sign of the product e_{i1} e_{i2} ... (1-based indices)."""
    mask = 0
    sign = 1
    for i in indices:
        if not 1 <= i <= n:
            raise ValueError(f"basis index {i} outside 1..{n}")
        bit = 1 << (i - 1)
        sign *= blade_sign(mask, bit)
        mask ^= bit
    return mask, sign


def blade_label(mask: int) -> str:
    """Text label of a blade bitmask, e.g. ``5 -> 'e13'`` and ``0 -> ''``."""
    indices = [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]
    if not indices:
        return ""
    if all(i < 10 for i in indices):
        return "e" + "".join(str(i) for i in indices)
    return "e" + "_".join(str(i) for i in indices)


@dataclass(frozen=True)
class Algebra:
    """The geometric algebra of Euclidean R^n (every e_i squares to +1).

    Instances compare equal by dimension, so ``Algebra(3) == Algebra(3)``.
    """

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not 1 <= self.n <= MAX_DIMENSION:
            raise ValueError(f"dimension must be an integer in 1..{MAX_DIMENSION}, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def grades(self) -> np.ndarray:
        """Grade of every blade index."""
        return _tables(self.n).grades

    def grade_mask(self, k: int) -> np.ndarray:
        return self.grades == k

    # constructors -----------------------------------------------------

    def zero(self, shape: Sequence[int] = ()) -> "Multivector":
        return Multivector(self, np.zeros(tuple(shape) + (self.dim,)))

    def scalar(self, value=1.0) -> "Multivector":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (self.dim,))
        c[..., 0] = value
        return Multivector(self, c)

    def vector(self, coords) -> "Multivector":
        """Grade-1 multivector(s) from coordinates of shape ``(..., n)``."""
        coords = np.asarray(coords, dtype=float)
        if coords.shape[-1:] != (self.n,):
            raise GradeError(f"vector needs {self.n} coordinates, got shape {coords.shape}")
        c = np.zeros(coords.shape[:-1] + (self.dim,))
        c[..., 1 << np.arange(self.n)] = coords
        return Multivector(self, c)

    def blade(self, *indices: int) -> "Multivector":
        """Product of basis vectors, ``alg.blade(1, 2) == e12``.

        Indices are 1-based; unsorted or repeated indices are multiplied out,
        so ``alg.blade(2, 1) == -e12`` and ``alg.blade(1, 1) == 1``.
        """
        mask, sign = _mask_from_indices(indices, self.n)
        c = np.zeros(self.dim)
        c[mask] = sign
        return Multivector(self, c)

    def basis_vectors(self) -> "Multivector":
        """Batch of shape ``(n,)`` holding e_1, ..., e_n."""
        return self.vector(np.eye(self.n))

    def pseudoscalar(self) -> "Multivector":
        """I = e_1 e_2 ... e_n."""
        return self.blade(*range(1, self.n + 1))

    def pseudoscalar_inverse(self) -> "Multivector":
        """I^{-1} = e_n ... e_2 e_1."""
        return self.blade(*range(self.n, 0, -1))

    def random(self, rng: np.random.Generator, shape=(), grades=None) -> "Multivector":
        """Standard-normal coefficients, optionally restricted to some grades."""
        c = rng.standard_normal(tuple(shape) + (self.dim,))
        if grades is not None:
            keep = np.isin(self.grades, np.atleast_1d(grades))
            c = c * keep
        return Multivector(self, c)

    def parse(self, text: str) -> "Multivector":
        from .notation import parse_multivector

        return parse_multivector(text, self)


class Multivector:
    """Element (or batch of elements) of G_n with dense coefficients.

    Instances are immutable: the coefficient array is a private read-only
    copy. Arithmetic operators follow the usual conventions:

    ``a * b``  geometric product (or scaling by a real number / array)
    ``a ^ b``  outer product
    ``a | b``  inner product with the zero convention for scalars
    ``~a``     reverse
    """

    __slots__ = ("alg", "coeffs")
    __array_priority__ = 1000

    def __init__(self, alg: Algebra, coeffs):
        c = np.array(coeffs, dtype=float)
        if c.ndim == 0 or c.shape[-1] != alg.dim:
            raise ValueError(f"expected trailing axis of length {alg.dim}, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "alg", alg)
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    @classmethod
    def _wrap(cls, alg: Algebra, coeffs: np.ndarray) -> "Multivector":
        # skips the defensive copy for arrays we just created
        obj = object.__new__(cls)
        coeffs.setflags(write=False)
        object.__setattr__(obj, "alg", alg)
        object.__setattr__(obj, "coeffs", coeffs)
        return obj

    # shape handling ---------------------------------------------------

    @property
    def shape(self) -> tuple:
        """Batch shape (empty for a single multivector)."""
        return self.coeffs.shape[:-1]

    def __len__(self):
        if not self.shape:
            raise TypeError("single multivector has no length")
        return self.shape[0]

    def __getitem__(self, item) -> "Multivector":
        if not isinstance(item, tuple):
            item = (item,)
        if any(it is Ellipsis for it in item):
            index = item + (slice(None),)
        else:
            index = item + (Ellipsis, slice(None))
        return Multivector._wrap(self.alg, np.array(self.coeffs[index]))

    def sum(self, axis=0) -> "Multivector":
        """Sum over a batch axis."""
        if axis < 0:
            axis -= 1
        return Multivector._wrap(self.alg, self.coeffs.sum(axis=axis))

    def reshape(self, *shape) -> "Multivector":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Multivector(self.alg, self.coeffs.reshape(tuple(shape) + (self.alg.dim,)))

    # accessors --------------------------------------------------------

    @property
    def scalar(self):
        return self.coeffs[..., 0]

    def vector_coords(self) -> np.ndarray:
        """Coordinates of the grade-1 part, shape ``(..., n)``."""
        return self.coeffs[..., 1 << np.arange(self.alg.n)]

    def coefficient(self, *indices: int):
        mask, sign = _mask_from_indices(indices, self.alg.n)
        return sign * self.coeffs[..., mask]

    def grade(self, k: int) -> "Multivector":
        return grade_project(self, k)

    def grades_present(self, tol: float = 0.0) -> set:
        nz = np.abs(self.coeffs.reshape(-1, self.alg.dim)).max(axis=0) > tol
        return {int(g) for g in np.unique(self.alg.grades[nz])}

    def is_homogeneous(self, tol: float = 0.0) -> bool:
        return len(self.grades_present(tol)) <= 1

    def norm(self):
        """Euclidean coefficient norm, equal to sqrt(<A ~A>_0) in G_n."""
        return np.sqrt(np.sum(self.coeffs**2, axis=-1))

    def max_abs(self):
        return np.max(np.abs(self.coeffs), axis=-1)

    def inverse(self, eps: float = BLADE_EPS) -> "Multivector":
        return blade_inverse(self, eps)

    def allclose(self, other, rtol=1e-12, atol=1e-12) -> bool:
        other = _coerce(self.alg, other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=rtol, atol=atol))

    # arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = _coerce(self.alg, other)
        if other is NotImplemented:
            return NotImplemented
        return Multivector._wrap(self.alg, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(self.alg, other)
        if other is NotImplemented:
            return NotImplemented
        return Multivector._wrap(self.alg, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        other = _coerce(self.alg, other)
        if other is NotImplemented:
            return NotImplemented
        return Multivector._wrap(self.alg, other.coeffs - self.coeffs)

    def __neg__(self):
        return Multivector._wrap(self.alg, -self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if isinstance(other, (Real, np.ndarray)):
            return Multivector._wrap(self.alg, self.coeffs * np.asarray(other, dtype=float)[..., None])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (Real, np.ndarray)):
            return Multivector._wrap(self.alg, np.asarray(other, dtype=float)[..., None] * self.coeffs)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (Real, np.ndarray)):
            return Multivector._wrap(self.alg, self.coeffs / np.asarray(other, dtype=float)[..., None])
        if isinstance(other, Multivector):
            return geometric_product(self, blade_inverse(other))
        return NotImplemented

    def __xor__(self, other):
        other = _coerce(self.alg, other)
        if other is NotImplemented:
            return NotImplemented
        return outer_product(self, other)

    def __rxor__(self, other):
        other = _coerce(self.alg, other)
        if other is NotImplemented:
            return NotImplemented
        return outer_product(other, self)

    def __or__(self, other):
        other = _coerce(self.alg, other)
        if other is NotImplemented:
            return NotImplemented
        return inner_product(self, other)

    def __ror__(self, other):
        other = _coerce(self.alg, other)
        if other is NotImplemented:
            return NotImplemented
        return inner_product(other, self)

    def __invert__(self):
        return reverse(self)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.alg == other.alg and self.coeffs.shape == other.coeffs.shape and bool(
            np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None

    def __repr__(self):
        if self.shape:
            return f"Multivector(G{self.alg.n}, batch shape={self.shape})"
        from .notation import format_multivector

        return f"Multivector(G{self.alg.n}, {format_multivector(self)!r})"

    def __str__(self):
        if self.shape:
            return repr(self)
        from .notation import format_multivector

        return format_multivector(self)


def _coerce(alg: Algebra, value):
    if isinstance(value, Multivector):
        if value.alg != alg:
            raise SignatureMismatchError(f"G{alg.n} and G{value.alg.n} operands")
        return value
    if isinstance(value, (Real, np.ndarray)):
        return alg.scalar(value)
    return NotImplemented


def _check_pair(a: Multivector, b: Multivector) -> Algebra:
    if not isinstance(a, Multivector) or not isinstance(b, Multivector):
        raise TypeError("operands must be Multivector instances")
    if a.alg != b.alg:
        raise SignatureMismatchError(f"G{a.alg.n} and G{b.alg.n} operands")
    return a.alg


def _active(c: np.ndarray) -> np.ndarray:
    return np.flatnonzero(np.any(c.reshape(-1, c.shape[-1]) != 0, axis=0))


def _bilinear(a: Multivector, b: Multivector, table: np.ndarray) -> Multivector:
    alg = _check_pair(a, b)
    A, B = a.coeffs, b.coeffs
    shape = np.broadcast_shapes(A.shape[:-1], B.shape[:-1])
    out = np.zeros(shape + (alg.dim,))
    act_b = _active(B)
    if act_b.size:
        for i in _active(A):
            s = table[i, act_b]
            cols = act_b[s != 0]
            if cols.size == 0:
                continue
            # i ^ cols is injective in cols, so fancy-index += is safe
            out[..., i ^ cols] += A[..., i, None] * (B[..., cols] * s[s != 0])
    return Multivector._wrap(alg, out)


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    """Geometric (Clifford) product ``ab``."""
    return _bilinear(a, b, _tables(a.alg.n).gp)


def outer_product(a: Multivector, b: Multivector) -> Multivector:
    """Outer product, extended bilinearly over grades.

    On homogeneous parts of grades r and s it keeps ``<A_r B_s>_{r+s}``; a
    scalar factor (r = 0 or s = 0) multiplies through unchanged.
    """
    return _bilinear(a, b, _tables(a.alg.n).outer)


def inner_product(a: Multivector, b: Multivector) -> Multivector:
    """Inner product ``<A_r B_s>_{|r-s|}``, zero whenever r = 0 or s = 0."""
    return _bilinear(a, b, _tables(a.alg.n).inner)


def grade_project(a: Multivector, k: int) -> Multivector:
    """Grade-k part of ``a``; out-of-range k gives the zero multivector."""
    mask = a.alg.grades == k
    return Multivector._wrap(a.alg, a.coeffs * mask)


def reverse(a: Multivector) -> Multivector:
    """Reverse the factor order of every blade: sign (-1)^{k(k-1)/2} per grade."""
    return Multivector._wrap(a.alg, a.coeffs * _tables(a.alg.n).reverse)


def blade_inverse(b: Multivector, eps: float = BLADE_EPS) -> Multivector:
    """Inverse of a blade, ``~B / <B ~B>_0``.

    Raises :class:`SingularBladeError` when ``<B ~B>_0`` is below ``eps``
    after normalizing by the largest coefficient magnitude, and
    :class:`GradeError` when ``B`` mixes grades or ``B ~B`` is not
    (numerically) a scalar; either means ``B`` is not a blade.
    """
    rev = reverse(b)
    sq = geometric_product(b, rev)
    s = sq.coeffs[..., 0]
    scale = b.max_abs()
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(scale > 0, s / scale**2, 0.0)
    if np.any(~(rel > eps)):
        raise SingularBladeError("blade is zero or numerically singular")
    grades = _tables(b.alg.n).grades
    present = np.stack([np.max(np.abs(b.coeffs * (grades == k)), axis=-1) for k in range(b.alg.n + 1)], axis=-1)
    if np.any(np.sum(present > 1e-12 * scale[..., None], axis=-1) > 1):
        raise GradeError("argument is not a blade: mixed grades")
    rest = np.max(np.abs(sq.coeffs[..., 1:]), axis=-1) if b.alg.dim > 1 else 0.0
    if np.any(rest > 1e-8 * np.abs(s)):
        raise GradeError("argument is not a blade: B ~B has non-scalar part")
    return Multivector._wrap(b.alg, rev.coeffs / s[..., None])


def determinant(a: Multivector, alg: Optional[Algebra] = None):
    """Scalar ``<A_n I^{-1}>_0`` of an n-vector (so ``A_n = det(A_n) I``)."""
    alg = alg or a.alg
    if a.alg != alg:
        raise SignatureMismatchError(f"G{a.alg.n} value with G{alg.n} signature")
    off = a.coeffs[..., :-1]
    top = a.coeffs[..., -1]
    if np.any(np.abs(off) > 1e-12 * np.maximum(np.abs(top), 1.0)):
        raise GradeError(f"determinant needs a pure grade-{alg.n} argument")
    return geometric_product(a, alg.pseudoscalar_inverse()).coeffs[..., 0]


class EulerForm(NamedTuple):
    """``ab = magnitude * (cos(angle) + plane * sin(angle))``."""

    magnitude: float
    angle: float
    plane: Optional[Multivector]

    @property
    def plane_defined(self) -> bool:
        return self.plane is not None

    def reconstruct(self, alg: Algebra) -> Multivector:
        out = alg.scalar(self.magnitude * math.cos(self.angle))
        if self.plane is not None:
            out = out + self.plane * (self.magnitude * math.sin(self.angle))
        return out


def euler_decompose(a: Multivector, b: Multivector) -> EulerForm:
    """Polar form of the product of two vectors.

    Returns ``(|a||b|, theta, i)`` with ``i`` the unit bivector of the plane
    spanned by ``a`` and ``b``. For (anti)parallel vectors the plane is
    undefined and returned as ``None``.
    """
    alg = _check_pair(a, b)
    if a.shape or b.shape:
        raise ValueError("euler_decompose works on single vectors")
    for v in (a, b):
        if not v.is_homogeneous() or v.grades_present() - {1}:
            raise GradeError("euler_decompose needs grade-1 arguments")
    na, nb = float(a.norm()), float(b.norm())
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("zero vector has no direction")
    dot = float(inner_product(a, b).scalar)
    wedge = outer_product(a, b)
    wnorm = float(wedge.norm())
    mag = na * nb
    angle = math.atan2(wnorm, dot)
    if wnorm / mag < PARALLEL_EPS:
        return EulerForm(mag, 0.0 if dot > 0 else math.pi, None)
    return EulerForm(mag, angle, wedge / wnorm)
