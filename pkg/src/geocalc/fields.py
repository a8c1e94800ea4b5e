"""Multivector-valued fields on open subsets of R^n."""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from ._fd import FD_SCALE, central_derivative
from .algebra import Algebra, Multivector
from .errors import IntegrandError


def _as_coeffs(value, alg: Algebra, shape) -> np.ndarray:
    if isinstance(value, Multivector):
        c = value.coeffs
    else:
        c = np.asarray(value, dtype=float)
    if c.shape[-1:] != (alg.dim,):
        raise ValueError(f"field returned shape {c.shape}, expected trailing axis {alg.dim}")
    return np.broadcast_to(c, tuple(shape) + (alg.dim,))


class FieldFn:
    """A field ``f: R^n -> G_n`` evaluated on batches of points.

    Parameters
    ----------
    alg : Algebra
        Target algebra; ``alg.n`` is the ambient dimension.
    func : callable
        Maps points of shape ``(..., n)`` to coefficients ``(..., 2**n)``
        (or to a batched :class:`Multivector`).
    partials : callable, optional
        Analytic partial derivatives, points ``(..., n)`` to an array of
        shape ``(..., n, 2**n)`` whose entry ``[..., j, :]`` is
        ``df/dx^{j+1}``. Without it, derivatives use 4th-order central
        differences with step ``eps**(1/5) * max(1, |x|)``.
    singularity : array_like, optional
        Point where the field is singular; sampling code keeps away from it.
    smoothness : int
        Declared differentiability class. A contract, not checked.

    The field is assumed defined on an open set containing wherever it is
    evaluated, so difference stencils may step slightly off a patch.
    """

    def __init__(
        self,
        alg: Algebra,
        func: Callable,
        partials: Optional[Callable] = None,
        name: str = "field",
        singularity=None,
        smoothness: int = 1,
        constant: Optional[Multivector] = None,
    ):
        self.alg = alg
        self.func = func
        self.partials_func = partials
        self.name = name
        self.singularity = None if singularity is None else np.asarray(singularity, dtype=float)
        self.smoothness = smoothness
        self.constant = constant

    def __repr__(self):
        return f"FieldFn({self.name!r}, G{self.alg.n})"

    @property
    def ambient_dim(self) -> int:
        return self.alg.n

    @property
    def has_analytic_derivative(self) -> bool:
        return self.partials_func is not None

    # evaluation -------------------------------------------------------

    def values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.constant is not None:
            return np.broadcast_to(self.constant.coeffs, x.shape[:-1] + (self.alg.dim,))
        out = _as_coeffs(self.func(x), self.alg, x.shape[:-1])
        if not np.all(np.isfinite(out)):
            raise IntegrandError(f"field {self.name!r} produced non-finite values")
        return out

    def __call__(self, x) -> Multivector:
        return Multivector(self.alg, self.values(x))

    def partial_derivatives(self, x, fd: bool = False) -> np.ndarray:
        """``df/dx^j`` for every coordinate, shape ``(..., n, 2**n)``."""
        x = np.asarray(x, dtype=float)
        n = self.alg.n
        if self.constant is not None:
            return np.zeros(x.shape[:-1] + (n, self.alg.dim))
        if self.partials_func is not None and not fd:
            return np.broadcast_to(np.asarray(self.partials_func(x), dtype=float), x.shape[:-1] + (n, self.alg.dim))
        h = FD_SCALE * np.maximum(1.0, np.linalg.norm(x, axis=-1))
        cols = [central_derivative(self.values, x, np.eye(n)[j], h) for j in range(n)]
        return np.stack(cols, axis=-2)

    def directional(self, x, v, fd: bool = False) -> np.ndarray:
        """``(v . grad) f`` at ``x`` for direction(s) ``v`` of shape ``(..., n)``."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.constant is not None:
            return np.zeros(np.broadcast_shapes(x.shape, v.shape)[:-1] + (self.alg.dim,))
        if self.partials_func is not None and not fd:
            return np.einsum("...j,...jk->...k", v, self.partial_derivatives(x))
        x, v = np.broadcast_arrays(x, v)
        vn = np.linalg.norm(v, axis=-1)
        safe = np.where(vn > 0, vn, 1.0)
        h = FD_SCALE * np.maximum(1.0, np.linalg.norm(x, axis=-1)) / safe
        return central_derivative(self.values, x, v, h)

    # combinators ------------------------------------------------------

    @classmethod
    def constant_field(cls, alg: Algebra, value=1.0, name=None) -> "FieldFn":
        mv = value if isinstance(value, Multivector) else alg.scalar(value)
        return cls(alg, None, name=name or f"constant({mv})", constant=mv, smoothness=math.inf)

    @classmethod
    def from_pointwise(cls, alg: Algebra, func: Callable, name="pointwise") -> "FieldFn":
        """Wrap a function of a single point (slow; loops in Python)."""

        def batched(x):
            flat = x.reshape(-1, alg.n)
            rows = [_as_coeffs(func(p), alg, ()) for p in flat]
            return np.asarray(rows).reshape(x.shape[:-1] + (alg.dim,))

        return cls(alg, batched, name=name)

    def without_derivative(self) -> "FieldFn":
        """Same field with the analytic derivative hidden (forces FD)."""
        return FieldFn(self.alg, self.func, None, self.name + "[fd]", self.singularity, self.smoothness, self.constant)


def as_field(obj, alg: Algebra) -> FieldFn:
    """Coerce ``None``, a number, a multivector or a callable to a FieldFn."""
    if obj is None:
        return FieldFn.constant_field(alg, 1.0, name="1")
    if isinstance(obj, FieldFn):
        if obj.alg != alg:
            from .errors import SignatureMismatchError

            raise SignatureMismatchError(f"field {obj.name!r} lives in G{obj.alg.n}, patch in R^{alg.n}")
        return obj
    if isinstance(obj, (int, float, Multivector)):
        return FieldFn.constant_field(alg, obj)
    if callable(obj):
        return FieldFn(alg, obj)
    raise TypeError(f"cannot use {obj!r} as a field")


# builtin fields -------------------------------------------------------


def _vec_coeffs(alg, x):
    c = np.zeros(x.shape[:-1] + (alg.dim,))
    c[..., 1 << np.arange(alg.n)] = x
    return c


def _vector_jacobian(alg, jac):
    """Partials of a vector field from its Jacobian ``jac[..., j, i] = d f_i / d x_j``."""
    out = np.zeros(jac.shape[:-1] + (alg.dim,))
    out[..., 1 << np.arange(alg.n)] = jac
    return out


def identity_field(alg: Algebra) -> FieldFn:
    """f(x) = x."""
    eye = np.eye(alg.n)
    return FieldFn(
        alg,
        lambda x: _vec_coeffs(alg, x),
        lambda x: np.broadcast_to(_vector_jacobian(alg, eye), x.shape[:-1] + (alg.n, alg.dim)),
        name="identity_vector",
        smoothness=math.inf,
    )


def linear_field(alg: Algebra, matrix) -> FieldFn:
    """f(x) = A x as a vector field."""
    A = np.asarray(matrix, dtype=float)
    if A.shape != (alg.n, alg.n):
        raise ValueError(f"matrix must be {alg.n}x{alg.n}")
    return FieldFn(
        alg,
        lambda x: _vec_coeffs(alg, x @ A.T),
        lambda x: np.broadcast_to(_vector_jacobian(alg, A.T), x.shape[:-1] + (alg.n, alg.dim)),
        name="linear_vector",
        smoothness=math.inf,
    )


def scalar_field(alg: Algebra, func, grad=None, name="scalar") -> FieldFn:
    """Wrap a scalar function ``phi(x)`` (and optionally its gradient)."""

    def values(x):
        c = np.zeros(x.shape[:-1] + (alg.dim,))
        c[..., 0] = func(x)
        return c

    partials = None
    if grad is not None:

        def partials(x):
            out = np.zeros(x.shape[:-1] + (alg.n, alg.dim))
            out[..., 0] = grad(x)
            return out

    return FieldFn(alg, values, partials, name=name)


def norm_power_field(alg: Algebra, k: float) -> FieldFn:
    """phi(x) = |x|^k; k = 2 gives x^2 and k = 1 gives |x|."""

    def phi(x):
        return np.linalg.norm(x, axis=-1) ** k

    def grad(x):
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        return k * r ** (k - 2) * x

    return scalar_field(alg, phi, grad, name=f"norm_power({k})")


def log_norm_field(alg: Algebra) -> FieldFn:
    """phi(x) = log|x|."""
    return scalar_field(
        alg,
        lambda x: np.log(np.linalg.norm(x, axis=-1)),
        lambda x: x / np.sum(x * x, axis=-1, keepdims=True),
        name="log_norm",
    )


def radial_field(alg: Algebra, k: float, center=None) -> FieldFn:
    """f(x) = (x - c)/|x - c|^k; with k = n this is the Cauchy kernel."""
    c0 = np.zeros(alg.n) if center is None else np.asarray(center, dtype=float)

    def values(x):
        y = x - c0
        r = np.linalg.norm(y, axis=-1, keepdims=True)
        return _vec_coeffs(alg, y / r**k)

    def partials(x):
        y = x - c0
        r = np.linalg.norm(y, axis=-1, keepdims=True)[..., None]
        eye = np.eye(alg.n)
        # d/dx_j (y_i r^-k) = delta_ij r^-k - k y_i y_j r^-(k+2)
        jac = eye / r**k - k * y[..., :, None] * y[..., None, :] / r ** (k + 2)
        return _vector_jacobian(alg, jac)

    return FieldFn(alg, values, partials, name=f"radial({k})", singularity=c0)


def rotation_field(alg: Algebra, omega: float = 1.0) -> FieldFn:
    """f(x) = omega * (-x2, x1, 0, ...): rigid rotation in the e12 plane."""
    if alg.n < 2:
        raise ValueError("rotation field needs n >= 2")
    A = np.zeros((alg.n, alg.n))
    A[0, 1], A[1, 0] = -omega, omega
    f = linear_field(alg, A)
    f.name = "rotation"
    return f


def complex_field(alg: Algebra, func, derivative, name="complex") -> FieldFn:
    """Monogenic field in G_2 built from a holomorphic function.

    The point ``x = x1 e1 + x2 e2`` is identified with ``z = x1 + i x2`` and
    ``w = u + i v`` with the multivector ``u + v e12``. With this choice the
    vector derivative ``e1 d1 f + e2 d2 f`` equals
    ``e1 (u_x - v_y) + e2 (u_y + v_x)``, which vanishes exactly when the
    Cauchy-Riemann equations hold, so every holomorphic ``func`` gives a
    monogenic field. ``derivative`` is ``func'`` and supplies the analytic
    partials (``df/dx1 ~ f'(z)``, ``df/dx2 ~ i f'(z)``).
    """
    if alg.n != 2:
        raise ValueError("complex fields live in G_2")

    def to_mv(w):
        c = np.zeros(w.shape + (4,))
        c[..., 0] = w.real
        c[..., 3] = w.imag
        return c

    def values(x):
        return to_mv(np.asarray(func(x[..., 0] + 1j * x[..., 1]), dtype=complex))

    def partials(x):
        d = np.asarray(derivative(x[..., 0] + 1j * x[..., 1]), dtype=complex)
        return np.stack([to_mv(d), to_mv(1j * d)], axis=-2)

    return FieldFn(alg, values, partials, name=name, smoothness=math.inf)


def cauchy_kernel(alg: Algebra, source) -> FieldFn:
    """K(y) = (y - source)/|y - source|^n, monogenic for y != source."""
    f = radial_field(alg, alg.n, center=source)
    f.name = "cauchy_kernel"
    return f
