"""Fourth-order finite-difference stencils shared by patches and fields."""

import numpy as np

#: eps**(1/5): balances O(h^4) truncation against O(eps/h) roundoff.
FD_SCALE = np.finfo(float).eps ** 0.2

_CENTRAL = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))
_FORWARD = ((0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0))


def central_derivative(func, x, direction, h):
    """d/dt func(x + t*direction) at t=0.

    ``h`` broadcasts against ``x[..., 0]``; ``func`` maps points of shape
    ``x.shape`` to arrays with the same leading shape.
    """
    h = np.asarray(h, dtype=float)
    step = h[..., None] * direction
    acc = None
    for k, w in _CENTRAL:
        term = w * np.asarray(func(x + k * step))
        acc = term if acc is None else acc + term
    return acc / (12.0 * h.reshape(h.shape + (1,) * (acc.ndim - h.ndim)))


def one_sided_weights(kind):
    """(offset, weight) pairs for ``'central'``, ``'forward'`` or ``'backward'``."""
    if kind == "central":
        return _CENTRAL
    if kind == "forward":
        return _FORWARD
    if kind == "backward":
        return tuple((-k, -w) for k, w in _FORWARD)
    raise ValueError(kind)
