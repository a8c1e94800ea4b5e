"""Independent reference implementations used to freeze expected values.

Nothing here imports geocalc: each oracle works from first principles so
that agreement is evidence rather than tautology.
"""

import math
from fractions import Fraction


def blade_product_by_sorting(a, b):
    """Product of two basis blades given as ascending index lists.

    Concatenates the factor lists, bubble-sorts them counting swaps and
    cancels equal neighbours (e_i e_i = 1). Returns ``(sign, indices)``.
    """
    factors = list(a) + list(b)
    swaps = 0
    changed = True
    while changed:
        changed = False
        for i in range(len(factors) - 1):
            if factors[i] > factors[i + 1]:
                factors[i], factors[i + 1] = factors[i + 1], factors[i]
                swaps += 1
                changed = True
    out = []
    for f in factors:
        if out and out[-1] == f:
            out.pop()
        else:
            out.append(f)
    return (-1) ** swaps, out


def mask_to_indices(mask):
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


def indices_to_mask(indices):
    m = 0
    for i in indices:
        m |= 1 << (i - 1)
    return m


def dense_product(n, x, y):
    """Geometric product of two coefficient lists via the sorting oracle."""
    out = [0.0] * (1 << n)
    for i, xi in enumerate(x):
        if xi == 0:
            continue
        for j, yj in enumerate(y):
            if yj == 0:
                continue
            s, idx = blade_product_by_sorting(mask_to_indices(i), mask_to_indices(j))
            out[indices_to_mask(idx)] += s * xi * yj
    return out


def gamma_half_integer(twice_x):
    """Gamma(x) for x = twice_x / 2 via the recurrences Gamma(x+1) = x Gamma(x).

    Integer arguments end at Gamma(1) = 1, half integers at
    Gamma(1/2) = sqrt(pi). Returns ``(rational factor, uses_sqrt_pi)``.
    """
    x = Fraction(twice_x, 2)
    acc = Fraction(1)
    while x > 1:
        x -= 1
        acc *= x
    return acc, x == Fraction(1, 2)


def sphere_area(n):
    """Omega_n = 2 pi^(n/2) / Gamma(n/2) without math.gamma."""
    g, half = gamma_half_integer(n)
    value = 2 * math.pi ** (n / 2) / float(g)
    return value / math.sqrt(math.pi) if half else value


def gauss_legendre_3():
    """Closed-form 3-point Gauss-Legendre rule on [-1, 1]."""
    r = math.sqrt(3 / 5)
    return [-r, 0.0, r], [5 / 9, 8 / 9, 5 / 9]
