"""A tour of the multivector algebra.

Run with ``python demos/01_algebra.py``.
"""

import numpy as np

from geocalc import Algebra
from geocalc.algebra import blade_inverse, euler_decompose
from geocalc.notation import format_multivector

G3 = Algebra(3)
e1, e2, e3 = G3.blade(1), G3.blade(2), G3.blade(3)

# vectors anticommute, so their product splits into a symmetric scalar part
# and an antisymmetric bivector part
a = G3.vector([1.0, 1.0, 0.0])
b = G3.vector([0.0, 1.0, 1.0])
print("a b       =", format_multivector(a * b))
print("a . b     =", format_multivector(a | b))
print("a ^ b     =", format_multivector(a ^ b))

# the same product as magnitude times exp(plane * angle)
f = euler_decompose(a, b)
print(f"|a||b| = {f.magnitude:.4f}, angle = {np.degrees(f.angle):.1f} deg, plane = {format_multivector(f.plane)}")

# the pseudoscalar squares to -1 in three dimensions and turns bivectors
# into their normal vectors
I = G3.pseudoscalar()
print("I I       =", format_multivector(I * I))
print("I^-1 e12  =", format_multivector(G3.pseudoscalar_inverse() * (e1 ^ e2)))

# blades have inverses; mixed-grade elements are rejected
B = (e1 + e2) ^ e3 * 2.0
print("B B^-1    =", format_multivector(B * blade_inverse(B)))

# everything broadcasts over batch axes
rng = np.random.default_rng(0)
many = G3.vector(rng.standard_normal((4, 3)))
print("batch of |v|^2:", (many * many).scalar)
