"""Monogenic fields and reconstruction from boundary values."""

from geocalc import library as L
from geocalc.algebra import Algebra
from geocalc.fields import identity_field
from geocalc.quadrature import QuadratureSpec
from geocalc.monogenic import (
    SampleBox,
    full_cauchy_formula,
    monogenicity_certificate,
    omega,
    reconstruction_csv,
    reconstruction_report,
)

print("unit sphere areas:", [round(omega(n), 6) for n in range(1, 7)])

# z -> z^2 becomes u + v e12 in G_2; the vector derivative vanishes exactly
# when the Cauchy-Riemann equations hold
z2 = L.make_field("complex_power", 2, power=2)
box = SampleBox((-1.0, -1.0), (1.0, 1.0))
print(monogenicity_certificate(z2, box).summary())
print(monogenicity_certificate(identity_field(Algebra(2)), box).summary())

quad = QuadratureSpec("gauss_legendre", 16, 32)
circle = L.circle_boundary()
rows = [reconstruction_report(z2, circle, p, quad, scenario="z^2") for p in ([0, 0], [0.3, 0.1], [-0.4, 0.2])]
print(reconstruction_csv(rows))

# a field that is not monogenic needs the volume term as well
res = full_cauchy_formula(identity_field(Algebra(2)), L.disk_polar_patch(), [0.3, -0.2], QuadratureSpec("gauss_legendre", 8, 16))
print("full formula for f = x at (0.3, -0.2):", res.value, "error", res.abs_err, "excluded radius", res.excluded_radius)
