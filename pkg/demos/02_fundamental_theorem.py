"""The fundamental theorem on a curved surface patch.

Builds the graph patch (s1, s2, (1 - sin(s1^2))/2 - 3 s2), looks at its
frames, and compares the two sides of the theorem for a noncommuting pair
of fields under refinement.
"""

from geocalc import library as L
from geocalc.integrate import corollary_check, directed_content, ftc_check
from geocalc.quadrature import QuadratureSpec
from geocalc.notation import format_multivector
from geocalc.patches import frame_divergence, tangent_frame
from geocalc.polyfield import parse_poly_field

patch = L.figure2_patch()
frame = tangent_frame(patch, [0.0, 0.0])
print("tangents at s=0:\n", frame.tangents.vector_coords())
print("reciprocals at s=0:\n", frame.reciprocals.vector_coords())
print("frame divergence at s=(0.4, 0.6):", frame_divergence(patch, [0.4, 0.6]).max_abs())

content = directed_content(patch).value
print("directed content:", format_multivector(content))
print("content of the boundary:", corollary_check(patch).norm)

g = parse_poly_field("1 + x1*e12 - x3*e3", 3)
f = parse_poly_field("x2*e1 + x1*x3*e23", 3)
rep = ftc_check(g, f, patch, QuadratureSpec("gauss_legendre", 8, 4), levels=3)
print("interior side:", format_multivector(rep.lhs))
print("boundary side:", format_multivector(rep.rhs))
print(rep.to_csv())

# the midpoint rule makes the h^2 convergence visible
rep = ftc_check(None, parse_poly_field("x1^2*x2*e1 + x3^3*e2", 3), patch, QuadratureSpec("midpoint", 1, 4), levels=4)
for row in rep.table:
    print(f"m={row.m:3d}  rel residual {row.rel_residual:.3e}")
