"""Green, Stokes and Gauss as grade parts of one identity."""

import math

from geocalc import library as L
from geocalc.algebra import Algebra
from geocalc.classical import (
    gauss_divergence_check,
    greens_theorem_check,
    path_independence_check,
    stokes_theorem_check,
)
from geocalc.fields import identity_field
from geocalc.polyfield import parse_poly_field

# Green on the unit disk: the curl of (-y, x) is 2, so both sides are 2 pi
green = greens_theorem_check(parse_poly_field("-x2*e1 + x1*e2", 2), L.disk_polar_patch(), oracle=2 * math.pi)
for rep in green.reports():
    print(rep.summary())

# Stokes: the same rotation in R^3 has curl 2 e3; its flux through the graph
# patch is 2 whatever the height function
print(stokes_theorem_check(parse_poly_field("-x2*e1 + x1*e2", 3), L.figure2_patch(), oracle=2.0).summary())

# Gauss: div x = 3 on the unit cube
print(gauss_divergence_check(identity_field(Algebra(3)), L.unit_cube_patch(), oracle=3.0).summary())

# path independence: a segment and a quarter circle between (1,0) and (0,1)
curves = [L.segment_patch([1, 0], [0, 1]), L.arc_patch(1.0, 0.0, math.pi / 2)]
for rep in path_independence_check(None, parse_poly_field("x1^2*x2 + x2*e12", 2), curves):
    print(rep.summary(), "spread", rep.extra["spread"])
