"""Driving checks from scenario documents, as the command line tool does."""

from geocalc.scenario import parse_scenario, print_scenario, run_scenario

doc = """
name: stokes_sphere_cap
check: stokes
patch: {key: sphere_octant, radius: 1.0}
f: "x3*e1 - x1*x2*e2 + x2^2*e3"
quadrature: {points_per_axis: 8, subdivisions_per_axis: 4}
"""

scenario = parse_scenario(doc)
print(print_scenario(scenario))
result = run_scenario(scenario, write=False, timing=False)
print("\n".join(result.summary))
print(result.csv)
print("exit status", result.exit_status)
