"""Numerical geometric calculus in Euclidean geometric algebra.

Multivectors in G_n, directed integrals over parametrized k-patches, the
fundamental theorem of calculus and its classical special cases, and
interior reconstruction of monogenic fields.
"""

from .algebra import (
    Algebra,
    EulerForm,
    Multivector,
    blade_inverse,
    determinant,
    euler_decompose,
    geometric_product,
    grade_project,
    inner_product,
    outer_product,
    reverse,
)
from .classical import (
    cross_product,
    gauss_divergence_check,
    greens_theorem_check,
    path_independence_check,
    stokes_theorem_check,
)
from .derivatives import flat_vector_derivative, identity_suite, two_sided_derivative
from .errors import GeocalcError
from .fields import FieldFn, as_field
from .integrate import (
    boundary_integral,
    corollary_check,
    derivative_integral,
    directed_content,
    directed_integral,
    ftc_check,
)
from .monogenic import (
    CauchyKernel,
    cauchy_reconstruct,
    full_cauchy_formula,
    monogenicity_certificate,
    omega,
)
from .notation import format_multivector, parse_multivector
from .patches import KRectangle, PatchComplex, PatchMap, boundary_complex, glue_patches, tangent_frame
from .polyfield import parse_poly_field
from .quadrature import QuadratureSpec
from .scenario import Scenario, parse_scenario, print_scenario, run_scenario

__version__ = "0.1.0"
