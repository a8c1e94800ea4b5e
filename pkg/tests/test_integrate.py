import math

import numpy as np
import pytest

from geocalc import library as L
from geocalc.algebra import Algebra, Multivector
from geocalc.errors import IntegrandError
from geocalc.fields import FieldFn, identity_field
from geocalc.integrate import (
    CONVERGENCE_HEADER,
    DEFAULT_QUAD,
    boundary_integral,
    corollary_check,
    derivative_integral,
    directed_content,
    directed_integral,
    ftc_check,
)
from geocalc.polyfield import parse_poly_field
from geocalc.quadrature import QuadratureSpec, integrate_nodes, tree_sum

from oracles import gauss_legendre_3
from cases import SHIPPED

A2, A3 = Algebra(2), Algebra(3)


def test_reference_rule_matches_closed_form():
    x, w = QuadratureSpec("gauss_legendre", 3, 1).axis_rule(-1.0, 1.0)
    xo, wo = gauss_legendre_3()
    assert np.allclose(x, xo, atol=1e-15) and np.allclose(w, wo, atol=1e-15)


def test_node_count():
    q = QuadratureSpec("gauss_legendre", 4, 3)
    pts, w = q.nodes(L.unit_cube_patch().domain)
    assert len(w) == q.node_count(3) == 12**3
    assert math.isclose(w.sum(), 1.0, rel_tol=1e-14)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec("simpson", 3, 3)
    with pytest.raises(ValueError):
        QuadratureSpec("midpoint", 0, 3)


def test_directed_content_examples():
    assert directed_content(L.identity_patch(2)).value.allclose(A2.blade(1, 2), atol=1e-15)
    assert directed_content(L.identity_patch(3)).value.allclose(A3.pseudoscalar(), atol=1e-15)
    disk = directed_content(L.disk_polar_patch(radius=1.5)).value
    assert disk.allclose(A2.blade(1, 2) * (math.pi * 1.5**2), atol=1e-12)


def test_arc_integral_of_dx_is_endpoint_difference():
    r = directed_content(L.arc_patch(1.0, 0.0, math.pi)).value
    assert r.allclose(A2.vector([-2.0, 0.0]), atol=1e-13)


def test_boundary_integral_of_segment_is_exact():
    seg = L.segment_patch([0.0, 0.0], [1.0, 0.0])
    r = boundary_integral(None, seg, identity_field(A2))
    assert r.value == A2.blade(1)
    assert r.node_count == 2


def test_shear_field_boundary_integral_matches_circulation():
    # f = x1 e2 on the unit square: oint Q dy = area = 1; the induced
    # measure runs clockwise so the e12-free scalar part is -1
    f = parse_poly_field("x1*e2", 2)
    r = boundary_integral(None, L.identity_patch(2), f).value
    assert r.scalar == pytest.approx(-1.0, abs=1e-14)


@pytest.mark.parametrize("name, params", SHIPPED)
def test_corollary_on_shipped_patches(name, params):
    rep = corollary_check(L.make_patch(name, **params), QuadratureSpec("gauss_legendre", 8, 8))
    assert rep.norm < 1e-8


def test_corollary_on_shipped_complexes():
    assert corollary_check(L.split_square()).ok
    for cx in (L.circle_boundary(), L.sphere_boundary()):
        # closed surfaces: their own content is zero
        assert directed_content(cx).value.norm() < 1e-12


def test_linearity_in_f_and_g():
    rng = np.random.default_rng(4)
    p = L.figure2_patch()
    f1 = parse_poly_field("x1*e1 + x2*x3*e23", 3)
    f2 = parse_poly_field("x3^2 - e123", 3)
    g = parse_poly_field("1 + x2*e12", 3)
    a, b = rng.standard_normal(2)
    combo = FieldFn(f1.alg, lambda x: a * f1.values(x) + b * f2.values(x))
    lhs = directed_integral(g, p, combo).value
    rhs = directed_integral(g, p, f1).value * a + directed_integral(g, p, f2).value * b
    assert lhs.allclose(rhs, atol=1e-13)
    combo_g = FieldFn(g.alg, lambda x: a * g.values(x))
    assert directed_integral(combo_g, p, f1).value.allclose(directed_integral(g, p, f1).value * a, atol=1e-13)


def test_product_order_is_kept():
    p = L.identity_patch(2)
    g = FieldFn.constant_field(A2, A2.blade(1))
    left = directed_integral(g, p, None).value
    right = directed_integral(None, p, g).value
    assert left.allclose(A2.blade(1) * A2.blade(1, 2), atol=1e-14)
    assert right.allclose(A2.blade(1, 2) * A2.blade(1), atol=1e-14)
    assert left.allclose(-right, atol=1e-14)


@pytest.mark.parametrize("axis", [0, 1])
def test_axis_reversal_negates_content(axis):
    p = L.figure2_patch()
    a = directed_content(p).value
    b = directed_content(p.reversed_axis(axis)).value
    assert b.allclose(-a, atol=1e-14)


def test_nan_field_raises():
    bad = FieldFn(A2, lambda x: np.full(x.shape[:-1] + (4,), np.nan))
    with pytest.raises(IntegrandError):
        directed_integral(None, L.identity_patch(2), bad)


def test_error_estimate_present_when_asked():
    r = directed_content(L.figure2_patch(), estimate_error=True)
    assert r.est_error is not None and r.est_error < 1e-12


def test_ftc_constant_fields_reduce_to_corollary():
    rep = ftc_check(None, None, L.figure2_patch(), levels=1)
    assert rep.lhs == A3.zero()
    assert rep.rhs.norm() < 1e-12


def test_ftc_curve_is_endpoint_formula():
    f = parse_poly_field("x1^3*e1 + x1*x2 - x2^2*e12", 2)
    rep = ftc_check(None, f, L.parabola_patch(curvature=2.0), QuadratureSpec("gauss_legendre", 8, 8), levels=1)
    assert rep.abs_residual <= 1e-8
    assert rep.rhs.allclose(f([1.0, 2.0]) - f([0.0, 0.0]), atol=1e-14)


def test_ftc_figure2_identity_field():
    rep = ftc_check(None, identity_field(A3), L.figure2_patch(), QuadratureSpec("gauss_legendre", 8, 16), levels=1)
    assert rep.abs_residual <= 1e-6


def test_ftc_with_nonconstant_g_and_noncommuting_values():
    g = parse_poly_field("1 + x1*e12 - x3*e3", 3)
    f = parse_poly_field("x2*e1 + x1*x3*e23", 3)
    rep = ftc_check(g, f, L.sphere_octant_patch(), levels=2)
    assert rep.final().rel_residual <= 1e-10


def test_ftc_split_square_within_twice_single_patch():
    f = parse_poly_field("x1^2*x2*e1 + x2^3*e12", 2)
    quad = QuadratureSpec("gauss_legendre", 2, 2)
    single = ftc_check(None, f, L.identity_patch(2), quad, levels=1).abs_residual
    split = ftc_check(None, f, L.split_square(), quad, levels=1).abs_residual
    assert split <= 2 * single + 1e-14


def test_midpoint_rule_converges_at_second_order():
    f = parse_poly_field("x1^2*x2*e1 + x3^3*e2 - x1*x2*x3", 3)
    rep = ftc_check(None, f, L.figure2_patch(), QuadratureSpec("midpoint", 1, 4), levels=3)
    rel = [r.rel_residual for r in rep.table]
    assert rel[0] > 1e-4
    for a, b in zip(rel, rel[1:]):
        assert b <= a / 3
    assert rep.converged()


def test_convergence_csv_layout():
    rep = ftc_check(None, identity_field(A3), L.figure2_patch(), levels=3, scenario="fig2", timing=False)
    lines = rep.to_csv().strip().split("\n")
    assert lines[0].split(",") == CONVERGENCE_HEADER
    assert len(lines) == 4
    assert lines[1].startswith("fig2,2,3,8,8,")
    assert lines[3].split(",")[4] == "32"
    assert lines[1].endswith(",0.0")


def test_tree_sum_and_thread_independence():
    rng = np.random.default_rng(0)
    parts = [rng.standard_normal(8) for _ in range(37)]
    assert np.allclose(tree_sum(parts), np.sum(parts, axis=0), rtol=1e-14)
    nodes = rng.random((50000, 2))
    weights = rng.random(50000)

    def integrand(s):
        return np.stack([np.sin(s[:, 0]), s[:, 1] ** 2], axis=-1)

    one = integrate_nodes(integrand, nodes, weights, threads=1)
    four = integrate_nodes(integrand, nodes, weights, threads=4)
    assert np.array_equal(one, four)


def test_ftc_bit_identical_across_threads():
    f = parse_poly_field("x1*x2*e1 + x3^2*e13", 3)
    quad = QuadratureSpec("gauss_legendre", 4, 8)
    a = ftc_check(None, f, L.unit_cube_patch(), quad, levels=1, threads=1)
    b = ftc_check(None, f, L.unit_cube_patch(), quad, levels=1, threads=3)
    assert np.array_equal(a.lhs.coeffs, b.lhs.coeffs) and np.array_equal(a.rhs.coeffs, b.rhs.coeffs)


def test_derivative_integral_matches_boundary_for_fd_patch():
    f = parse_poly_field("x1^2*e2 + x2*x3", 3)
    p = L.figure2_patch().without_jacobian()
    lhs = derivative_integral(None, p, f, fd=True).value
    rhs = boundary_integral(None, p, f, fd=True).value
    assert lhs.allclose(rhs, atol=1e-8)
