import numpy as np
import pytest

from geocalc import library as L
from geocalc.algebra import Algebra, Multivector
from geocalc.derivatives import (
    DEFAULT_SEED,
    cauchy_kernel_derivative_norm,
    flat_vector_derivative,
    identity_suite,
    two_sided_derivative,
)
from geocalc.fields import identity_field, log_norm_field, norm_power_field, radial_field
from geocalc.patches import tangent_frame
from geocalc.polyfield import parse_poly_field

A2, A3 = Algebra(2), Algebra(3)


def test_constants_have_zero_derivative():
    r = two_sided_derivative(None, None, L.figure2_patch(), [0.3, 0.6])
    assert r.value == A3.zero()


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_derivative_of_x_is_n(n):
    alg = Algebra(n)
    r = two_sided_derivative(None, identity_field(alg), L.identity_patch(n), np.full(n, 0.4))
    assert r.value.allclose(alg.scalar(float(n)), atol=1e-12)


def test_two_sided_x_d_x_is_four_x():
    # sum_i (e_i e^i x + x e^i e_i) = 2x + 2x in the plane
    f = identity_field(A2)
    for s in ([0.2, 0.7], [0.9, 0.1]):
        r = two_sided_derivative(f, f, L.identity_patch(2), s)
        assert r.value.allclose(A2.vector(s) * 4.0, atol=1e-12)
        fd = two_sided_derivative(f.without_derivative(), f.without_derivative(), L.identity_patch(2), s, fd=True)
        assert fd.value.allclose(A2.vector(s) * 4.0, atol=1e-9)


def test_flat_derivative_examples():
    x = np.array([0.4, -1.1, 0.7])
    X = A3.vector(x)
    assert flat_vector_derivative(identity_field(A3), x).allclose(A3.scalar(3.0))
    assert flat_vector_derivative(norm_power_field(A3, 2), x).allclose(X * 2.0)
    assert flat_vector_derivative(log_norm_field(A3), x).allclose(X.inverse())
    assert flat_vector_derivative(norm_power_field(A3, 1), [1.0, 0.0, 0.0]).allclose(A3.blade(1))


def test_left_action_of_basis_vectors():
    # f = x1 e2 gives e1 e2, not e2 e1
    f = parse_poly_field("x1*e2", 2)
    assert flat_vector_derivative(f, [0.3, 0.3]) == A2.blade(1, 2)


def _frozen_frame_oracle(g, f, patch, s, h=1e-4):
    """sum_i d/ds^i [g(x(s)) x^i(s0) f(x(s))] by a plain 2nd-order difference."""
    alg = patch.algebra
    fr = tangent_frame(patch, s)
    total = alg.zero()
    for i in range(patch.k):
        e = np.zeros(patch.k)
        e[i] = h
        vals = []
        for sp in (s + e, s - e):
            x = patch(sp)
            vals.append(g(x) * fr.reciprocal(i) * f(x))
        total = total + (vals[0] - vals[1]) / (2 * h)
    return total


@pytest.mark.parametrize("name", ["figure2", "sphere_octant", "disk_polar", "unit_cube", "parabola"])
def test_frozen_frame_semantics_and_leibniz_split(name):
    patch = L.make_patch(name)
    alg = patch.algebra
    n = alg.n
    g = parse_poly_field("1 + x1*e12" if n >= 2 else "1 + x1", n)
    f = parse_poly_field("x1*x2*e1 - x2^2 + 3*e2" if n >= 2 else "x1^2", n)
    rng = np.random.default_rng(3)
    lo, hi = patch.domain.lower, patch.domain.upper
    for s in lo + (hi - lo) * (0.2 + 0.6 * rng.random((5, patch.k))):
        both = two_sided_derivative(g, f, patch, s).value
        assert both.allclose(_frozen_frame_oracle(g, f, patch, s), atol=1e-6)
        # g dotted only plus f dotted only
        fr = tangent_frame(patch, s)
        x = patch(s)
        T = fr.tangents.vector_coords()
        split = alg.zero()
        for i in range(patch.k):
            dg = Multivector(alg, g.directional(x, T[i]))
            df = Multivector(alg, f.directional(x, T[i]))
            split = split + dg * fr.reciprocal(i) * f(x) + g(x) * fr.reciprocal(i) * df
        assert both.allclose(split, atol=1e-6)
        assert both.allclose(two_sided_derivative(g, f, patch, s, fd=True).value, atol=1e-6)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_chain_rule_matches_flat_derivative(n):
    alg = Algebra(n)
    rng = np.random.default_rng(n)
    s = rng.uniform(0.05, 0.95, (100, n))
    terms = " + ".join(f"x{j}^2*e{j}" for j in range(1, n + 1)) + " - x1*x2"
    f = parse_poly_field(terms, n)
    patch = L.identity_patch(n)
    two = two_sided_derivative(None, f.without_derivative(), patch, s, fd=True).value
    flat = flat_vector_derivative(f, s)
    assert np.max(np.abs(two.coeffs - flat.coeffs)) < 1e-8


def test_fd_matches_analytic_partials():
    alg = Algebra(3)
    x = np.random.default_rng(8).uniform(0.5, 1.5, (50, 3))
    for f in (norm_power_field(alg, 3), radial_field(alg, 3), log_norm_field(alg), parse_poly_field("x1^3*x2*e13", 3)):
        exact = f.partial_derivatives(x)
        approx = f.partial_derivatives(x, fd=True)
        # 4th-order stencil with h ~ 7e-4 * |x|: truncation ~1e-12, roundoff ~1e-12
        assert np.max(np.abs(exact - approx)) < 1e-8 * max(1.0, np.max(np.abs(exact)))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_identity_suite_fd(n):
    rep = identity_suite(n, trials=400, seed=DEFAULT_SEED, method="fd")
    assert [r.formula_id for r in rep.results] == ["1", "2", "3", "4", "5", "6", "7"]
    assert rep.passed(1e-6), rep.to_csv()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_identity_suite_analytic(n):
    rep = identity_suite(n, trials=400, method="analytic")
    assert rep.passed(1e-12), rep.to_csv()


def test_identity_suite_csv_and_determinism():
    a = identity_suite(3, trials=50, seed=7).to_csv()
    b = identity_suite(3, trials=50, seed=7).to_csv()
    assert a == b
    lines = a.strip().split("\n")
    assert lines[0] == "formula_id,trials,max_rel_err,mean_rel_err"
    assert len(lines) == 8


def test_cauchy_kernel_is_monogenic():
    pts = np.random.default_rng(0).uniform(0.3, 1.0, (20, 3))
    assert np.max(cauchy_kernel_derivative_norm(3, pts, fd=False)) < 1e-12
    assert np.max(cauchy_kernel_derivative_norm(3, pts, fd=True)) < 1e-6


def test_identity_suite_rejects_bad_method():
    with pytest.raises(ValueError):
        identity_suite(3, method="symbolic")
