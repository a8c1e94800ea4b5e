import numpy as np
import pytest

from geocalc.algebra import Algebra
from geocalc.errors import MultivectorSyntaxError
from geocalc.polyfield import parse_poly_field, parse_polynomial

A2, A3 = Algebra(2), Algebra(3)


def test_evaluation_examples():
    f = parse_poly_field("x1^2*e1 - 3*x2*e12", 2)
    v = f([1.0, 1.0])
    assert v == A2.parse("e1 - 3*e12")
    g = parse_poly_field("x1*e1 + x2*e2", 2)
    assert g([3.0, 4.0]) == A2.vector([3.0, 4.0])


def test_factor_order_is_geometric():
    f = parse_poly_field("e2*e1", 2)
    assert f([0.3, 0.1]) == -A2.blade(1, 2)
    h = parse_poly_field("2*(x1 + x2)*e3", 3)
    assert h([1.0, 2.0, 5.0]) == A3.blade(3) * 6.0


def test_batched_evaluation():
    f = parse_poly_field("x1*x2 + x3^3*e23", 3)
    x = np.random.default_rng(0).standard_normal((4, 5, 3))
    out = f(x)
    assert out.shape == (4, 5)
    assert np.allclose(out.scalar, x[..., 0] * x[..., 1])
    assert np.allclose(out.coefficient(2, 3), x[..., 2] ** 3)


def test_analytic_derivative_matches_finite_differences():
    f = parse_poly_field("x1^2*e12 + x1*x2^3 - 4*x2*e1", 2)
    x = np.array([[0.7, -1.3], [2.0, 0.5]])
    exact = f.partial_derivatives(x)
    fd = f.without_derivative().partial_derivatives(x, fd=True)
    assert np.max(np.abs(exact - fd)) < 1e-9


def test_derivative_of_polynomial():
    p = parse_polynomial("x1^3*x2 + 5", 2).derivative(0)
    q = parse_polynomial("3*x1^2*x2", 2)
    assert p.terms == q.terms


@pytest.mark.parametrize(
    "text, pos",
    [
        ("x3*e1", 0),
        ("x1*e13", 3),
        ("x1^-2", 3),
        ("((x1))", 1),
        ("x1 +", 4),
        ("x1 $ 2", 3),
        ("(x1 + 2", 0),
    ],
)
def test_errors_report_position(text, pos):
    with pytest.raises(MultivectorSyntaxError) as info:
        parse_poly_field(text, 2)
    assert info.value.position == pos
