"""Acceptance criteria 1-9, each at its stated tolerance.

Every criterion records one ``criterion N: PASS|FAIL ...`` line. Under
pytest the lines are printed in the terminal summary; running this file
directly (``python tests/test_acceptance.py``) prints them as they finish.
"""

import math
import os
import sys
import tempfile
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from geocalc import library as L  # noqa: E402
from geocalc.algebra import Algebra, Multivector  # noqa: E402
from geocalc.classical import gauss_divergence_check, greens_theorem_check, stokes_theorem_check  # noqa: E402
from geocalc.derivatives import DEFAULT_SEED, cauchy_kernel_derivative_norm, identity_suite  # noqa: E402
from geocalc.fields import FieldFn, identity_field  # noqa: E402
from geocalc.integrate import corollary_check, ftc_check  # noqa: E402
from geocalc.monogenic import cauchy_reconstruct, full_cauchy_formula, reconstruction_report  # noqa: E402
from geocalc.patches import frame_divergence, tangent_frame  # noqa: E402
from geocalc.polyfield import parse_poly_field  # noqa: E402
from geocalc.quadrature import QuadratureSpec  # noqa: E402
from geocalc.scenario import load_scenario, run_scenario  # noqa: E402

from cases import SHIPPED, interior_points, twisted_solid  # noqa: E402
from oracles import blade_product_by_sorting, indices_to_mask, mask_to_indices  # noqa: E402

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")
GL = "gauss_legendre"

RESULTS = {}


def _rel(x, y):
    scale = max(1.0, float(np.max(np.abs(y.coeffs))))
    return float(np.max(np.abs(x.coeffs - y.coeffs))) / scale


# ---------------------------------------------------------------------


def criterion_1():
    """Basis-blade products match the sorting oracle exactly for n <= 6."""
    mismatches, pairs = 0, 0
    for n in range(1, 7):
        alg = Algebra(n)
        eye = np.eye(alg.dim)
        prod = (Multivector(alg, eye[:, None, :]) * Multivector(alg, eye[None, :, :])).coeffs
        for i in range(alg.dim):
            for j in range(alg.dim):
                s, idx = blade_product_by_sorting(mask_to_indices(i), mask_to_indices(j))
                expected = np.zeros(alg.dim)
                expected[indices_to_mask(idx)] = s
                mismatches += not np.array_equal(prod[i, j], expected)
                pairs += 1
    return mismatches == 0, f"{pairs} blade pairs, {mismatches} mismatches"


def criterion_2(count=1000):
    """Vector splits, vector/k-vector splits and the distributive identity."""
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = {"vector split": 0.0, "k-vector split": 0.0, "distributive": 0.0}
    for _ in range(count):
        n = int(rng.integers(2, 7))
        alg = Algebra(n)
        a, b = alg.vector(rng.standard_normal(n)), alg.vector(rng.standard_normal(n))
        ab, ba = a * b, b * a
        worst["vector split"] = max(worst["vector split"], _rel(a | b, (ab + ba) * 0.5),
                                    _rel(a ^ b, (ab - ba) * 0.5), _rel(ab, (a | b) + (a ^ b)))
        k = int(rng.integers(1, n + 1))
        B = alg.random(rng, grades=k)
        sgn = (-1.0) ** (k + 1)
        aB, Ba = a * B, B * a * sgn
        worst["k-vector split"] = max(worst["k-vector split"], _rel(a | B, (aB + Ba) * 0.5),
                                      _rel(a ^ B, (aB - Ba) * 0.5), _rel(aB, (a | B) + (a ^ B)))
        r, s = int(rng.integers(1, n + 1)), int(rng.integers(1, n + 1))
        Ar, Bs = alg.random(rng, grades=r), alg.random(rng, grades=s)
        lhs = a | (Ar ^ Bs)
        mid = ((a | Ar) ^ Bs) + (Ar ^ (a | Bs)) * (-1.0) ** r
        right = ((Ar ^ Bs) | a) * (-1.0) ** (r + s + 1)
        worst["distributive"] = max(worst["distributive"], _rel(lhs, mid), _rel(lhs, right))
    ok = all(v <= 1e-12 for v in worst.values())
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" ({count} inputs each)"


def criterion_3():
    """Reciprocal relations on shipped patches and the frame-divergence identity under FD."""
    rng = np.random.default_rng(DEFAULT_SEED)
    gram = 0.0
    for name, params in SHIPPED:
        patch = L.make_patch(name, **params)
        s = interior_points(patch, 100, rng, pad=0.0)
        gram = max(gram, float(np.max(tangent_frame(patch, s).gram_check())))
    lemma, ks = {}, set()
    for patch in (L.parabola_patch(curvature=2.0), L.sphere_octant_patch(), L.figure2_patch(), twisted_solid()):
        s = interior_points(patch, 50, rng, pad=0.1)
        worst = max(float(frame_divergence(patch.without_jacobian(), s, j, fd=True).max_abs().max())
                    for j in range(1, patch.k + 1))
        lemma[f"{patch.name}(k={patch.k})"] = worst
        ks.add(patch.k)
    ok = gram <= 1e-8 and max(lemma.values()) <= 1e-4 and ks == {1, 2, 3}
    detail = f"max|x^i.x_j - delta| {gram:.1e} on {len(SHIPPED)} patches; frame divergence " + \
        ", ".join(f"{k} {v:.1e}" for k, v in lemma.items())
    return ok, detail


def _ftc_cases():
    curve = L.parabola_patch(0.0, 1.0, 2.0)
    fig2 = L.figure2_patch()
    cube = L.unit_cube_patch()
    return [
        ("curve", curve, None, "x1^3*e1 + x2*e2"),
        ("curve", curve, None, "x1*x2 - x2^2*e12"),
        ("curve", curve, None, "x1^4 + x1*x2^2*e1 + 3*e12"),
        ("figure2", fig2, None, "x1*e1 + x2*e2 + x3*e3"),
        ("figure2", fig2, None, "x1^2*x3*e12 + x2*e3"),
        ("figure2", fig2, None, "x1*x2*x3 + x3^2*e123 - x2^3*e1"),
        ("cube", cube, None, "x1*e1 + x2*e2 + x3*e3"),
        ("cube", cube, None, "x1^2*x2*e23 + x3^3"),
        ("cube", cube, None, "x1*x2*x3*e1 - x2^2*e123 + x3*e12"),
        ("figure2", fig2, "1 + x1*e12 - x3*e3", "x2*e1 + x1*x3*e23"),
    ]


def criterion_4():
    """FTC residual <= 1e-5 at q=8, m=16 and residual(2m) <= residual(m)/3."""
    quad = QuadratureSpec(GL, 8, 8)
    worst, all_conv, parts = 0.0, True, []
    for label, patch, gexpr, fexpr in _ftc_cases():
        n = patch.n
        g = None if gexpr is None else parse_poly_field(gexpr, n)
        rep = ftc_check(g, parse_poly_field(fexpr, n), patch, quad, levels=2, timing=False)
        rel16 = rep.final().rel_residual
        worst = max(worst, rel16)
        all_conv &= rep.converged()
        parts.append(f"{label}{'/g' if g is not None else ''} {rel16:.1e}")
    # Gauss-Legendre is exact here up to roundoff, so the refinement ratio is
    # also shown on the midpoint rule, where quadrature error dominates
    f = parse_poly_field("x1^2*x2*e1 + x3^3*e2 - x1*x2*x3", 3)
    mid = ftc_check(None, f, L.figure2_patch(), QuadratureSpec("midpoint", 1, 4), levels=3, timing=False)
    rel = [r.rel_residual for r in mid.table]
    ratios = [a / b for a, b in zip(rel, rel[1:])]
    ok = worst <= 1e-5 and all_conv and min(ratios) >= 3
    return ok, (f"max rel residual at m=16 {worst:.1e}; converged {all_conv}; midpoint ratios "
                + " ".join(f"{r:.2f}" for r in ratios) + "; " + ", ".join(parts))


def criterion_5():
    """D(beta(M)) = 0 within 1e-8 on every shipped patch and complex."""
    quad = QuadratureSpec(GL, 8, 8)
    worst = 0.0
    names = []
    for name, params in SHIPPED:
        worst = max(worst, corollary_check(L.make_patch(name, **params), quad).norm)
        names.append(name)
    for name in ("circle", "sphere", "split_square"):
        worst = max(worst, corollary_check(L.make_patch(name), quad).norm)
        names.append(name)
    return worst <= 1e-8, f"max |D(beta(M))| {worst:.1e} over {len(names)} patches/complexes"


def criterion_6():
    """Green, Stokes and Gauss against independent oracles within 1e-6."""
    errs = {}
    sq = greens_theorem_check(parse_poly_field("x1*e2", 2), L.identity_patch(2), oracle=1.0)
    # P, Q quadratic: dQ/dx - dP/dy is linear, so its disk integral is pi times its centre value
    cx, cy = 0.5, -0.3
    f = parse_poly_field("(0.7*x1^2 - 1.2*x1*x2 + 0.4*x2^2 + 2*x2)*e1 + (0.3*x1^2 + 0.9*x1*x2 - 1.1*x1)*e2", 2)
    oracle = math.pi * ((0.6 * cx + 0.9 * cy - 1.1) - (-1.2 * cx + 0.8 * cy + 2.0))
    disk = greens_theorem_check(f, L.disk_polar_patch(1.0, (cx, cy)), QuadratureSpec(GL, 12, 8), oracle=oracle)
    errs["green square"] = sq.classical.oracle_error()
    errs["green disk"] = disk.classical.oracle_error()
    rot = parse_poly_field("-x2*e1 + x1*e2", 3)
    errs["stokes figure2"] = stokes_theorem_check(rot, L.figure2_patch(), oracle=2.0).oracle_error()
    errs["gauss cube"] = gauss_divergence_check(identity_field(Algebra(3)), L.unit_cube_patch(),
                                                oracle=3.0).oracle_error()
    return max(errs.values()) <= 1e-6, ", ".join(f"{k} {v:.1e}" for k, v in errs.items())


def criterion_7():
    """Identity formulas 1-7 over 1000 points for n = 2, 3, 4 and the kernel certificate."""
    parts, ok = [], True
    for n in (2, 3, 4):
        fd = identity_suite(n, 1000, DEFAULT_SEED, "fd")
        an = identity_suite(n, 1000, DEFAULT_SEED, "analytic")
        ok &= fd.passed(1e-6) and an.passed(1e-12)
        parts.append(f"n={n} fd {fd.max_error():.1e} analytic {an.max_error():.1e}")
    rng = np.random.default_rng(DEFAULT_SEED)
    pts = rng.uniform(-2, 2, (4000, 3))
    pts = pts[np.linalg.norm(pts, axis=-1) >= 0.2][:1000]
    kernel = float(np.max(cauchy_kernel_derivative_norm(3, pts, fd=True)))
    ok &= kernel <= 1e-6
    parts.append(f"|d K| (n=3, fd) {kernel:.1e}")
    return ok, "; ".join(parts)


def criterion_8():
    """Cauchy reconstruction of constants, of z^2, and the full formula for f(x) = x."""
    fine = QuadratureSpec(GL, 16, 32)
    c2 = FieldFn.constant_field(Algebra(2), Algebra(2).parse("1.5 - 2*e12"))
    c3 = FieldFn.constant_field(Algebra(3), Algebra(3).parse("2 + e1 - e123"))
    e_circle = _rel(cauchy_reconstruct(c2, L.circle_boundary(), [0.2, -0.1], fine), c2([0.0, 0.0]))
    e_sphere = _rel(cauchy_reconstruct(c3, L.sphere_boundary(), [0.1, 0.2, -0.1], QuadratureSpec(GL, 8, 8)),
                    c3([0.0, 0.0, 0.0]))
    z2 = L.make_field("complex_power", 2, power=2)
    pts = ([0.0, 0.0], [0.3, 0.1], [-0.4, 0.2], [0.1, -0.5], [-0.2, -0.3])
    e_z2 = max(reconstruction_report(z2, L.circle_boundary(), p, fine).abs_err for p in pts)
    full = full_cauchy_formula(identity_field(Algebra(2)), L.disk_polar_patch(), [0.3, -0.2], QuadratureSpec(GL, 8, 16))
    raw = full_cauchy_formula(identity_field(Algebra(2)), L.disk_polar_patch(), [0.3, -0.2],
                              QuadratureSpec(GL, 8, 16), subtract=False)
    ok = e_circle <= 1e-6 and e_sphere <= 1e-6 and e_z2 <= 1e-5 and max(full.abs_err, raw.abs_err) <= 2e-3
    return ok, (f"constant circle {e_circle:.1e}, sphere {e_sphere:.1e}; z^2 at 5 points {e_z2:.1e}; "
                f"full formula f=x {full.abs_err:.1e}, plain exclusion {raw.abs_err:.1e} "
                f"(r0 {full.excluded_radius:.3f})")


def criterion_9():
    """Byte-identical CSVs for identical runs; thread counts agree within 1e-13."""
    identical = True
    with tempfile.TemporaryDirectory() as tmp:
        for name in ("ftc_cube.yaml", "cauchy_circle_z2.yaml", "identities_n3.yaml", "green_disk.yaml"):
            s = load_scenario(os.path.join(SCENARIOS, name))
            paths = [os.path.join(tmp, f"{i}_{name}.csv") for i in range(2)]
            for p in paths:
                run_scenario(s, threads=1, out=p, timing=False)
            with open(paths[0], "rb") as a, open(paths[1], "rb") as b:
                identical &= a.read() == b.read()
    f = parse_poly_field("x1*x2*e1 + x3^2*e13 - x2", 3)
    quad = QuadratureSpec(GL, 8, 8)
    ref = ftc_check(None, f, L.unit_cube_patch(), quad, levels=1, threads=1)
    gap = 0.0
    for t in (2, 4):
        other = ftc_check(None, f, L.unit_cube_patch(), quad, levels=1, threads=t)
        gap = max(gap, float(np.max(np.abs(other.lhs.coeffs - ref.lhs.coeffs))),
                  float(np.max(np.abs(other.rhs.coeffs - ref.rhs.coeffs))))
    z2 = L.make_field("complex_power", 2, power=2)
    r1 = cauchy_reconstruct(z2, L.circle_boundary(), [0.3, 0.1], QuadratureSpec(GL, 16, 32), threads=1)
    r4 = cauchy_reconstruct(z2, L.circle_boundary(), [0.3, 0.1], QuadratureSpec(GL, 16, 32), threads=4)
    gap = max(gap, float(np.max(np.abs(r1.coeffs - r4.coeffs))))
    return identical and gap <= 1e-13, f"byte-identical CSVs {identical}; max thread gap {gap:.1e}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9]


def run_criterion(number):
    t0 = time.perf_counter()
    try:
        ok, detail = CRITERIA[number - 1]()
    except Exception as exc:  # a crash is a failure, reported on the same line
        ok, detail = False, f"error: {exc!r}"
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f} s) {detail}"
    RESULTS[number] = line
    return ok, line


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number):
    ok, line = run_criterion(number)
    print(line)
    assert ok, line


if __name__ == "__main__":
    failures = 0
    for k in range(1, len(CRITERIA) + 1):
        ok, line = run_criterion(k)
        print(line, flush=True)
        failures += not ok
    sys.exit(1 if failures else 0)
