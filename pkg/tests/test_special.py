"""Special functions: Gegenbauer, harmonics, dimensions, quadrature.

Oracles: an independent series-definition implementation of the Gegenbauer
polynomials, exact sphere moments for harmonic normalization, and monomial
antiderivatives for quadrature exactness.
"""

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavebasis.errors import ParameterError, UnsupportedDimensionError
from wavebasis.exactpoly import Poly, polynomial_laplacian, euler_degree_apply
from wavebasis.special import (dim_harmonic, evaluate_poly,
                               gauss_legendre, gegenbauer, gegenbauer_rule,
                               gegenbauer_ode_residual,
                               gegenbauer_weighted_norm2, harmonic_basis,
                               sphere_area, sphere_grid, sphere_mean_product,
                               sphere_monomial_mean)


def pochhammer(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= a + i
    return out


def gegenbauer_series(alpha: Fraction, d: int) -> Poly:
    """Independent oracle: C^a_d(s) = sum_k (-1)^k (a)_{d-k} (2s)^{d-2k}
    / (k! (d-2k)!)."""
    terms = {}
    for k in range(d // 2 + 1):
        c = Fraction((-1) ** k) * pochhammer(alpha, d - k) \
            * Fraction(2) ** (d - 2 * k) / (math.factorial(k) * math.factorial(d - 2 * k))
        if c:
            terms[(d - 2 * k,)] = c
    return Poly(1, terms)


# ----------------------------------------------------------------------
# Gegenbauer
# ----------------------------------------------------------------------


def test_gegenbauer_base_cases():
    assert gegenbauer(Fraction(3, 7), 0) == Poly(1, {(0,): Fraction(1)})
    alpha = Fraction(5, 3)
    assert gegenbauer(alpha, 1) == Poly(1, {(1,): 2 * alpha})
    # frozen from the series oracle: C^1_2 = 4 s^2 - 1
    assert gegenbauer(1, 2) == Poly(1, {(2,): Fraction(4), (0,): Fraction(-1)})
    assert gegenbauer(1, 2) == gegenbauer_series(Fraction(1), 2)


def test_gegenbauer_recurrence_equals_series(rng):
    for _ in range(10):
        alpha = Fraction(int(rng.integers(-1, 12)), int(rng.integers(1, 7)))
        if alpha <= Fraction(-1, 2):
            continue
        d = int(rng.integers(0, 9))
        assert gegenbauer(alpha, d) == gegenbauer_series(alpha, d)


def test_gegenbauer_parity():
    p = gegenbauer(Fraction(7, 2), 6)
    assert all(k % 2 == 0 for (k,) in p.terms)


def test_gegenbauer_ode_exact_and_sampled():
    alpha, d = Fraction(5, 2), 7
    g = gegenbauer(alpha, d)
    assert gegenbauer_ode_residual(g, alpha, d).is_zero()
    # sampled, normalized form
    s = np.linspace(-0.95, 0.95, 41)
    g0 = evaluate_poly(g, (s,))
    g1 = evaluate_poly(g.diff(0), (s,))
    g2 = evaluate_poly(g.diff(0).diff(0), (s,))
    resid = (1 - s ** 2) * g2 - (2 * float(alpha) + 1) * s * g1 \
        + d * (2 * float(alpha) + d) * g0
    assert np.max(np.abs(resid)) / np.max(np.abs(g0)) < 1e-12


def test_gegenbauer_parameter_errors():
    with pytest.raises(ParameterError):
        gegenbauer(Fraction(-1, 2), 2)
    with pytest.raises(ParameterError):
        gegenbauer(1, -1)


def test_gegenbauer_orthogonality_quadrature():
    alpha = Fraction(3, 2)
    u, w = gegenbauer_rule(40, float(alpha))
    for d1 in range(5):
        for d2 in range(5):
            v1 = evaluate_poly(gegenbauer(alpha, d1), (u,))
            v2 = evaluate_poly(gegenbauer(alpha, d2), (u,))
            val = np.sum(w * v1 * v2)
            if d1 != d2:
                assert abs(val) < 1e-12
            else:
                exact, pi_pow = gegenbauer_weighted_norm2(alpha, d1)
                assert abs(val - float(exact) * math.pi ** pi_pow) < 1e-10 * abs(val)


def test_weighted_norm_formula_vs_quadrature():
    for alpha in (Fraction(1), Fraction(5, 2), Fraction(4)):
        for d in (0, 1, 3, 6):
            u, w = gegenbauer_rule(30, float(alpha))
            v = evaluate_poly(gegenbauer(alpha, d), (u,))
            num = float(np.sum(w * v * v))
            exact, pi_pow = gegenbauer_weighted_norm2(alpha, d)
            assert abs(num - float(exact) * math.pi ** pi_pow) < 1e-9 * num


# ----------------------------------------------------------------------
# Harmonic dimensions and bases
# ----------------------------------------------------------------------


def test_dim_harmonic_values():
    for n in range(2, 8):
        assert dim_harmonic(n, 0) == 1
        assert dim_harmonic(n, 1) == n
    assert dim_harmonic(3, 2) == 5
    with pytest.raises(ParameterError):
        dim_harmonic(0, 1)


@pytest.mark.parametrize("n,L", [(2, 6), (3, 5), (4, 4), (5, 4)])
def test_harmonic_basis_exact_invariants(n, L):
    hb = harmonic_basis(n, L)
    for l in range(L + 1):
        members = hb.degree(l)
        assert len(members) == dim_harmonic(n, l)
        for h in members:
            assert polynomial_laplacian(h.poly).is_zero()
            # homogeneous of degree l (Euler identity)
            assert euler_degree_apply(h.poly) == h.poly.scale(Fraction(l))


def test_harmonic_basis_exact_orthogonality():
    n, L = 3, 4
    hb = harmonic_basis(n, L)
    flat = list(hb)
    for i, a in enumerate(flat):
        for b in flat[i + 1:]:
            assert sphere_mean_product(n, a.poly, b.poly) == 0
        assert sphere_mean_product(n, a.poly, a.poly) == a.mean_square


@pytest.mark.parametrize("n", [2, 3, 4])
def test_harmonic_basis_gram_quadrature(n):
    L = 4
    hb = harmonic_basis(n, L)
    grid = sphere_grid(n, 2 * L + 2)
    rows = []
    for l in range(L + 1):
        rows.append(hb.evaluate_degree(l, grid.points))
    vals = np.concatenate(rows, axis=0)
    gram = (vals * grid.weights) @ vals.T
    assert np.max(np.abs(gram - np.eye(len(vals)))) < 1e-10


def test_harmonic_degree_one_is_coordinates():
    hb = harmonic_basis(3, 1)
    span = np.array([[float(h.poly.terms.get(tuple(e), 0)) for e in np.eye(3, dtype=int)]
                     for h in hb.degree(1)])
    # three independent linear forms spanning (x1, x2, x3)
    assert np.linalg.matrix_rank(span) == 3


def test_harmonic_degree_zero_constant():
    for n in (2, 3, 5):
        hb = harmonic_basis(n, 0)
        (h,) = hb.degree(0)
        val = hb.evaluate_degree(0, np.eye(n)[:1])[0, 0]
        assert abs(val - 1.0 / math.sqrt(sphere_area(n))) < 1e-14


def test_harmonic_basis_deterministic_order():
    a = harmonic_basis(3, 3)
    b = harmonic_basis(3, 3)
    for l in range(4):
        for x, y in zip(a.degree(l), b.degree(l)):
            assert x.index == y.index and x.poly == y.poly


def test_harmonic_basis_errors():
    with pytest.raises(UnsupportedDimensionError):
        harmonic_basis(1, 2)


def test_harmonic_json_export():
    hb = harmonic_basis(2, 2)
    obj = json.loads(hb.to_json())
    assert obj["n"] == 2 and obj["max_degree"] == 2
    entry = obj["harmonics"][0]
    assert {"degree", "index", "monomials", "mean_square"} <= set(entry)
    mono = entry["monomials"][0]
    assert {"exponents", "numerator", "denominator"} <= set(mono)


# ----------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------


def test_gauss_legendre_small_cases():
    x, w = gauss_legendre(1)
    assert abs(x[0]) < 1e-15 and abs(w[0] - 2.0) < 1e-15
    x, w = gauss_legendre(2)
    assert np.allclose(sorted(x), [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    assert np.allclose(w, [1.0, 1.0], atol=1e-15)


@given(st.integers(min_value=1, max_value=40))
@settings(max_examples=25, deadline=None)
def test_gauss_legendre_constant(npts):
    x, w = gauss_legendre(npts)
    assert abs(np.sum(w) - 2.0) < 1e-13


@given(st.integers(min_value=1, max_value=15), st.data())
@settings(max_examples=30, deadline=None)
def test_gauss_legendre_polynomial_exactness(npts, data):
    deg = data.draw(st.integers(min_value=0, max_value=2 * npts - 1))
    x, w = gauss_legendre(npts)
    quad = np.sum(w * x ** deg)
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert abs(quad - exact) < 1e-13


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sphere_grid_area_and_moments(rng, n):
    grid = sphere_grid(n, 8)
    assert np.all(grid.weights > 0)
    assert abs(np.sum(grid.weights) - sphere_area(n)) < 1e-12 * sphere_area(n)
    for _ in range(6):
        expo = tuple(int(2 * v) for v in rng.integers(0, 3, n))
        if sum(expo) > 8:
            continue
        quad = np.sum(grid.weights * np.prod(grid.points ** np.array(expo), axis=1))
        exact = float(sphere_monomial_mean(n, expo)) * sphere_area(n)
        assert abs(quad - exact) < 1e-12 * max(1.0, abs(exact))
    odd = (1,) + (0,) * (n - 1)
    quad = np.sum(grid.weights * grid.points[:, 0])
    assert abs(quad) < 1e-12


def test_sphere_monomial_mean_known_values():
    assert sphere_monomial_mean(2, (2, 0)) == Fraction(1, 2)
    assert sphere_monomial_mean(2, (2, 2)) == Fraction(1, 8)
    assert sphere_monomial_mean(3, (2, 0, 0)) == Fraction(1, 3)
    assert sphere_monomial_mean(3, (1, 0, 0)) == 0
