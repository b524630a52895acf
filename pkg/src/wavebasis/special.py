"""Special functions: Gegenbauer polynomials, spherical harmonics in any
dimension, harmonic-space dimensions, and quadrature rules.

Everything that can be exact is exact: Gegenbauer and harmonic polynomials
carry ``Fraction`` coefficients, sphere-average norms are computed from the
rational monomial moments of the uniform measure, and floating point enters
only at evaluation time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import roots_gegenbauer

from .errors import ParameterError, UnsupportedDimensionError
from .exactpoly import Poly

# ----------------------------------------------------------------------
# Gegenbauer polynomials
# ----------------------------------------------------------------------


def gegenbauer(alpha, d: int) -> Poly:
    """Classical Gegenbauer polynomial C^alpha_d as a 1-variable Poly.

    Three-term recurrence; coefficients are exact Fractions whenever alpha
    is rational.  Requires alpha > -1/2 and d >= 0.
    """
    alpha = Fraction(alpha)
    if alpha <= Fraction(-1, 2):
        raise ParameterError(f"gegenbauer parameter must exceed -1/2, got {alpha}")
    if d < 0 or int(d) != d:
        raise ParameterError(f"gegenbauer degree must be a nonnegative integer, got {d}")
    d = int(d)
    s = Poly.variable(1, 0, Fraction(1))
    c_prev = Poly.const(1, Fraction(1))
    if d == 0:
        return c_prev
    c_cur = s.scale(2 * alpha)
    for k in range(2, d + 1):
        c_next = (s * c_cur).scale(Fraction(2 * (k - 1 + alpha), k)) \
            - c_prev.scale(Fraction(k - 2 + 2 * alpha, k))
        c_prev, c_cur = c_cur, c_next
    return c_cur


def gegenbauer_ode_residual(poly: Poly, alpha, d: int) -> Poly:
    """(1-s^2) g'' - (2a+1) s g' + d (2a+d) g, exactly; zero iff g solves
    the Gegenbauer equation with these parameters."""
    alpha = Fraction(alpha)
    s = Poly.variable(1, 0, Fraction(1))
    one = Poly.const(1, Fraction(1))
    g1 = poly.diff(0)
    g2 = g1.diff(0)
    return (one - s * s) * g2 - (s * g1).scale(2 * alpha + 1) \
        + poly.scale(Fraction(d) * (2 * alpha + d))


def gamma_half_exact(twice_x: int):
    """Gamma(twice_x / 2) for positive twice_x, as (Fraction, k) meaning
    value = Fraction * sqrt(pi)**k."""
    if twice_x <= 0:
        raise ParameterError("gamma argument must be positive")
    if twice_x % 2 == 0:
        return Fraction(math.factorial(twice_x // 2 - 1)), 0
    m = (twice_x - 1) // 2
    return Fraction(math.factorial(2 * m), 4 ** m * math.factorial(m)), 1


def gegenbauer_weighted_norm2(alpha, d: int):
    """Exact value of integral_{-1}^{1} C^alpha_d(s)^2 (1-s^2)^(alpha-1/2) ds.

    Returned as (rational, pi_power) with value = rational * pi**pi_power.
    Only defined here for alpha an integer or half-integer, which is all the
    construction needs.
    """
    alpha = Fraction(alpha)
    two_alpha = alpha * 2
    if two_alpha.denominator != 1:
        raise ParameterError("norm formula implemented for 2*alpha integer only")
    ta = int(two_alpha)
    g_top, k_top = gamma_half_exact(2 * d + 2 * ta)
    g_alpha, k_alpha = gamma_half_exact(ta)
    if k_top != 0:
        raise ParameterError("unexpected half-integer Gamma(d + 2 alpha)")
    rational = Fraction(2) ** (1 - ta) * g_top \
        / (math.factorial(d) * (d + alpha) * g_alpha ** 2)
    # total pi power: the leading pi, minus one if Gamma(alpha)^2 carries pi
    return rational, 1 - k_alpha


# ----------------------------------------------------------------------
# Harmonic-space dimensions and sphere geometry
# ----------------------------------------------------------------------


def dim_harmonic(n_ambient: int, k: int) -> int:
    """Dimension of the space of degree-k harmonic polynomials on R^n."""
    if n_ambient < 1 or k < 0:
        raise ParameterError("need n_ambient >= 1 and k >= 0")
    if n_ambient == 1:
        return 1 if k <= 1 else 0
    return math.comb(k + n_ambient - 1, n_ambient - 1) \
        - (math.comb(k + n_ambient - 3, n_ambient - 1) if k >= 2 else 0)


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^(n-1) in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def sphere_monomial_mean(n: int, exponents) -> Fraction:
    """Average of the monomial x^exponents over S^(n-1), exactly."""
    if any(e % 2 for e in exponents):
        return Fraction(0)
    total = sum(exponents)
    num = 1
    for e in exponents:
        num *= _double_factorial(e - 1)
    den = 1
    for k in range(total // 2):
        den *= n + 2 * k
    return Fraction(num, den)


def sphere_mean_product(n: int, p: Poly, q: Poly) -> Fraction:
    """Exact sphere average of the product of two polynomials on R^n."""
    from .exactpoly import clear_denominators

    pi, dp = clear_denominators(p)
    qi, dq = clear_denominators(q)
    total = Fraction(0)
    for e, c in (pi * qi).terms.items():
        m = sphere_monomial_mean(n, e)
        if m:
            total += c * m
    return total / (dp * dq)


# ----------------------------------------------------------------------
# Harmonic polynomial bases
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicPolynomial:
    """One homogeneous harmonic polynomial plus its sphere normalization."""

    degree: int
    index: tuple
    poly: Poly                    # exact Fraction coefficients, n variables
    mean_square: Fraction         # sphere average of poly**2

    def normalization(self, n: int) -> float:
        """Scale c with c*poly restricted to S^(n-1) having unit L2 norm."""
        return 1.0 / math.sqrt(float(self.mean_square) * sphere_area(n))


def _homogenized_gegenbauer(n: int, axis: int, alpha, deg: int) -> Poly:
    """||x||^deg * C^alpha_deg(x_axis / ||x||) expanded as a polynomial.

    Gegenbauer parity makes every surviving power of ||x|| even, so the
    result is an honest polynomial in x.
    """
    c = gegenbauer(alpha, deg)
    r2 = Poly(n)
    for i in range(n):
        e = [0] * n
        e[i] = 2
        r2 = r2 + Poly.monomial(n, e, Fraction(1))
    out = Poly(n)
    for (k,), coeff in c.terms.items():
        if (deg - k) % 2 != 0:
            raise ParameterError("Gegenbauer parity violated")
        e = [0] * n
        e[axis] = k
        out = out + (r2 ** ((deg - k) // 2)) * Poly.monomial(n, e, coeff)
    return out


def _lift_poly(p: Poly, n: int) -> Poly:
    """Embed a polynomial in the first (n-1) variables into n variables."""
    return Poly(n, {e + (0,): c for e, c in p.terms.items()})


@lru_cache(maxsize=None)
def _raw_degree_basis(n: int, l: int):
    """Un-normalized harmonic basis of degree l on R^n, recursive in n."""
    if n == 1:
        if l <= 1:
            e = (l,)
            return ((( ), Poly.monomial(1, e, Fraction(1))),)
        return ()
    if n == 2:
        if l == 0:
            return (((0,), Poly.const(2, Fraction(1))),)
        re = Poly(2)
        im = Poly(2)
        for k in range(l + 1):
            c = Fraction(math.comb(l, k))
            term = Poly.monomial(2, (l - k, k), c)
            if k % 4 == 0:
                re = re + term
            elif k % 4 == 1:
                im = im + term
            elif k % 4 == 2:
                re = re - term
            else:
                im = im - term
        return (((0,), re), ((1,), im))
    out = []
    alpha_base = Fraction(n - 2, 2)
    for mu in range(l + 1):
        radial = _homogenized_gegenbauer(n, n - 1, mu + alpha_base, l - mu)
        for sub_index, sub in _raw_degree_basis(n - 1, mu):
            out.append(((mu,) + sub_index, radial * _lift_poly(sub, n)))
    return tuple(out)


class HarmonicBasis:
    """Real orthonormal spherical-harmonic bases on S^(n-1), degrees 0..L.

    The recursion over dimension (degree-mu harmonics on the equatorial
    sphere times a Gegenbauer factor in the polar direction) produces a
    canonical, reproducible ordering: within each degree, members are sorted
    lexicographically by their recursion index tuple.
    """

    def __init__(self, n: int, max_degree: int):
        if n < 2:
            raise UnsupportedDimensionError(f"need ambient dimension >= 2, got {n}")
        if max_degree < 0:
            raise ParameterError("max_degree must be >= 0")
        self.n = n
        self.max_degree = max_degree
        self._by_degree = []
        for l in range(max_degree + 1):
            members = []
            for index, poly in _raw_degree_basis(n, l):
                ms = sphere_mean_product(n, poly, poly)
                members.append(HarmonicPolynomial(l, index, poly, ms))
            if len(members) != dim_harmonic(n, l):
                raise ParameterError(
                    f"harmonic count mismatch at degree {l}: "
                    f"{len(members)} != {dim_harmonic(n, l)}")
            self._by_degree.append(tuple(members))

    def degree(self, l: int):
        return self._by_degree[l]

    def __iter__(self):
        for members in self._by_degree:
            yield from members

    def harmonic(self, l: int, j: int) -> HarmonicPolynomial:
        return self._by_degree[l][j]

    def evaluate_degree(self, l: int, points: np.ndarray) -> np.ndarray:
        """Normalized values, shape (dim_l, npoints); points are rows in R^n."""
        points = np.asarray(points, dtype=float)
        rows = []
        for h in self._by_degree[l]:
            rows.append(h.normalization(self.n) * evaluate_poly(h.poly, points.T))
        return np.array(rows)

    def evaluate_all(self, points: np.ndarray):
        """Dict degree -> value matrix for every degree up to the cap."""
        return {l: self.evaluate_degree(l, points) for l in range(self.max_degree + 1)}

    def to_json(self) -> str:
        """JSON table of (degree, index, monomial exponents, coefficients)."""
        table = []
        for l, members in enumerate(self._by_degree):
            for j, h in enumerate(members):
                entry = {
                    "degree": l,
                    "index": j,
                    "mean_square": [h.mean_square.numerator, h.mean_square.denominator],
                    "monomials": [
                        {"exponents": list(e),
                         "numerator": c.numerator,
                         "denominator": c.denominator}
                        for e, c in sorted(h.poly.terms.items())
                    ],
                }
                table.append(entry)
        return json.dumps({"n": self.n, "max_degree": self.max_degree,
                           "harmonics": table}, indent=1, sort_keys=True)


def harmonic_basis(n: int, max_degree: int) -> HarmonicBasis:
    return HarmonicBasis(n, max_degree)


def evaluate_poly(poly: Poly, coords) -> np.ndarray:
    """Vectorized polynomial evaluation; coords is a sequence of arrays,
    one per variable."""
    coords = [np.asarray(c) for c in coords]
    result = None
    max_exp = [0] * poly.nvars
    for e in poly.terms:
        for i, k in enumerate(e):
            if k > max_exp[i]:
                max_exp[i] = k
    tables = []
    for i, c in enumerate(coords):
        t = [np.ones_like(c)]
        for _ in range(max_exp[i]):
            t.append(t[-1] * c)
        tables.append(t)
    for e, coeff in poly.terms.items():
        term = float(coeff) if isinstance(coeff, Fraction) else coeff
        for i, k in enumerate(e):
            if k:
                term = term * tables[i][k]
        result = term if result is None else result + term
    shape = np.broadcast(*coords).shape if coords else ()
    if result is None:
        return np.zeros(shape)
    if np.ndim(result) == 0:
        return np.full(shape, result)
    return result


# ----------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------


def gauss_legendre(npoints: int):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    if npoints < 1:
        raise ParameterError("need at least one quadrature node")
    return np.polynomial.legendre.leggauss(npoints)


def gegenbauer_rule(npoints: int, alpha: float):
    """Gauss rule for weight (1-u^2)^(alpha-1/2) on [-1, 1]."""
    if npoints < 1:
        raise ParameterError("need at least one quadrature node")
    if abs(alpha - 0.5) < 1e-14:
        return gauss_legendre(npoints)
    return roots_gegenbauer(npoints, alpha)


@dataclass(frozen=True)
class SphereGrid:
    """Product quadrature grid on S^(n-1), exact to a declared degree."""

    n: int
    degree: int
    points: np.ndarray   # (npoints, n) unit vectors
    weights: np.ndarray  # (npoints,), summing to the sphere area


def sphere_grid(n: int, degree: int) -> SphereGrid:
    """Recursive product grid integrating polynomials of total degree <=
    ``degree`` exactly over S^(n-1)."""
    if n < 2:
        raise UnsupportedDimensionError(f"need ambient dimension >= 2, got {n}")
    if n == 2:
        m = degree + 2
        ang = 2.0 * np.pi * np.arange(m) / m
        pts = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        w = np.full(m, 2.0 * np.pi / m)
        return SphereGrid(2, degree, pts, w)
    npolar = degree // 2 + 2
    u, wu = gegenbauer_rule(npolar, (n - 2) / 2.0)
    sub = sphere_grid(n - 1, degree)
    sin_t = np.sqrt(1.0 - u ** 2)
    pts = np.concatenate([
        (sub.points[None, :, :] * sin_t[:, None, None]).reshape(-1, n - 1),
        np.repeat(u, len(sub.points))[:, None],
    ], axis=1)
    w = (wu[:, None] * sub.weights[None, :]).reshape(-1)
    return SphereGrid(n, degree, pts, w)
