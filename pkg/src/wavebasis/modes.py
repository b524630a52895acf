"""The orthonormal basis solutions of the wave equation.

A basis solution is labeled by (p, l, j): energy p > 0, spherical-harmonic
degree l and index j.  Writing r = (1-n)/2, valid labels have
d = p/2 - (l - r) a nonnegative integer.  In the noncompact picture

    f_{p,l,j}(t, x) = a_{p,l} * g_{p,l}(t, x) * h_{l,j}(x) / D(t, x)^(p/2),

with D(t, x) = (1 - i t)^2 + ||x||^2 (principal square root for odd p),
g_{p,l} the degree-2d radial polynomial built from a Gegenbauer polynomial,
and h_{l,j} an orthonormal real spherical harmonic.  On the cylinder the
same function is

    F_{p,l,j} = p^(-1/2) e^(i p phi / 2) Ctil(cos theta) sin^l(theta) h_{l,j}(xhat),

where Ctil = C^(l-r)_d / N_{l-r,d}.  The normalizer N and the prefactor
a_{p,l} = 2^l / (sqrt(p) N) are pinned by requiring unit Klein-Gordon norm,
which simultaneously makes 2^r sqrt(p) F_{p,l,j} restrict to an orthonormal
basis of L^2(S^n) on the phi = 0 slice.  Concretely

    N^2 = 2^(1-n) * integral_{-1}^{1} C^(l-r)_d(s)^2 (1 - s^2)^(l - r - 1/2) ds.

For n odd everything in sight is rational: ``rational_mode`` returns the
exact Gaussian-rational representation used for the kernel certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InvalidModeIndexError, ParameterError, UnsupportedDimensionError
from .exactpoly import (GiPoly, Poly, clear_denominators, denominator_base,
                        expand_radial, wave_operator_numerator)
from .geometry import CompactField, NoncompactField, _norm_sq
from .jets import Jet2, gcos, gexp, gsin
from .special import (HarmonicBasis, dim_harmonic, evaluate_poly, gegenbauer,
                      gegenbauer_weighted_norm2, harmonic_basis)


def weight(n: int) -> Fraction:
    """The conformal weight r = (1 - n)/2."""
    if n < 2:
        raise UnsupportedDimensionError(f"need n >= 2, got {n}")
    return Fraction(1 - n, 2)


def lowest_energy(n: int) -> int:
    """Smallest admissible energy p = n - 1."""
    return n - 1


@dataclass(frozen=True)
class ModeIndex:
    p: int
    l: int
    j: int

    def __str__(self):
        return f"({self.p},{self.l},{self.j})"


def mode_degree(p: int, l: int, n: int) -> int:
    """The Gegenbauer degree d = p/2 - (l - r); raises if (p, l) is not a
    valid label for dimension n."""
    r = weight(n)
    if p <= 0 or int(p) != p:
        raise InvalidModeIndexError(f"energy must be a positive integer, got {p}")
    if l < 0 or int(l) != l:
        raise InvalidModeIndexError(f"angular degree must be >= 0, got {l}")
    d = Fraction(p, 2) - (l - r)
    if d.denominator != 1 or d < 0:
        raise InvalidModeIndexError(
            f"(p={p}, l={l}) invalid for n={n}: d = p/2 - (l - r) = {d}")
    return int(d)


def validate_index(index: ModeIndex, n: int) -> int:
    d = mode_degree(index.p, index.l, n)
    if not 0 <= index.j < dim_harmonic(n, index.l):
        raise InvalidModeIndexError(
            f"harmonic index {index.j} out of range for degree {index.l}, n={n}")
    return d


def mode_indices(n: int, p_max: int, l_max=None):
    """All valid labels with p <= p_max, ordered by (p, l, j)."""
    out = []
    p = lowest_energy(n)
    while p <= p_max:
        k = (p - lowest_energy(n)) // 2  # l + d
        top = k if l_max is None else min(k, l_max)
        for l in range(top + 1):
            for j in range(dim_harmonic(n, l)):
                out.append(ModeIndex(p, l, j))
        p += 2
    return out


@lru_cache(maxsize=None)
def shared_basis(n: int, max_degree: int) -> HarmonicBasis:
    return harmonic_basis(n, max_degree)


# ----------------------------------------------------------------------
# Radial polynomial factor
# ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def _radial_ts_poly(p: int, l: int, n: int) -> Poly:
    """g_{p,l} with the classical (un-normalized) Gegenbauer, in compressed
    variables (t, s) with s = ||x||^2.

    Assembled over the integers (one denominator clearing at the end), since
    Fraction convolutions dominate the cost at large degree."""
    d = mode_degree(p, l, n)
    alpha = l - weight(n)
    C_int, den = clear_denominators(gegenbauer(alpha, d))
    one_minus_q = Poly(2, {(0, 0): 1, (2, 0): 1, (0, 1): -1})
    lam2 = one_minus_q * one_minus_q + Poly(2, {(0, 1): 4})
    g = Poly(2)
    lam2_pows = {0: Poly.const(2, 1)}
    omq_pows = {0: Poly.const(2, 1)}
    for (k,), c in C_int.terms.items():
        if (d - k) % 2:
            raise ParameterError("Gegenbauer parity violated")
        half = (d - k) // 2
        if half not in lam2_pows:
            lam2_pows[half] = lam2 ** half
        if k not in omq_pows:
            omq_pows[k] = one_minus_q ** k
        g = g + (lam2_pows[half] * omq_pows[k]).scale(c)
    return g.map_coeff(lambda v: Fraction(v, den))


@lru_cache(maxsize=None)
def normalizer_squared(p: int, l: int, n: int):
    """Exact N^2 = 2^(1-n) * (classical weighted Gegenbauer norm), returned
    as (rational, pi_power)."""
    d = mode_degree(p, l, n)
    alpha = l - weight(n)
    h2, pi_pow = gegenbauer_weighted_norm2(alpha, d)
    return h2 * Fraction(2) ** (1 - n), pi_pow


def mode_norm_constant(p: int, l: int, n: int) -> float:
    """Scalar a_{p,l} multiplying g_{p,l} h_{l,j} / D^(p/2) for unit
    Klein-Gordon norm."""
    n2, pi_pow = normalizer_squared(p, l, n)
    return 2.0 ** l / math.sqrt(p * float(n2) * math.pi ** pi_pow)


@dataclass(frozen=True)
class RadialFactor:
    """The polynomial g_{p,l}: exact rational core plus its normalizer."""

    p: int
    l: int
    n: int
    degree: int               # = 2 d
    ts_poly: Poly             # classical version, variables (t, s = ||x||^2)
    normalizer2: Fraction     # N^2 = normalizer2 * pi**pi_power
    pi_power: int

    @property
    def expanded(self) -> Poly:
        """Classical g as a polynomial in (t, x_1, ..., x_n)."""
        return expand_radial(self.ts_poly, self.n)

    @property
    def normalization(self) -> float:
        """1/N: multiply the classical polynomial by this to normalize."""
        return 1.0 / math.sqrt(float(self.normalizer2) * math.pi ** self.pi_power)


def radial_polynomial(p: int, l: int, n: int) -> RadialFactor:
    d = mode_degree(p, l, n)
    n2, pi_pow = normalizer_squared(p, l, n)
    return RadialFactor(p, l, n, 2 * d, _radial_ts_poly(p, l, n), n2, pi_pow)


# ----------------------------------------------------------------------
# Mode evaluators
# ----------------------------------------------------------------------


def _poly_val(poly: Poly, coords):
    if any(isinstance(c, Jet2) for c in coords):
        return poly.eval(list(coords))
    return evaluate_poly(poly, coords)


class Mode(NoncompactField):
    """Noncompact-picture basis solution f_{p,l,j}."""

    def __init__(self, index: ModeIndex, n: int, basis: HarmonicBasis):
        d = validate_index(index, n)
        self.index = index
        self.d = d
        self.k = index.l + d
        self.harmonic = basis.harmonic(index.l, index.j)
        self.norm_constant = mode_norm_constant(index.p, index.l, n)
        g_ts = _radial_ts_poly(index.p, index.l, n)
        g_ts_dt = g_ts.diff(0)
        hnorm = self.harmonic.normalization(n)
        hpoly = self.harmonic.poly
        scale = self.norm_constant * hnorm
        p = index.p
        expo = -(p // 2) if p % 2 == 0 else -0.5 * p

        def core(t, xs):
            s = _norm_sq(xs)
            g = _poly_val(g_ts, (t, s))
            hv = _poly_val(hpoly, xs)
            D = (1 - 1j * t) * (1 - 1j * t) + s
            return scale * g * hv * D ** expo

        def dt_core(t, xs):
            s = _norm_sq(xs)
            g = _poly_val(g_ts, (t, s))
            gt = _poly_val(g_ts_dt, (t, s))
            hv = _poly_val(hpoly, xs)
            one = 1 - 1j * t
            D = one * one + s
            Dt = -2j * one
            return scale * hv * (gt * D ** expo
                                 + g * expo * D ** (expo - 1) * Dt)

        super().__init__(core, dt_core=dt_core, n=n)


class CylinderMode(CompactField):
    """Compact-picture basis solution F_{p,l,j}; negative p gives the
    complex conjugate (negative-energy) partner."""

    def __init__(self, p: int, l: int, j: int, n: int, basis: HarmonicBasis,
                 sphere_normalized: bool = False):
        ap = abs(p)
        d = validate_index(ModeIndex(ap, l, j), n)
        self.index = ModeIndex(ap, l, j)
        self.p_signed = p
        self.d = d
        self.k = l + d
        self.harmonic = basis.harmonic(l, j)
        alpha = l - weight(n)
        C = gegenbauer(alpha, d)
        n2, pi_pow = normalizer_squared(ap, l, n)
        amp = 1.0 / math.sqrt(ap * float(n2) * math.pi ** pi_pow)
        if sphere_normalized:
            amp *= 2.0 ** float(weight(n)) * math.sqrt(ap)
        self.amplitude = amp
        hnorm = self.harmonic.normalization(n)
        hpoly = self.harmonic.poly

        def core(phi, theta, xs):
            ct = gcos(theta)
            cval = _poly_val(C, (ct,))
            hv = _poly_val(hpoly, xs)
            if l:
                hv = hv * _norm_sq(xs) ** (-0.5 * l)
                cval = cval * gsin(theta) ** l
            return (amp * hnorm) * gexp((0.5j * p) * phi) * cval * hv

        def dphi_core(phi, theta, xs):
            return (0.5j * p) * core(phi, theta, xs)

        super().__init__(core, dphi_core=dphi_core, n=n)


def solution_mode(index: ModeIndex, n: int, basis=None) -> Mode:
    if basis is None:
        basis = shared_basis(n, index.l)
    return Mode(index, n, basis)


def cylinder_mode(p: int, l: int, j: int, n: int, basis=None) -> CylinderMode:
    if basis is None:
        basis = shared_basis(n, l)
    return CylinderMode(p, l, j, n, basis)


def sphere_mode(p: int, l: int, j: int, n: int, basis=None) -> CylinderMode:
    """2^r sqrt(|p|) F_{p,l,j}: the phi = 0 restrictions of these are an
    orthonormal basis of L^2(S^n)."""
    if basis is None:
        basis = shared_basis(n, l)
    return CylinderMode(p, l, j, n, basis, sphere_normalized=True)


def conjugate_field(f: NoncompactField) -> NoncompactField:
    """Pointwise complex conjugate; supports values and time derivatives
    (not jets)."""
    out = NoncompactField(lambda t, xs: np.conj(f.core(t, xs)), n=f.n)
    out.dt = lambda t, X: np.conj(f.dt(t, X))
    return out


# ----------------------------------------------------------------------
# Exact rational representation (n odd)
# ----------------------------------------------------------------------


@dataclass
class RationalMode:
    """g_{p,l} h_{l,j} / D^(p/2) with exact Gaussian-rational coefficients.

    ``numerator / scale`` is the polynomial g_{p,l}(t,x) h_{l,j}(x) with the
    classical Gegenbauer and the un-normalized integer harmonic; the true
    basis solution is this times a known positive constant.
    """

    index: ModeIndex
    n: int
    half_power: int
    numerator: GiPoly
    scale: int

    def box_numerator(self) -> GiPoly:
        """Exact numerator of the wave operator applied to the mode, over
        D^(p/2 + 2); the mode solves the wave equation iff this is zero."""
        return wave_operator_numerator(self.numerator, self.half_power,
                                       denominator_base(self.n))

    def is_exact_solution(self) -> bool:
        return self.box_numerator().is_zero()

    def evaluate(self, t, X):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        pts = [t] + [X[:, i] for i in range(self.n)]
        num = np.array([self.numerator.eval([c[i] for c in pts])
                        for i in range(len(t))])
        D = (1 - 1j * t) ** 2 + np.sum(X ** 2, axis=1)
        return num / self.scale / D ** self.half_power

    def json_entry(self):
        return {
            "p": self.index.p, "l": self.index.l, "j": self.index.j,
            "half_power": self.half_power,
            "scale": self.scale,
            "monomials": [
                {"exponents": list(e), "re": c[0], "im": c[1]}
                for e, c in sorted(self.numerator.coefficients().items())
            ],
        }


def rational_mode(index: ModeIndex, n: int, basis=None) -> RationalMode:
    if n % 2 == 0:
        raise UnsupportedDimensionError(
            "exact rational representation requires odd n (integer weight)")
    validate_index(index, n)
    if basis is None:
        basis = shared_basis(n, index.l)
    g_full = expand_radial(_radial_ts_poly(index.p, index.l, n), n)
    h = basis.harmonic(index.l, index.j).poly
    h_lifted = Poly(n + 1, {(0,) + e: c for e, c in h.terms.items()})
    gi, scale = GiPoly.from_poly(g_full * h_lifted)
    return RationalMode(index, n, index.p // 2, gi, int(scale))


# ----------------------------------------------------------------------
# Sector classification
# ----------------------------------------------------------------------


class Sector(Enum):
    """Which energy signs survive inside the solution space at (n, m)."""

    PLUS = "plus"
    MINUS = "minus"
    BOTH = "both"
    ZERO = "zero"


def sector(n: int, m: int) -> Sector:
    """Positive/negative-energy content of the solution space for the
    discrete parameter m (mod 4)."""
    if n < 2:
        raise UnsupportedDimensionError(f"need n >= 2, got {n}")
    m = m % 4
    if n % 2 == 1:
        return Sector.BOTH if m == (n - 1) % 4 else Sector.ZERO
    if m == (-(n - 1)) % 4:
        return Sector.PLUS
    if m == (n - 1) % 4:
        return Sector.MINUS
    return Sector.ZERO


def default_m(n: int) -> int:
    """The positive-energy-admissible discrete parameter, -(n-1) mod 4."""
    return (-(n - 1)) % 4
