"""Exact sparse polynomial arithmetic.

Three layers, all exact:

* ``Poly`` -- sparse multivariate polynomials whose coefficients are any
  exact ring elements (``int``, ``Fraction``, ``QQi``).  Used to build
  harmonic polynomials, Gegenbauer polynomials and differential-operator
  coefficients.
* ``QQi`` -- Gaussian rationals a + b*i with ``Fraction`` parts.
* ``GiPoly`` -- a polynomial with Gaussian-integer coefficients stored as a
  (real, imaginary) pair of integer coefficient dicts.  This is the fast
  representation behind the exact wave-operator certificates, where the
  denominator is a power of D(t, x) = (1 - i t)**2 + ||x||**2.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm


class QQi:
    """Gaussian rational number re + im*i."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, other):
        other = _as_qqi(other)
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_as_qqi(other))

    def __rsub__(self, other):
        return _as_qqi(other) + (-self)

    def __mul__(self, other):
        other = _as_qqi(other)
        return QQi(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_qqi(other)
        den = other.re * other.re + other.im * other.im
        return QQi((self.re * other.re + self.im * other.im) / den,
                   (self.im * other.re - self.re * other.im) / den)

    def __eq__(self, other):
        other = _as_qqi(other)
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"


def _as_qqi(v):
    if isinstance(v, QQi):
        return v
    if isinstance(v, complex):
        return QQi(Fraction(v.real), Fraction(v.imag))
    return QQi(Fraction(v))


def _add_term(terms, e, c):
    if e in terms:
        s = terms[e] + c
        if s:
            terms[e] = s
        else:
            del terms[e]
    elif c:
        terms[e] = c


def _mul_dicts(a, b):
    """Convolution of two sparse coefficient dicts."""
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(i + j for i, j in zip(ea, eb))
            c = ca * cb
            if e in out:
                s = out[e] + c
                if s:
                    out[e] = s
                else:
                    del out[e]
            elif c:
                out[e] = c
    return out


def _diff_dict(a, var):
    out = {}
    for e, c in a.items():
        k = e[var]
        if k:
            e2 = e[:var] + (k - 1,) + e[var + 1:]
            _add_term(out, e2, c * k)
    return out


class Poly:
    """Sparse polynomial in ``nvars`` variables with exact coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = dict(terms) if terms else {}

    @classmethod
    def const(cls, nvars, c):
        p = cls(nvars)
        if c:
            p.terms[(0,) * nvars] = c
        return p

    @classmethod
    def variable(cls, nvars, i, c=1):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): c})

    @classmethod
    def monomial(cls, nvars, exponents, c=1):
        return cls(nvars, {tuple(exponents): c} if c else None)

    def copy(self):
        return Poly(self.nvars, self.terms)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            _add_term(out, e, c)
        return Poly(self.nvars, out)

    def __sub__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            _add_term(out, e, -c)
        return Poly(self.nvars, out)

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(self.nvars, _mul_dicts(self.terms, other.terms))
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c):
        if not c:
            return Poly(self.nvars)
        return Poly(self.nvars, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power")
        out = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def diff(self, var):
        return Poly(self.nvars, _diff_dict(self.terms, var))

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def eval(self, values):
        """Evaluate at a point; works on numbers, numpy arrays and jets."""
        total = 0
        for e, c in self.terms.items():
            term = _to_number(c)
            for v, k in zip(values, e):
                if k == 1:
                    term = term * v
                elif k:
                    term = term * v ** k
            total = total + term
        return total

    def map_coeff(self, fn):
        out = {}
        for e, c in self.terms.items():
            v = fn(c)
            if v:
                out[e] = v
        return Poly(self.nvars, out)

    def __repr__(self):
        items = sorted(self.terms.items())
        return "Poly(" + " + ".join(f"{c}*x^{e}" for e, c in items[:8]) \
            + (" + ..." if len(items) > 8 else "") + ")"


def _to_number(c):
    if isinstance(c, QQi):
        return complex(c)
    if isinstance(c, Fraction):
        return float(c)
    return c


def clear_denominators(p: Poly):
    """(integer-coefficient Poly, den) with p = int_poly / den; Fraction
    coefficients only."""
    dens = [c.denominator for c in p.terms.values()]
    m = lcm(*dens) if dens else 1
    return Poly(p.nvars, {e: int(c * m) for e, c in p.terms.items()}), m


def polynomial_laplacian(p: Poly, first_var=0) -> Poly:
    """Sum of second partials over variables first_var..nvars-1."""
    out = Poly(p.nvars)
    for i in range(first_var, p.nvars):
        out = out + p.diff(i).diff(i)
    return out


def euler_degree_apply(p: Poly, first_var=0) -> Poly:
    """Apply sum_i x_i d/dx_i over variables first_var..nvars-1."""
    out = Poly(p.nvars)
    for i in range(first_var, p.nvars):
        out = out + Poly.variable(p.nvars, i) * p.diff(i)
    return out


# ----------------------------------------------------------------------
# Gaussian-integer polynomials and exact wave-operator certificates
# ----------------------------------------------------------------------

class GiPoly:
    """Polynomial with Gaussian-integer coefficients, split into parts.

    ``re`` and ``im`` map exponent tuples to Python ints.  Kept separate so
    the (common) purely real case multiplies with no complex overhead.
    """

    __slots__ = ("nvars", "re", "im")

    def __init__(self, nvars, re=None, im=None):
        self.nvars = nvars
        self.re = re if re is not None else {}
        self.im = im if im is not None else {}

    @classmethod
    def from_poly(cls, p: Poly):
        """Clear denominators of a Fraction/QQi ``Poly``; scale is dropped."""
        dens = []
        for c in p.terms.values():
            if isinstance(c, QQi):
                dens.append(c.re.denominator)
                dens.append(c.im.denominator)
            elif isinstance(c, Fraction):
                dens.append(c.denominator)
            else:
                dens.append(1)
        m = lcm(*dens) if dens else 1
        re, im = {}, {}
        for e, c in p.terms.items():
            if isinstance(c, QQi):
                a = c.re * m
                b = c.im * m
                if a:
                    re[e] = int(a)
                if b:
                    im[e] = int(b)
            else:
                a = Fraction(c) * m
                if a:
                    re[e] = int(a)
        return cls(p.nvars, re, im), m

    def is_zero(self):
        return not self.re and not self.im

    def __add__(self, other):
        re = dict(self.re)
        im = dict(self.im)
        for e, c in other.re.items():
            _add_term(re, e, c)
        for e, c in other.im.items():
            _add_term(im, e, c)
        return GiPoly(self.nvars, re, im)

    def __sub__(self, other):
        re = dict(self.re)
        im = dict(self.im)
        for e, c in other.re.items():
            _add_term(re, e, -c)
        for e, c in other.im.items():
            _add_term(im, e, -c)
        return GiPoly(self.nvars, re, im)

    def __neg__(self):
        return GiPoly(self.nvars,
                      {e: -c for e, c in self.re.items()},
                      {e: -c for e, c in self.im.items()})

    def scale(self, k):
        if not k:
            return GiPoly(self.nvars)
        return GiPoly(self.nvars,
                      {e: k * c for e, c in self.re.items()},
                      {e: k * c for e, c in self.im.items()})

    def __mul__(self, other):
        # (A + iB)(C + iD) = (AC - BD) + i(AD + BC); skip empty parts.
        a, b, c, d = self.re, self.im, other.re, other.im
        re = _mul_dicts(a, c) if a and c else {}
        if b and d:
            for e, v in _mul_dicts(b, d).items():
                _add_term(re, e, -v)
        im = _mul_dicts(a, d) if a and d else {}
        if b and c:
            for e, v in _mul_dicts(b, c).items():
                _add_term(im, e, v)
        return GiPoly(self.nvars, re, im)

    def diff(self, var):
        return GiPoly(self.nvars, _diff_dict(self.re, var), _diff_dict(self.im, var))

    def n_terms(self):
        return len(self.re) + len(self.im)

    def eval(self, values):
        tot = 0.0 + 0.0j
        for part, unit in ((self.re, 1.0), (self.im, 1.0j)):
            for e, c in part.items():
                term = unit * c
                for v, k in zip(values, e):
                    if k:
                        term = term * v ** k
                tot = tot + term
        return tot

    def coefficients(self):
        """Exponent -> (re, im) integer pairs, merged over both parts."""
        out = {e: [c, 0] for e, c in self.re.items()}
        for e, c in self.im.items():
            out.setdefault(e, [0, 0])[1] = c
        return {e: tuple(v) for e, v in out.items()}


def denominator_base(n: int) -> GiPoly:
    """D(t, x) = (1 - i t)**2 + ||x||**2 over variables (t, x1..xn)."""
    nv = n + 1
    zero = (0,) * nv
    re = {zero: 1, (2,) + (0,) * n: -1}
    for i in range(n):
        e = [0] * nv
        e[1 + i] = 2
        re[tuple(e)] = 1
    im = {(1,) + (0,) * n: -2}
    return GiPoly(nv, re, im)


def rational_diff(num: GiPoly, power: int, D: GiPoly, dD: GiPoly, var: int):
    """d/dvar of num/D**power by the quotient rule: returns new numerator
    over D**(power+1)."""
    return num.diff(var) * D - num.scale(power) * dD


def wave_operator_numerator_slow(num: GiPoly, power: int, D: GiPoly):
    """Numerator of box(num/D**power) over D**(power+2), by differentiating
    the quotient rule twice per variable.  Reference path."""
    nv = num.nvars
    total = GiPoly(nv)
    for var in range(nv):
        dD = D.diff(var)
        n1 = rational_diff(num, power, D, dD, var)
        n2 = rational_diff(n1, power + 1, D, dD, var)
        total = total - n2 if var == 0 else total + n2
    return total


def wave_operator_numerator(num: GiPoly, power: int, D: GiPoly):
    """Numerator of box(num/D**power) over D**(power+2).

    Same value as :func:`wave_operator_numerator_slow` (asserted in tests)
    with the quotient rule pre-assembled so that only short polynomials ever
    multiply the large numerator.
    """
    nv = num.nvars
    P = power
    dD = [D.diff(v) for v in range(nv)]
    dN = [num.diff(v) for v in range(nv)]

    def box_of(derivs):
        out = GiPoly(nv)
        for v in range(nv):
            dd = derivs[v].diff(v)
            out = out - dd if v == 0 else out + dd
        return out

    box_n = box_of(dN)
    box_d = box_of(dD)
    # S = -N_t D_t + sum_i N_i D_i ; W = -D_t**2 + sum_i D_i**2
    S = GiPoly(nv)
    W = GiPoly(nv)
    for v in range(nv):
        s = dN[v] * dD[v]
        w = dD[v] * dD[v]
        if v == 0:
            S = S - s
            W = W - w
        else:
            S = S + s
            W = W + w
    E = box_n * (D * D)
    E = E - (S * D).scale(2 * P)
    E = E - (box_d * D * num).scale(P)
    E = E + (W * num).scale(P * (P + 1))
    return E


def expand_radial(tspoly: Poly, n: int) -> Poly:
    """Expand a Poly in (t, s) with s = ||x||**2 into a Poly in (t, x1..xn)."""
    nv = n + 1
    sq = Poly(nv)
    for i in range(n):
        sq = sq + Poly.monomial(nv, [0] * (1 + i) + [2] + [0] * (n - 1 - i), Fraction(1))
    max_b = max((e[1] for e in tspoly.terms), default=0)
    sq_pows = [Poly.const(nv, Fraction(1))]
    for _ in range(max_b):
        sq_pows.append(sq_pows[-1] * sq)
    out = Poly(nv)
    for (a, b), c in tspoly.terms.items():
        out = out + (sq_pows[b] * Poly.monomial(nv, [a] + [0] * n, Fraction(c)))
    return out
