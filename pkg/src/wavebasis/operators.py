"""Infinitesimal symmetries, Casimir identities and the finite group action.

Noncompact picture (functions of (t, x)): the distinguished sl(2) triple

    h  = 2 (r - t dt - sum_i x_i dx_i),
    e+ = -dt,
    e- = 2 t (r - t dt - sum_i x_i dx_i) + q(t, x) dt,       r = (1 - n)/2,

together with the rotations -x_j dx_i + x_i dx_j, their Casimir elements,
and the operator identity

    Omega_sl2 - Omega_rot - r (r + 1) = ||x||^2 box.

These are held as exact symbolic operators (polynomial coefficients times
mixed partials) so the identity can be certified with zero residual; the
same operators also act numerically on smooth evaluators through jets.

Compact picture (functions of (phi, theta, xhat)): the energy operator
z = -2i dphi, the ladder pair

    n(+/-) = e^(+/- i phi) (r cos(theta) +/- i cos(theta) dphi - sin(theta) dtheta),

the first-order generator e+ = -r sin(phi) cos(theta)
- (1 + cos(phi) cos(theta)) dphi + sin(phi) sin(theta) dtheta obtained by
conjugating -dt through the chart maps, and the factorization

    Omega_sl2 - Omega_rot - r(r+1) = sin^2(theta) (Omega_so2 - Omega_so(n+1) - r^2).

A small exact "trig ring" (Laurent powers of e^(i phi/2), polynomials in
cos(theta), one power of sin(theta), tensored with a harmonic of known
degree) certifies the compact-picture identities with rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import ChartBoundaryError, ParameterError
from .exactpoly import Poly, QQi
from .geometry import CompactField, NoncompactField, _norm_sq
from .jets import Jet2, seed, value_of
from .modes import Sector, sector, weight, mode_degree
from .special import gegenbauer

# ----------------------------------------------------------------------
# Symbolic linear differential operators, noncompact picture
# ----------------------------------------------------------------------


def _sub_indices(k):
    """All multi-indices j <= k componentwise."""
    return product(*(range(c + 1) for c in k))


def _multi_binom(k, j):
    out = 1
    for a, b in zip(k, j):
        out *= math.comb(a, b)
    return out


class LinearDiffOp:
    """Sum of (polynomial coefficient) * (mixed partial derivative)."""

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = {}
        for coeff, orders in (terms or []):
            self._add(coeff, tuple(orders))

    def _add(self, coeff, orders):
        if orders in self.terms:
            s = self.terms[orders] + coeff
            if s.is_zero():
                del self.terms[orders]
            else:
                self.terms[orders] = s
        elif not coeff.is_zero():
            self.terms[orders] = coeff

    @classmethod
    def from_scalar(cls, nvars, c):
        return cls(nvars, [(Poly.const(nvars, Fraction(c)), (0,) * nvars)])

    def __add__(self, other):
        out = LinearDiffOp(self.nvars)
        for o, c in self.terms.items():
            out._add(c, o)
        for o, c in other.terms.items():
            out._add(c, o)
        return out

    def __sub__(self, other):
        return self + other.scale(Fraction(-1))

    def scale(self, c):
        out = LinearDiffOp(self.nvars)
        for o, coeff in self.terms.items():
            out._add(coeff.scale(Fraction(c)), o)
        return out

    def left_multiply(self, poly: Poly):
        out = LinearDiffOp(self.nvars)
        for o, coeff in self.terms.items():
            out._add(poly * coeff, o)
        return out

    def compose(self, other):
        """Operator composition self . other, expanded by Leibniz."""
        out = LinearDiffOp(self.nvars)
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                for j in _sub_indices(k1):
                    rest = tuple(a - b for a, b in zip(k1, j))
                    dc2 = c2
                    for var, times in enumerate(rest):
                        for _ in range(times):
                            dc2 = dc2.diff(var)
                    if dc2.is_zero():
                        continue
                    orders = tuple(a + b for a, b in zip(j, k2))
                    out._add((c1 * dc2).scale(Fraction(_multi_binom(k1, j))), orders)
        return out

    def commutator(self, other):
        return self.compose(other) - other.compose(self)

    def is_zero(self):
        return not self.terms

    def apply_poly(self, p: Poly) -> Poly:
        out = Poly(self.nvars)
        for orders, coeff in self.terms.items():
            dp = p
            for var, times in enumerate(orders):
                for _ in range(times):
                    dp = dp.diff(var)
            if not dp.is_zero():
                out = out + coeff * dp
        return out

    def max_order(self):
        return max((sum(o) for o in self.terms), default=0)

    def apply_field(self, field: NoncompactField, t, X):
        """Evaluate (op field) at points via order-2 jets."""
        if self.max_order() > 2:
            raise ParameterError("jet evaluation supports order <= 2 operators")
        t = np.atleast_1d(np.asarray(t, dtype=float))
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        cols = [t] + [X[:, i] for i in range(X.shape[1])]
        jets = seed(*cols)
        out_jet = field.core(jets[0], jets[1:])
        vals = [np.asarray(c, dtype=float) for c in cols]
        total = np.zeros(len(t), dtype=complex)
        for orders, coeff in self.terms.items():
            cval = np.asarray(coeff.eval(vals), dtype=complex)
            deg = sum(orders)
            if not isinstance(out_jet, Jet2):
                if deg == 0:
                    total += cval * out_jet
                continue
            if deg == 0:
                total += cval * out_jet.val
            elif deg == 1:
                i = orders.index(1)
                total += cval * out_jet.grad[i]
            else:
                idx = [i for i, o in enumerate(orders) for _ in range(o)]
                total += cval * out_jet.hess[idx[0], idx[1]]
        return total


def sl2_triple(n: int):
    """(h, e_plus, e_minus) as exact symbolic operators on (t, x)."""
    nv = n + 1
    r = weight(n)
    zero = (0,) * nv

    def e(var):
        o = [0] * nv
        o[var] = 1
        return tuple(o)

    t = Poly.variable(nv, 0, Fraction(1))
    h_terms = [(Poly.const(nv, 2 * r), zero), (t.scale(-2), e(0))]
    for i in range(1, nv):
        h_terms.append((Poly.variable(nv, i, Fraction(-2)), e(i)))
    h = LinearDiffOp(nv, h_terms)

    e_plus = LinearDiffOp(nv, [(Poly.const(nv, Fraction(-1)), e(0))])

    # e- = -2t (r - t dt - sum x dx) + q dt; the dt coefficient assembles to
    # t^2 + ||x||^2, the special conformal Killing field, and [e+, e-] = h.
    q = Poly(nv, {(2,) + (0,) * n: Fraction(-1)})
    for i in range(1, nv):
        ex = [0] * nv
        ex[i] = 2
        q = q + Poly.monomial(nv, ex, Fraction(1))
    em_terms = [(t.scale(-2 * r), zero), (q + (t * t).scale(2), e(0))]
    for i in range(1, nv):
        em_terms.append(((t * Poly.variable(nv, i)).scale(2), e(i)))
    e_minus = LinearDiffOp(nv, em_terms)
    return h, e_plus, e_minus


def rotation_generators(n: int):
    """Operators -x_j dx_i + x_i dx_j for 1 <= i < j <= n, on (t, x)."""
    nv = n + 1
    out = []
    for i in range(1, nv):
        for j in range(i + 1, nv):
            oi = [0] * nv
            oi[i] = 1
            oj = [0] * nv
            oj[j] = 1
            out.append(LinearDiffOp(nv, [
                (Poly.variable(nv, j, Fraction(-1)), tuple(oi)),
                (Poly.variable(nv, i, Fraction(1)), tuple(oj)),
            ]))
    return out


def casimir_sl2(n: int) -> LinearDiffOp:
    h, ep, em = sl2_triple(n)
    hh = h.compose(h).scale(Fraction(1, 4))
    mixed = (ep.compose(em) + em.compose(ep)).scale(Fraction(1, 2))
    return hh + mixed


def casimir_rotations(n: int) -> LinearDiffOp:
    nv = n + 1
    out = LinearDiffOp(nv)
    for L in rotation_generators(n):
        out = out - L.compose(L)
    return out


def wave_operator(n: int) -> LinearDiffOp:
    nv = n + 1
    terms = [(Poly.const(nv, Fraction(-1)), (2,) + (0,) * n)]
    for i in range(1, nv):
        o = [0] * nv
        o[i] = 2
        terms.append((Poly.const(nv, Fraction(1)), tuple(o)))
    return LinearDiffOp(nv, terms)


def casimir_identity_operator(n: int) -> LinearDiffOp:
    """Omega_sl2 - Omega_rot - r(r+1) - ||x||^2 box; identically zero."""
    nv = n + 1
    r = weight(n)
    x2 = Poly(nv)
    for i in range(1, nv):
        ex = [0] * nv
        ex[i] = 2
        x2 = x2 + Poly.monomial(nv, ex, Fraction(1))
    lhs = casimir_sl2(n) - casimir_rotations(n) - LinearDiffOp.from_scalar(nv, r * (r + 1))
    return lhs - wave_operator(n).left_multiply(x2)


def casimir_identity_residual(testfn, pts, n: int):
    """Max | (Omega_sl2 - Omega_rot - r(r+1)) f - ||x||^2 box f |.

    Polynomials are handled exactly (returns 0.0 iff the residual
    polynomial is identically zero); smooth evaluators are sampled at
    ``pts = (t, X)`` via jets.
    """
    op = casimir_identity_operator(n)
    if isinstance(testfn, Poly):
        res = op.apply_poly(testfn)
        if res.is_zero():
            return 0.0
        return max(abs(float(c)) for c in res.terms.values())
    t, X = pts
    vals = op.apply_field(testfn, t, X)
    return float(np.max(np.abs(vals)))


# ----------------------------------------------------------------------
# Compact-picture operators (numeric, via jets)
# ----------------------------------------------------------------------


class CompactDiffOp:
    """Second-order operator on cylinder functions.

    Terms pair a coefficient function of (phi, theta) with an action among
    id, dphi, dtheta, dphi2, dtheta2, dphidtheta and sphere_lap (the
    Laplacian of the xhat-dependence on S^(n-1), computed as the ambient
    Hessian trace of the degree-0 homogeneous extension).
    """

    def __init__(self, n, terms, name=""):
        self.n = n
        self.terms = terms
        self.name = name

    def apply_at(self, field: CompactField, phi, theta, Xhat):
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        Xhat = np.asarray(Xhat, dtype=float)
        if Xhat.ndim == 1:
            Xhat = Xhat[None, :]
        cols = [phi, theta] + [Xhat[:, i] for i in range(Xhat.shape[1])]
        jets = seed(*cols)
        out = field.core(jets[0], jets[1], jets[2:])
        if not isinstance(out, Jet2):
            out = jets[0]._lift(out)
        total = np.zeros(len(phi), dtype=complex)
        for coeff_fn, action in self.terms:
            c = coeff_fn(phi, theta)
            if action == "id":
                total += c * out.val
            elif action == "dphi":
                total += c * out.grad[0]
            elif action == "dtheta":
                total += c * out.grad[1]
            elif action == "dphi2":
                total += c * out.hess[0, 0]
            elif action == "dtheta2":
                total += c * out.hess[1, 1]
            elif action == "dphidtheta":
                total += c * out.hess[0, 1]
            elif action == "sphere_lap":
                lap = sum(out.hess[i, i] for i in range(2, 2 + self.n))
                total += c * lap
            else:
                raise ParameterError(f"unknown action {action}")
        return total

    def __call__(self, field: CompactField) -> CompactField:
        op = self

        def core(phi, theta, xs):
            if any(isinstance(v, Jet2) for v in (phi, theta, *xs)):
                raise ParameterError("operator outputs evaluate pointwise only")
            Xhat = np.stack([np.asarray(v, dtype=float) for v in xs], axis=1)
            return op.apply_at(field, phi, theta, Xhat)

        return CompactField(core, n=field.n)


def energy_operator(n: int) -> CompactDiffOp:
    """z = -2 i dphi; modes are eigenfunctions with eigenvalue p."""
    return CompactDiffOp(n, [(lambda p, t: -2j, "dphi")], name="z")


def raising_operator(n: int) -> CompactDiffOp:
    r = float(weight(n))
    return CompactDiffOp(n, [
        (lambda p, t: r * np.exp(1j * p) * np.cos(t), "id"),
        (lambda p, t: 1j * np.exp(1j * p) * np.cos(t), "dphi"),
        (lambda p, t: -np.exp(1j * p) * np.sin(t), "dtheta"),
    ], name="n+")


def lowering_operator(n: int) -> CompactDiffOp:
    r = float(weight(n))
    return CompactDiffOp(n, [
        (lambda p, t: r * np.exp(-1j * p) * np.cos(t), "id"),
        (lambda p, t: -1j * np.exp(-1j * p) * np.cos(t), "dphi"),
        (lambda p, t: -np.exp(-1j * p) * np.sin(t), "dtheta"),
    ], name="n-")


def energy_ladder(n: int):
    """(z, n_plus, n_minus) in the compact picture."""
    return energy_operator(n), raising_operator(n), lowering_operator(n)


def sl2_casimir_compact(n: int) -> CompactDiffOp:
    r = float(weight(n))
    return CompactDiffOp(n, [
        (lambda p, t: r * (1 + r) - r ** 2 * np.sin(t) ** 2, "id"),
        (lambda p, t: -2 * r * np.cos(t) * np.sin(t), "dtheta"),
        (lambda p, t: -np.sin(t) ** 2, "dphi2"),
        (lambda p, t: np.sin(t) ** 2, "dtheta2"),
    ], name="Omega_sl2")


def so2_casimir(n: int) -> CompactDiffOp:
    return CompactDiffOp(n, [(lambda p, t: -1.0, "dphi2")], name="Omega_so2")


def rot_casimir_compact(n: int) -> CompactDiffOp:
    return CompactDiffOp(n, [(lambda p, t: -1.0, "sphere_lap")], name="Omega_rot")


def sphere_np1_casimir(n: int) -> CompactDiffOp:
    """-Delta_{S^n} in polar form: -(dtheta2 + (n-1) cot dtheta
    + csc^2 Delta_{S^(n-1)}).  Singular at the poles; sample away from them."""
    return CompactDiffOp(n, [
        (lambda p, t: -1.0, "dtheta2"),
        (lambda p, t: -(n - 1) / np.tan(t), "dtheta"),
        (lambda p, t: -1.0 / np.sin(t) ** 2, "sphere_lap"),
    ], name="Omega_so(n+1)")


def factorization_residual(field: CompactField, phi, theta, Xhat, n: int):
    """Max difference between Omega_sl2 - Omega_rot - r(r+1) and
    sin^2(theta) (Omega_so2 - Omega_so(n+1) - r^2) applied to ``field``."""
    r = float(weight(n))
    lhs = sl2_casimir_compact(n).apply_at(field, phi, theta, Xhat) \
        - rot_casimir_compact(n).apply_at(field, phi, theta, Xhat) \
        - r * (r + 1) * field(phi, theta, Xhat)
    s2 = np.sin(np.atleast_1d(theta)) ** 2
    rhs = s2 * (so2_casimir(n).apply_at(field, phi, theta, Xhat)
                - sphere_np1_casimir(n).apply_at(field, phi, theta, Xhat)
                - r ** 2 * field(phi, theta, Xhat))
    return float(np.max(np.abs(lhs - rhs)))


def time_translation_compact(n: int) -> CompactDiffOp:
    """e+ = -dt conjugated to the cylinder:
    -r sin(phi) cos(theta) - (1 + cos(phi) cos(theta)) dphi
    + sin(phi) sin(theta) dtheta."""
    r = float(weight(n))
    return CompactDiffOp(n, [
        (lambda p, t: -r * np.sin(p) * np.cos(t), "id"),
        (lambda p, t: -(1 + np.cos(p) * np.cos(t)), "dphi"),
        (lambda p, t: np.sin(p) * np.sin(t), "dtheta"),
    ], name="e+")


def time_translation_via_chart(F: CompactField, m: int, r: float) -> CompactField:
    """e+ F obtained the long way around: push F to the noncompact picture,
    apply -dt there, pull back.  Cross-checks the closed form above."""
    from .geometry import pull_to_compact, push_to_noncompact

    f = push_to_noncompact(F, r)
    neg_dt = NoncompactField(lambda t, xs: -f._dt_core(t, xs), n=F.n)
    return pull_to_compact(neg_dt, m, r)


# ----------------------------------------------------------------------
# Exact trig ring for compact-picture identities
# ----------------------------------------------------------------------


class TrigPoly:
    """Finite sums  sum c_{k,a,b} E^k cos(theta)^a sin(theta)^b  with E the
    half-angle phase e^(i phi / 2), b in {0, 1}, coefficients in Q[i].

    Elements implicitly multiply a spherical harmonic of degree ``l`` on
    S^(n-1); the sphere Laplacian therefore acts as the scalar -l(l+n-2).
    """

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for key, c in terms.items():
                self._add(key, c)
        self._normalize()

    def _add(self, key, c):
        if key in self.terms:
            s = self.terms[key] + c
            if s:
                self.terms[key] = s
            else:
                del self.terms[key]
        elif c:
            self.terms[key] = c

    def _normalize(self):
        # reduce sin powers: s^2 -> 1 - c^2
        again = True
        while again:
            again = False
            for (k, a, b) in list(self.terms):
                if b >= 2:
                    c = self.terms.pop((k, a, b))
                    self._add((k, a, b - 2), c)
                    self._add((k, a + 2, b - 2), -1 * c)
                    again = True

    def __add__(self, other):
        out = TrigPoly(self.terms)
        for key, c in other.terms.items():
            out._add(key, c)
        return out

    def __sub__(self, other):
        return self + other.scale(QQi(-1))

    def scale(self, c):
        return TrigPoly({k: c * v for k, v in self.terms.items()})

    def mul_mono(self, dk, da, db, c=QQi(1)):
        out = TrigPoly()
        for (k, a, b), v in self.terms.items():
            out._add((k + dk, a + da, b + db), c * v)
        out._normalize()
        return out

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return self.terms == other.terms

    def evaluate(self, phi, theta):
        out = np.zeros(np.broadcast(phi, theta).shape, dtype=complex)
        for (k, a, b), c in self.terms.items():
            out = out + complex(c) * np.exp(0.5j * k * np.asarray(phi)) \
                * np.cos(theta) ** a * np.sin(theta) ** b
        return out


def trig_dphi(u: TrigPoly) -> TrigPoly:
    return TrigPoly({(k, a, b): c * QQi(0, Fraction(k, 2))
                     for (k, a, b), c in u.terms.items()})


def trig_dtheta(u: TrigPoly) -> TrigPoly:
    out = TrigPoly()
    for (k, a, b), c in u.terms.items():
        if a:
            out._add((k, a - 1, b + 1), QQi(-a) * c)
        if b:
            out._add((k, a + 1, b - 1), QQi(b) * c)
    out._normalize()
    return out


def trig_mode(p: int, l: int, n: int) -> TrigPoly:
    """E^p * C^(l-r)_d(cos theta) * sin^l theta, exact classical form."""
    d = mode_degree(abs(p), l, n)
    C = gegenbauer(l - weight(n), d)
    out = TrigPoly()
    for (a,), c in C.terms.items():
        out._add((p, a, l), QQi(c))
    out._normalize()
    return out


class TrigOperators:
    """Exact compact-picture operators at fixed harmonic degree l."""

    def __init__(self, n: int, l: int):
        self.n = n
        self.l = l
        self.r = weight(n)
        self.rot_eigen = Fraction(l * (l + n - 2))  # eigenvalue of -Delta_{S^(n-1)}

    def z(self, u):
        return trig_dphi(u).scale(QQi(0, -2))

    def ladder(self, sign, u):
        r = self.r
        a = u.mul_mono(2 * sign, 1, 0, QQi(r))
        b = trig_dphi(u).mul_mono(2 * sign, 1, 0, QQi(0, Fraction(sign)))
        c = trig_dtheta(u).mul_mono(2 * sign, 0, 1, QQi(-1))
        return a + b + c

    def sl2_casimir(self, u):
        r = self.r
        out = u.scale(QQi(r * (1 + r)))
        out = out - u.mul_mono(0, 0, 2, QQi(r * r))
        out = out - trig_dtheta(u).mul_mono(0, 1, 1, QQi(2 * r))
        dphi2 = trig_dphi(trig_dphi(u))
        dth2 = trig_dtheta(trig_dtheta(u))
        out = out - dphi2.mul_mono(0, 0, 2)
        out = out + dth2.mul_mono(0, 0, 2)
        return out

    def identity_lhs(self, u):
        """Omega_sl2 - Omega_rot - r(r+1), with Omega_rot = +l(l+n-2)."""
        return self.sl2_casimir(u) - u.scale(QQi(self.rot_eigen)) \
            - u.scale(QQi(self.r * (self.r + 1)))

    def identity_rhs(self, u):
        """sin^2 (Omega_so2 - Omega_so(n+1) - r^2).  The csc^2 factor in the
        polar form of Delta_{S^n} cancels against the sin^2 prefactor, which
        is what keeps this inside the ring."""
        dphi2 = trig_dphi(trig_dphi(u))
        out = dphi2.mul_mono(0, 0, 2).scale(QQi(-1))             # sin^2 * Omega_so2
        # sin^2 * Delta_{S^n}:
        lap = trig_dtheta(trig_dtheta(u)).mul_mono(0, 0, 2)
        lap = lap + trig_dtheta(u).mul_mono(0, 1, 1, QQi(self.n - 1))
        lap = lap - u.scale(QQi(self.rot_eigen))
        out = out + lap
        out = out - u.mul_mono(0, 0, 2, QQi(self.r * self.r))
        return out

    def factorization_residual(self, u):
        return self.identity_lhs(u) - self.identity_rhs(u)


# ----------------------------------------------------------------------
# Finite group action
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GroupElement:
    """An element (sl2 matrix, rotation) acting with discrete class m and
    weight r."""

    sl2: np.ndarray
    rot: np.ndarray
    m: int
    r: float

    def __post_init__(self):
        sl2 = np.asarray(self.sl2, dtype=float)
        rot = np.asarray(self.rot, dtype=float)
        if sl2.shape != (2, 2) or abs(np.linalg.det(sl2) - 1.0) > 1e-12:
            raise ParameterError("sl2 block must be 2x2 with determinant 1")
        nn = rot.shape[0]
        if rot.shape != (nn, nn) or np.max(np.abs(rot.T @ rot - np.eye(nn))) > 1e-12 \
                or np.linalg.det(rot) < 0:
            raise ParameterError("rotation block must be in SO(n)")
        object.__setattr__(self, "sl2", sl2)
        object.__setattr__(self, "rot", rot)


def _sqrt_sign_delta(delta, a_ct, c_norm, m, tol):
    """(sqrt(sgn delta))^m with the three-region rule: +1 where delta > 0 and
    a - c t > c ||x||, -1 where delta > 0 otherwise, i where delta < 0."""
    if np.any(np.abs(delta) <= tol):
        raise ChartBoundaryError("group action evaluated on its light cone (delta = 0)")
    root = np.where(delta > 0, np.where(a_ct > c_norm, 1.0 + 0j, -1.0 + 0j), 1j)
    return root ** (m % 4)


def group_act(g: GroupElement, f: NoncompactField, tol: float = 1e-12) -> NoncompactField:
    """The transformed solution

        (g f)(t, x) = (sqrt(sgn delta))^m |delta|^r
                      f( ((-b + d t)(a - c t) + c d ||x||^2) / delta, x k / delta ),

    with delta = (a - c t)^2 - c^2 ||x||^2."""
    a, b = float(g.sl2[0, 0]), float(g.sl2[0, 1])
    c, d = float(g.sl2[1, 0]), float(g.sl2[1, 1])
    rot = g.rot

    def core(t, xs):
        s = _norm_sq(xs)
        a_ct = a - c * t
        delta = a_ct * a_ct - (c * c) * s
        dval = np.real(value_of(delta))
        phase = _sqrt_sign_delta(dval, np.real(value_of(a_ct)),
                                 c * np.sqrt(np.abs(np.real(value_of(s)))), g.m, tol)
        absdelta = delta * np.sign(dval)
        t_new = ((d * t - b) * a_ct + (c * d) * s) / delta
        x_new = [sum(xs[k] * rot[k, i] for k in range(len(xs))) / delta
                 for i in range(len(xs))]
        return phase * absdelta ** g.r * f.core(t_new, x_new)

    return NoncompactField(core, n=f.n)


def ktype_allows(n: int, m: int, p: int, l: int) -> bool:
    """Whether the energy level (p, l) occurs in the solution space at
    (n, m): positive p needs the positive-energy sector, negative p the
    negative-energy one, and (|p|, l) must be a valid label."""
    try:
        mode_degree(abs(p), l, n)
    except Exception:
        return False
    s = sector(n, m)
    if p > 0:
        return s in (Sector.PLUS, Sector.BOTH)
    if p < 0:
        return s in (Sector.MINUS, Sector.BOTH)
    return False
