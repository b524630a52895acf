"""Coordinates and chart transforms between the two pictures.

Noncompact picture: functions of (t, x) on Minkowski space R^{1,n}.
Compact picture: functions of (phi, theta, xhat) on the cylinder
R x S^n, with S^n parametrized by a polar angle theta in [0, pi] and a unit
vector xhat in S^{n-1}; phi is carried as an unreduced real (the cylinder is
a double cover, so functions may be 4*pi-periodic in phi).

The chart maps are

    t = sin(phi) / (cos(phi) + cos(theta)),   x = xhat sin(theta) / (cos(phi) + cos(theta)),

with inverse phi = sgn(t) arccos((1+q)/lam), theta = arccos((1-q)/lam) where
q = -t^2 + ||x||^2 and lam = ((1-q)^2 + 4||x||^2)^(1/2).  Function transport
carries a weight |(cos phi + cos theta)/2|^r and a locally constant fourth
root of unity gamma(j)^(-m), gamma(j) = i^j; the integer j in Z_4 jumps only
across chart-cell boundaries, where these transforms refuse to evaluate.
"""

from __future__ import annotations

import numpy as np

from .errors import ChartBoundaryError, ParameterError, PoleError
from .jets import Jet2, garccos, gcos, gsin, gsqrt, seed, value_of

BOUNDARY_TOL = 1e-12


def _norm_sq(xs):
    out = xs[0] * xs[0]
    for c in xs[1:]:
        out = out + c * c
    return out


def _columns(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    return [X[:, i] for i in range(X.shape[1])]


def minkowski_interval(t, x):
    """q(t, x) = -t^2 + ||x||^2; works on arrays and jets."""
    xs = x if isinstance(x, (list, tuple)) else _columns(x)
    return _norm_sq(xs) - t * t


def embedding_radius(t, x):
    """lam(t, x) = ((1 - q)^2 + 4 ||x||^2)^(1/2); strictly positive."""
    xs = x if isinstance(x, (list, tuple)) else _columns(x)
    q = _norm_sq(xs) - t * t
    val = gsqrt((1 - q) * (1 - q) + 4 * _norm_sq(xs))
    if not isinstance(val, Jet2):
        assert np.all(value_of(val) > 0.0)
    return val


def cone_embedding(t, x):
    """iota(t, x) = (2t, 1+q, -1+q, 2x), a point on the cone
    ||first two|| = ||rest|| in R^{2 + (n+1)}."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    X = np.asarray(x, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    q = -t ** 2 + np.sum(X ** 2, axis=1)
    return np.concatenate(
        [2 * t[:, None], (1 + q)[:, None], (-1 + q)[:, None], 2 * X], axis=1)


def cover_phase(phi, b0, tol: float = BOUNDARY_TOL):
    """The Z_4 class j(phi, b0) fixing the fourth-root-of-unity factor.

    j = 0 for cos(phi) > b0 with cos(phi/2) > 0, j = 2 for cos(phi) > b0
    with cos(phi/2) < 0, j = 1 / j = 3 for cos(phi) < b0 with sin(phi/2)
    positive / negative.  Raises on inputs within ``tol`` of a cell
    boundary, where j is genuinely discontinuous.
    """
    phi = np.asarray(phi, dtype=float)
    b0 = np.asarray(b0, dtype=float)
    gap = np.cos(phi) - b0
    ch = np.cos(phi / 2.0)
    sh = np.sin(phi / 2.0)
    if np.any(np.abs(gap) <= tol):
        raise ChartBoundaryError("cos(phi) - b0 vanishes: chart-cell boundary")
    pos = gap > 0
    if np.any(np.where(pos, np.abs(ch), np.abs(sh)) <= tol):
        raise ChartBoundaryError("phi/2 sits on a cell-interval endpoint")
    j = np.where(pos, np.where(ch > 0, 0, 2), np.where(sh > 0, 1, 3))
    return j if j.shape else int(j)


def to_compact(t, x, tol: float = BOUNDARY_TOL):
    """Map (t, x) to cylinder coordinates (phi, theta, xhat).

    phi lands in [-pi, pi] and theta in [0, pi]; the image always lies in
    the j = 0 chart cell (cos(phi) + cos(theta) = 2/lam > 0).  sgn(0) is
    taken as +1 so the Cauchy slice t = 0 maps to phi = 0.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    X = np.asarray(x, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    rho = np.sqrt(np.sum(X ** 2, axis=1))
    if np.any(rho == 0.0):
        raise PoleError("x = 0: direction xhat undefined; use a limit path")
    q = -t ** 2 + rho ** 2
    lam = np.sqrt((1 - q) ** 2 + 4 * rho ** 2)
    _clamped((1 + q) / lam, tol)
    _clamped((1 - q) / lam, tol)
    # arctan2 forms of sgn(t) arccos((1+q)/lam) and arccos((1-q)/lam):
    # sin(phi) = 2t/lam, cos(phi) = (1+q)/lam, sin(theta) = 2 rho / lam >= 0
    phi = np.arctan2(2 * t, 1 + q)
    theta = np.arctan2(2 * rho, 1 - q)
    xhat = X / rho[:, None]
    return phi, theta, xhat


def _clamped(u, tol):
    if np.any(np.abs(u) > 1.0 + tol):
        raise ChartBoundaryError("arccos argument outside [-1, 1]")
    return np.clip(u, -1.0, 1.0)


def from_compact(phi, theta, xhat, tol: float = BOUNDARY_TOL):
    """Map cylinder coordinates to (t, x); undefined where
    cos(phi) + cos(theta) = 0 (the slice at spatial infinity)."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    Xh = np.asarray(xhat, dtype=float)
    if Xh.ndim == 1:
        Xh = Xh[None, :]
    norms = np.sqrt(np.sum(Xh ** 2, axis=1))
    if np.any(np.abs(norms - 1.0) > 1e-10):
        raise ParameterError("xhat must be a unit vector")
    c = np.cos(phi) + np.cos(theta)
    if np.any(np.abs(c) <= tol):
        raise ChartBoundaryError("cos(phi) + cos(theta) = 0: infinity chart")
    t = np.sin(phi) / c
    X = Xh / norms[:, None] * (np.sin(theta) / c)[:, None]
    return t, X


# ----------------------------------------------------------------------
# Function transport
# ----------------------------------------------------------------------


class NoncompactField:
    """A smooth function of (t, x) with a generic-arithmetic core.

    ``core(t, xs)`` takes the time value and a list of n spatial components
    and must be written so that jets pass through it; this single body then
    serves plain evaluation, time derivatives and second-order operators.
    """

    def __init__(self, core, dt_core=None, n=None):
        self.core = core
        self._dt_core = dt_core
        self.n = n

    def __call__(self, t, X):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return value_of(self.core(t, _columns(X)))

    def dt(self, t, X):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        xs = _columns(X)
        if self._dt_core is not None:
            return value_of(self._dt_core(t, xs))
        (tj,) = seed(t)
        out = self.core(tj, xs)
        return out.grad[0] if isinstance(out, Jet2) else np.zeros_like(t)

    def jet(self, t_and_xs):
        return self.core(t_and_xs[0], list(t_and_xs[1:]))


class CompactField:
    """A smooth function of (phi, theta, xhat) with a generic core.

    ``core(phi, theta, xs)`` receives ambient components ``xs`` that need
    not be normalized; cores extend to x != 0 by homogeneity of degree zero,
    which is what lets a plain ambient Hessian compute sphere Laplacians.
    """

    def __init__(self, core, dphi_core=None, n=None):
        self.core = core
        self._dphi_core = dphi_core
        self.n = n

    def __call__(self, phi, theta, Xhat):
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return value_of(self.core(phi, theta, _columns(Xhat)))

    def dphi(self, phi, theta, Xhat):
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        xs = _columns(Xhat)
        if self._dphi_core is not None:
            return value_of(self._dphi_core(phi, theta, xs))
        (pj,) = seed(phi)
        out = self.core(pj, theta, xs)
        return out.grad[0] if isinstance(out, Jet2) else np.zeros_like(phi)

    def jet(self, phi, theta, xs):
        return self.core(phi, theta, xs)


def pull_to_compact(f: NoncompactField, m: int, r: float) -> CompactField:
    """Transport a noncompact function to the cylinder:

        F(phi, theta, xhat) = gamma(j)^(-m) |(cos phi + cos theta)/2|^r
                              f(sin phi / c, xhat sin theta / c),

    with c = cos(phi) + cos(theta), j the Z_4 cover phase at b0 = -cos(theta)
    and gamma(j) = i^j.  The exponent -m (rather than +m) is what makes the
    positive-energy modes land in the discrete class m = -(n-1) mod 4 of the
    sector tables; this is verified against direct cone-chart evaluation in
    the tests."""

    def core(phi, theta, xs):
        c = gcos(phi) + gcos(theta)
        cval = np.real(value_of(c))
        if np.any(np.abs(cval) <= BOUNDARY_TOL):
            raise ChartBoundaryError("evaluation on the infinity chart boundary")
        j = cover_phase(np.real(value_of(phi)), -np.real(value_of(gcos(theta))))
        phase = 1j ** ((-m * np.asarray(j)) % 4)
        sign = np.sign(cval)
        half = c * (0.5 * sign)          # |c/2|, sign locally constant
        st_over_c = gsin(theta) / c
        norm = gsqrt(_norm_sq(xs))
        t_arg = gsin(phi) / c
        x_args = [xi / norm * st_over_c for xi in xs]
        return phase * half ** r * f.core(t_arg, x_args)

    return CompactField(core, n=f.n)


def push_to_noncompact(F: CompactField, r: float) -> NoncompactField:
    """Transport a cylinder function back: f(t, x) = lam^r F(phi, theta, xhat).

    The image chart is the j = 0 cell, so no phase appears.  The analytic
    time derivative uses d(phi)/dt = 1 + cos(phi) cos(theta),
    d(theta)/dt = -sin(phi) sin(theta) and d(lam)/dt = 2 t cos(theta).
    """

    def _angles(t, xs):
        q = _norm_sq(xs) - t * t
        lam = gsqrt((1 - q) * (1 - q) + 4 * _norm_sq(xs))
        u = (1 + q) / lam
        w = (1 - q) / lam
        if not isinstance(u, Jet2):
            u = _clamped(u, BOUNDARY_TOL)
            w = _clamped(w, BOUNDARY_TOL)
        sgn = np.where(np.real(value_of(t)) >= 0.0, 1.0, -1.0)
        phi = sgn * garccos(u)
        theta = garccos(w)
        return phi, theta, lam

    def core(t, xs):
        phi, theta, lam = _angles(t, xs)
        return lam ** r * F.core(phi, theta, xs)

    def dt_core(t, xs):
        phi, theta, lam = _angles(t, xs)
        pv, tv = value_of(phi), value_of(theta)
        (pj, tj) = seed(pv, tv)
        out = F.core(pj, tj, [value_of(xi) for xi in xs])
        if isinstance(out, Jet2):
            fval, fphi, ftheta = out.val, out.grad[0], out.grad[1]
        else:
            fval, fphi, ftheta = out, 0.0, 0.0
        ct, st = np.cos(tv), np.sin(tv)
        lamv = value_of(lam)
        return lamv ** r * (2.0 * r * value_of(t) * ct / lamv * fval
                            + (1.0 + np.cos(pv) * ct) * fphi
                            - np.sin(pv) * st * ftheta)

    return NoncompactField(core, dt_core=dt_core, n=F.n)
