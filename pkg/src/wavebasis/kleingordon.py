"""Klein-Gordon inner product in both pictures, Gram matrices, quadrature.

The pairing on solutions is

    <f1, f2> = i * integral_{R^n} (conj(dt f1) f2 - conj(f1) dt f2) |_{t=t0} dx,

independent of t0 (t0 = 0 by default).  Two quadrature routes are kept:

* the substitution ||x|| = tan(theta/2) maps the slice integral onto
  [0, pi] x S^(n-1); for basis-mode pairs the transformed integrand is a
  polynomial in cos(theta) times spherical harmonics, so the product rule
  used here is exact up to rounding;
* a direct radial Gauss-Legendre rule on [0, R] with a power-law tail
  estimate, retained as an independent cross-check.

On the cylinder the same pairing is

    <f1, f2> = i 2^(1-n) * integral_{[0,pi] x S^(n-1)}
               (conj(dphi F1) F2 - conj(F1) dphi F2)|_{phi=0} sin^(n-1)(theta) dtheta dxhat.

(The slice substitution above derives this constant; with it, the basis
modes come out exactly orthonormal in both pictures.)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .geometry import CompactField, NoncompactField
from .modes import cylinder_mode, shared_basis, solution_mode
from .operators import GroupElement, group_act
from .special import SphereGrid, gauss_legendre, gegenbauer_rule, sphere_grid


@dataclass(frozen=True)
class SliceGrid:
    """Quadrature on the t = 0 slice in tan(theta/2) radial coordinates.

    ``theta_weight`` integrates f(theta) sin^(n-1)(theta) dtheta over
    [0, pi]; the noncompact weights fold in the Jacobian (lam/2)^n of the
    radial substitution, lam = sec^2(theta/2).
    """

    n: int
    theta: np.ndarray
    theta_weight: np.ndarray
    sphere: SphereGrid

    @property
    def radii(self):
        return np.tan(self.theta / 2.0)

    def slice_points(self):
        """All grid points x = xhat * tan(theta/2), shape (B, n)."""
        r = self.radii
        pts = self.sphere.points[None, :, :] * r[:, None, None]
        return pts.reshape(-1, self.n)

    def compact_points(self):
        """(theta_b, xhat_b) broadcast to the full product grid."""
        ns = len(self.sphere.points)
        theta_b = np.repeat(self.theta, ns)
        xhat_b = np.tile(self.sphere.points, (len(self.theta), 1))
        return theta_b, xhat_b

    def weights_compact(self):
        return (self.theta_weight[:, None] * self.sphere.weights[None, :]).reshape(-1)

    def weights_noncompact(self):
        lam = 1.0 / np.cos(self.theta / 2.0) ** 2
        wtheta = self.theta_weight * (lam / 2.0) ** self.n
        return (wtheta[:, None] * self.sphere.weights[None, :]).reshape(-1)


def slice_grid(n: int, max_k: int, max_l=None, theta_nodes=None,
               sphere_degree=None) -> SliceGrid:
    """Grid sized for mode pairs up to energy level k = p/2 + r <= max_k."""
    if max_l is None:
        max_l = max_k
    if theta_nodes is None:
        theta_nodes = (2 * max_k + n + 8) // 2 + 2
    if sphere_degree is None:
        sphere_degree = 2 * max_l + 2
    u, wu = gegenbauer_rule(theta_nodes, (n - 1) / 2.0)
    order = np.argsort(-u)           # theta increasing
    return SliceGrid(n, np.arccos(u[order]), wu[order], sphere_grid(n, sphere_degree))


def kg_inner_noncompact(f1: NoncompactField, f2: NoncompactField,
                        grid: SliceGrid, t0: float = 0.0) -> complex:
    """Slice pairing via the tan(theta/2) substitution (exact for modes)."""
    X = grid.slice_points()
    t = np.full(len(X), float(t0))
    w = grid.weights_noncompact()
    v1, d1 = f1(t, X), f1.dt(t, X)
    v2, d2 = f2(t, X), f2.dt(t, X)
    return complex(1j * np.sum(w * (np.conj(d1) * v2 - np.conj(v1) * d2)))


def kg_inner_compact(F1: CompactField, F2: CompactField, grid: SliceGrid) -> complex:
    """Cylinder-slice pairing with the 2^(1-n) normalization."""
    theta_b, xhat_b = grid.compact_points()
    phi0 = np.zeros_like(theta_b)
    w = grid.weights_compact()
    v1, d1 = F1(phi0, theta_b, xhat_b), F1.dphi(phi0, theta_b, xhat_b)
    v2, d2 = F2(phi0, theta_b, xhat_b), F2.dphi(phi0, theta_b, xhat_b)
    s = np.sum(w * (np.conj(d1) * v2 - np.conj(v1) * d2))
    return complex(1j * 2.0 ** (1 - grid.n) * s)


def kg_inner_radial(f1: NoncompactField, f2: NoncompactField, n: int,
                    radius: float = 40.0, radial_nodes: int = 400,
                    sphere_degree: int = 12, t0: float = 0.0):
    """Direct radial route on [0, R]: returns (value, tail_estimate).

    The tail is estimated by fitting a power law to the shell integrand at
    the outer edge; it diverges (numpy inf) when the integrand fails to
    decay faster than 1/rho.
    """
    sph = sphere_grid(n, sphere_degree)
    u, wu = gauss_legendre(radial_nodes)
    rho = 0.5 * radius * (u + 1.0)
    wr = 0.5 * radius * wu

    def shell(r):
        X = sph.points * r
        t = np.full(len(X), float(t0))
        br = np.conj(f1.dt(t, X)) * f2(t, X) - np.conj(f1(t, X)) * f2.dt(t, X)
        return 1j * np.sum(sph.weights * br) * r ** (n - 1)

    vals = np.array([shell(r) for r in rho])
    total = complex(np.sum(wr * vals))
    a_out, a_in = abs(shell(radius)), abs(shell(0.8 * radius))
    if a_out == 0.0:
        tail = 0.0
    else:
        kappa = np.log(a_in / a_out) / np.log(radius / (0.8 * radius)) if a_in > 0 else np.inf
        tail = np.inf if kappa <= 1.0 + 1e-9 else a_out * radius / (kappa - 1.0)
    return total, float(tail)


def _mode_matrices_noncompact(indices, n, grid, t0=0.0, basis=None):
    X = grid.slice_points()
    t = np.full(len(X), float(t0))
    if basis is None:
        basis = shared_basis(n, max(i.l for i in indices))
    V = np.empty((len(indices), len(X)), dtype=complex)
    Dt = np.empty_like(V)
    for a, idx in enumerate(indices):
        f = solution_mode(idx, n, basis)
        V[a] = f(t, X)
        Dt[a] = f.dt(t, X)
    return V, Dt


def gram_matrix(indices, n: int, picture: str = "noncompact",
                grid: SliceGrid = None, t0: float = 0.0) -> np.ndarray:
    """Pairwise Klein-Gordon products of basis modes."""
    indices = list(indices)
    max_k = max((i.p - (n - 1)) // 2 for i in indices)
    max_l = max(i.l for i in indices)
    if grid is None:
        grid = slice_grid(n, max_k, max_l)
    basis = shared_basis(n, max_l)
    if picture == "noncompact":
        V, Dt = _mode_matrices_noncompact(indices, n, grid, t0, basis)
        w = grid.weights_noncompact()
        return 1j * (np.conj(Dt) * w) @ V.T - 1j * (np.conj(V) * w) @ Dt.T
    if picture == "compact":
        theta_b, xhat_b = grid.compact_points()
        phi0 = np.zeros_like(theta_b)
        V = np.empty((len(indices), len(theta_b)), dtype=complex)
        Dp = np.empty_like(V)
        for a, idx in enumerate(indices):
            F = cylinder_mode(idx.p, idx.l, idx.j, n, basis)
            V[a] = F(phi0, theta_b, xhat_b)
            Dp[a] = F.dphi(phi0, theta_b, xhat_b)
        w = grid.weights_compact() * 2.0 ** (1 - n)
        return 1j * (np.conj(Dp) * w) @ V.T - 1j * (np.conj(V) * w) @ Dp.T
    raise ParameterError(f"unknown picture {picture!r}")


def unitarity_deviation(g: GroupElement, f1: NoncompactField, f2: NoncompactField,
                        grid: SliceGrid) -> float:
    """| <g f1, g f2> - <f1, f2> |.  Requires the action's light cone to
    miss the t = 0 slice, i.e. a lower-triangular-free sl2 block (c = 0)."""
    if abs(float(g.sl2[1, 0])) > 1e-13:
        raise ParameterError("slice pairing undefined: delta vanishes on t = 0 "
                             "for sl2 blocks with c != 0")
    before = kg_inner_noncompact(f1, f2, grid)
    after = kg_inner_noncompact(group_act(g, f1), group_act(g, f2), grid)
    return abs(after - before)
