"""Spectral solution of the Cauchy problem and a finite-difference referee.

Given real data (Phi, Psi) with u(0, x) = Phi, dt u(0, x) = Psi, the real
solution is u = Re f with f = sum c_{p,l,j} f_{p,l,j} and

    c_{p,l,j} = 2 <f_{p,l,j}, u>
             = 2 integral f_{p,l,j}(0, x) [ p Phi(x)/(1 + ||x||^2) - i Psi(x) ] dx,

the last form using that modes are real on the t = 0 slice with
dt f = i p f / (1 + ||x||^2) there.  Coefficient integrals are evaluated on
the compact slice grid (radial substitution ||x|| = tan(theta/2)); an
independent radial Gauss-Legendre route with a tail estimate is available
as a cross-check.

``SpectralCauchySolver`` wraps expand/reconstruct in a scikit-learn style
fit/predict estimator; ``evolve_compare`` validates reconstructions against
an explicit second-order leapfrog integrator on a margin-padded box.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ConfigError, DecayError, ParameterError
from .kleingordon import SliceGrid, slice_grid
from .modes import (ModeIndex, default_m, lowest_energy, mode_norm_constant,
                    shared_basis, solution_mode, weight, _radial_ts_poly)
from .special import dim_harmonic, evaluate_poly, gauss_legendre, sphere_area, sphere_grid
from .validation import (check_dimension, check_real_samples, check_space_points,
                         check_spacetime_points)


@dataclass
class CauchyData:
    """Real initial data: value and time derivative on the t = 0 slice."""

    initial_value: callable
    initial_velocity: callable
    decay_class: str = "schwartz"

    def sample(self, X):
        phi = check_real_samples(self.initial_value(X), "initial value")
        psi = check_real_samples(self.initial_velocity(X), "initial velocity")
        return phi, psi


def gaussian_data(width: float = 1.0, amplitude: float = 1.0) -> CauchyData:
    """Phi = amplitude * exp(-||x||^2 / width^2), Psi = 0."""
    return CauchyData(
        lambda X: amplitude * np.exp(-np.sum(np.asarray(X) ** 2, axis=-1) / width ** 2),
        lambda X: np.zeros(np.asarray(X).shape[0]))


def mode_data(index: ModeIndex, n: int) -> CauchyData:
    """Data of the closed-form solution u = Re f_{index}.  (Modes have purely
    imaginary time derivative on the slice, so Psi comes out zero.)"""
    f = solution_mode(index, n)

    def phi(X):
        X = check_space_points(X, n)
        return f(np.zeros(len(X)), X).real

    def psi(X):
        X = check_space_points(X, n)
        return f.dt(np.zeros(len(X)), X).real

    return CauchyData(phi, psi)


def tabulated_data(points: np.ndarray, phi_values, psi_values,
                   tol: float = 1e-9) -> CauchyData:
    """Data known only on a fixed point set (e.g. read from a CSV dump of
    the solver's quadrature grid).  Evaluation at any other points fails."""
    points = np.asarray(points, dtype=float)
    phi_values = np.asarray(phi_values, dtype=float)
    psi_values = np.asarray(psi_values, dtype=float)

    def lookup(values, X):
        X = np.asarray(X, dtype=float)
        if X.shape != points.shape or np.max(np.abs(X - points)) > tol:
            raise ParameterError(
                "tabulated data was sampled on a different grid; regenerate the "
                "sample file on this configuration's quadrature grid")
        return values

    return CauchyData(lambda X: lookup(phi_values, X),
                      lambda X: lookup(psi_values, X))


@dataclass
class Expansion:
    """A finite positive-energy expansion sum c_{p,l,j} f_{p,l,j}."""

    n: int
    m: int
    p_max: int
    l_max: int
    entries: list                      # [(ModeIndex, complex), ...]
    tail_estimate: float = 0.0

    @property
    def norm_squared(self) -> float:
        return float(sum(abs(c) ** 2 for _, c in self.entries))

    def shell_norms(self):
        """Energy profile p -> sum_{l,j} |c_{p,l,j}|^2."""
        shells = {}
        for idx, c in self.entries:
            shells[idx.p] = shells.get(idx.p, 0.0) + abs(c) ** 2
        return dict(sorted(shells.items()))

    def shell_ratio_test(self, weight_power: int, window: int = 5,
                         floor: float = 1e-26):
        """Convergence diagnostic for sum_p p^N |c_p|^2 by the ratio test on
        consecutive shell windows (windowing smooths the genuine oscillation
        of the shell norms).  Returns (converges, max trailing ratio)."""
        sn = self.shell_norms()
        weighted = [p ** weight_power * v for p, v in sn.items()]
        top = max(weighted, default=0.0)
        weighted = [w for w in weighted if w > floor * max(top, 1e-300)]
        sums = [sum(weighted[i:i + window])
                for i in range(0, len(weighted) - window + 1, window)]
        if len(sums) < 3:
            return True, 0.0
        tail = sums[len(sums) // 2:]
        ratios = [b / a for a, b in zip(tail, tail[1:]) if a > 0]
        if not ratios:
            return True, 0.0
        return max(ratios) < 1.0, max(ratios)

    def uniform_tail_bounds(self):
        """Per-shell sup-norm bounds sum_{l,j} |c| sup|f_{p,l,j}| computed
        from the pointwise identity sum_{l,j} |2^r sqrt(p) F|^2 = dim/area."""
        r = float(weight(self.n))
        area = sphere_area(self.n + 1)
        out = {}
        by_p = {}
        for idx, c in self.entries:
            by_p.setdefault(idx.p, []).append(abs(c) ** 2)
        for p, sq in sorted(by_p.items()):
            k = (p - (self.n - 1)) // 2
            dim = dim_harmonic(self.n + 1, k)
            out[p] = math.sqrt(sum(sq)) * 2.0 ** (-r) / math.sqrt(p) \
                * math.sqrt(dim / area)
        return out

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "m": self.m, "pmax": self.p_max, "lmax": self.l_max,
            "tail_estimate": format(self.tail_estimate, ".17g"),
            "modes": [{"p": i.p, "l": i.l, "j": i.j,
                       "re": format(c.real, ".17g"),
                       "im": format(c.imag, ".17g")}
                      for i, c in self.entries],
        }, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Expansion":
        obj = json.loads(text)
        entries = [(ModeIndex(e["p"], e["l"], e["j"]),
                    complex(float(e["re"]), float(e["im"])))
                   for e in obj["modes"]]
        return cls(obj["n"], obj["m"], obj["pmax"], obj["lmax"], entries,
                   float(obj["tail_estimate"]))


def _radial_profiles(n, p_max, l_max, grid):
    """Mode slice profiles: f_{p,l,j}(0, x) = R_{p,l}(theta) hhat_{l,j}(xhat)."""
    rho = grid.radii
    lam = 1.0 + rho ** 2
    out = {}
    p = lowest_energy(n)
    while p <= p_max:
        k = (p - lowest_energy(n)) // 2
        for l in range(min(k, l_max) + 1):
            g0 = evaluate_poly(_radial_ts_poly(p, l, n), (np.zeros_like(rho), rho ** 2))
            out[(p, l)] = mode_norm_constant(p, l, n) * g0 * rho ** l * lam ** (-0.5 * p)
        p += 2
    return out


def default_expansion_grid(n: int, p_max: int, l_max=None,
                           theta_oversample: float = 3.0) -> SliceGrid:
    """The slice grid ``expand`` uses when none is passed; also the grid on
    which file-based Cauchy data must be sampled."""
    k_max = max((p_max - lowest_energy(n)) // 2, 0)
    if l_max is None:
        l_max = k_max
    nodes = int(math.ceil(theta_oversample * ((2 * k_max + n + 8) // 2 + 2)))
    return slice_grid(n, k_max, l_max, theta_nodes=nodes)


def expand(data: CauchyData, n: int, p_max: int, l_max=None,
           grid: SliceGrid = None, tail_tol: float = np.inf,
           theta_oversample: float = 3.0) -> Expansion:
    """Project real Cauchy data on the positive-energy basis.

    ``theta_oversample`` scales the polar quadrature beyond the mode-pair
    exactness requirement; general (non-polynomial) data needs the extra
    resolution to push the coefficient noise floor down.
    """
    n = check_dimension(n)
    if p_max < lowest_energy(n):
        warnings.warn(f"p_max = {p_max} is below the lowest energy {lowest_energy(n)}; "
                      "expansion is empty")
        return Expansion(n, default_m(n), p_max, -1, [])
    k_max = (p_max - lowest_energy(n)) // 2
    if l_max is None:
        l_max = k_max
    if grid is None:
        grid = default_expansion_grid(n, p_max, l_max, theta_oversample)
    basis = shared_basis(n, l_max)

    ntheta, nsph = len(grid.theta), len(grid.sphere.points)
    X = grid.slice_points()
    phi_vals, psi_vals = data.sample(X)
    phi_g = phi_vals.reshape(ntheta, nsph)
    psi_g = psi_vals.reshape(ntheta, nsph)

    # sphere transforms per degree: T[l] has shape (dim_l, ntheta)
    wsph = grid.sphere.weights
    t_phi, t_psi = {}, {}
    for l in range(l_max + 1):
        H = basis.evaluate_degree(l, grid.sphere.points)
        t_phi[l] = H @ (phi_g * wsph).T
        t_psi[l] = H @ (psi_g * wsph).T

    lam = 1.0 + grid.radii ** 2
    wtheta = grid.theta_weight * (lam / 2.0) ** n
    profiles = _radial_profiles(n, p_max, l_max, grid)

    entries = []
    for (p, l), R in sorted(profiles.items()):
        radial = 2.0 * wtheta * R
        coeffs = (t_phi[l] * (p / lam)[None, :] - 1j * t_psi[l]) @ radial
        for j, c in enumerate(coeffs):
            entries.append((ModeIndex(p, l, j), complex(c)))

    shells = {}
    for idx, c in entries:
        shells[idx.p] = shells.get(idx.p, 0.0) + abs(c) ** 2
    ps = sorted(shells)
    tail = float(shells[ps[-1]] + shells[ps[-2]]) if len(ps) >= 2 else float("inf")
    if tail > tail_tol:
        raise DecayError(f"expansion tail estimate {tail:.3e} exceeds {tail_tol:.3e}")
    return Expansion(n, default_m(n), p_max, l_max, entries, tail)


def expand_radial_route(data: CauchyData, n: int, p_max: int, l_max=None,
                        radius: float = 60.0, radial_nodes: int = 800,
                        sphere_degree=None, tail_tol: float = np.inf) -> Expansion:
    """Independent coefficient route: radial Gauss-Legendre on [0, R] plus a
    power-law tail estimate.  Slower; used to cross-check ``expand``."""
    n = check_dimension(n)
    k_max = (p_max - lowest_energy(n)) // 2
    if l_max is None:
        l_max = k_max
    if sphere_degree is None:
        sphere_degree = 2 * l_max + 2
    basis = shared_basis(n, l_max)
    sph = sphere_grid(n, sphere_degree)

    u, wu = gauss_legendre(radial_nodes)
    rho = 0.5 * radius * (u + 1.0)
    wr = 0.5 * radius * wu
    lam = 1.0 + rho ** 2

    X = (sph.points[None, :, :] * rho[:, None, None]).reshape(-1, n)
    phi_vals, psi_vals = data.sample(X)
    phi_g = phi_vals.reshape(len(rho), -1)
    psi_g = psi_vals.reshape(len(rho), -1)

    t_phi, t_psi = {}, {}
    for l in range(l_max + 1):
        H = basis.evaluate_degree(l, sph.points)
        t_phi[l] = H @ (phi_g * sph.weights).T
        t_psi[l] = H @ (psi_g * sph.weights).T

    entries = []
    tail_max = 0.0
    p = lowest_energy(n)
    while p <= p_max:
        k = (p - lowest_energy(n)) // 2
        for l in range(min(k, l_max) + 1):
            g0 = evaluate_poly(_radial_ts_poly(p, l, n), (np.zeros_like(rho), rho ** 2))
            R = mode_norm_constant(p, l, n) * g0 * rho ** l * lam ** (-0.5 * p)
            radial = 2.0 * wr * rho ** (n - 1) * R
            coeffs = (t_phi[l] * (p / lam)[None, :] - 1j * t_psi[l]) @ radial
            # tail from the outermost shell: mode decays like rho^(-l-n+1)
            edge = abs(R[-1]) * rho[-1] ** (n - 1) * (
                np.max(np.abs(phi_g[-1])) * p / lam[-1] + np.max(np.abs(psi_g[-1])))
            tail_max = max(tail_max, 2.0 * edge * radius * sphere_area(n))
            for j, c in enumerate(coeffs):
                entries.append((ModeIndex(p, l, j), complex(c)))
        p += 2
    if tail_max > tail_tol:
        raise DecayError(f"radial tail estimate {tail_max:.3e} exceeds {tail_tol:.3e}")
    return Expansion(n, default_m(n), p_max, l_max, entries)


def reconstruct(exp: Expansion, points, shells: bool = False):
    """Evaluate u = Re sum c f at spacetime points (rows (t, x))."""
    pts = check_spacetime_points(points, exp.n)
    t = pts[:, 0]
    X = pts[:, 1:]
    s = np.sum(X ** 2, axis=1)
    D = (1 - 1j * t) ** 2 + s
    basis = shared_basis(exp.n, max(exp.l_max, 0))

    hvals = {}
    by_pl = {}
    for idx, c in exp.entries:
        by_pl.setdefault((idx.p, idx.l), {})[idx.j] = c
        if idx.l not in hvals:
            hvals[idx.l] = basis.evaluate_degree(idx.l, X)

    out = np.zeros(len(pts))
    shell_series = {}
    for (p, l), cmap in sorted(by_pl.items()):
        g = evaluate_poly(_radial_ts_poly(p, l, exp.n), (t, s))
        W = mode_norm_constant(p, l, exp.n) * g * D ** (-0.5 * p)
        cvec = np.array([cmap.get(j, 0.0) for j in range(hvals[l].shape[0])])
        contrib = (W * (cvec @ hvals[l])).real
        out += contrib
        if shells:
            shell_series[p] = shell_series.get(p, np.zeros(len(pts))) + contrib
    if shells:
        return out, dict(sorted(shell_series.items()))
    return out


def reexpand(exp: Expansion, grid: SliceGrid = None) -> Expansion:
    """Expand the reconstruction of ``exp`` again (projection idempotence)."""
    def phi(X):
        pts = np.concatenate([np.zeros((len(X), 1)), X], axis=1)
        return reconstruct(exp, pts)

    def psi(X):
        eps = 1e-5
        up = reconstruct(exp, np.concatenate([np.full((len(X), 1), eps), X], axis=1))
        dn = reconstruct(exp, np.concatenate([np.full((len(X), 1), -eps), X], axis=1))
        return (up - dn) / (2 * eps)

    return expand(CauchyData(phi, psi), exp.n, exp.p_max, exp.l_max, grid=grid)


# ----------------------------------------------------------------------
# Finite-difference referee
# ----------------------------------------------------------------------


def leapfrog_solution(data: CauchyData, n: int, t_final: float, h: float,
                      box_halfwidth: float, cfl: float = 0.45,
                      sample_times=None):
    """Second-order leapfrog on [-L, L]^n with zero (Dirichlet) boundary.

    The box must be padded so boundary effects cannot reach the region of
    interest within t_final (propagation speed 1).  Returns (axis, dict
    time -> field array).
    """
    if n not in (1, 2, 3):
        raise ConfigError("finite-difference referee supports n <= 3")
    if cfl > 1.0 / math.sqrt(n):
        raise ConfigError(f"time step violates the CFL bound: cfl = {cfl} > "
                          f"{1.0 / math.sqrt(n):.3f} for n = {n}")
    if sample_times is None:
        sample_times = [t_final]
    axis = np.arange(-box_halfwidth, box_halfwidth + h / 2, h)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    shape = grids[0].shape

    phi_vals, psi_vals = data.sample(pts)
    u_prev = phi_vals.reshape(shape)
    psi0 = psi_vals.reshape(shape)

    nsteps = max(1, int(math.ceil(t_final / (cfl * h))))
    dt = t_final / nsteps

    def lap(u):
        out = np.zeros_like(u)
        for ax in range(n):
            out += (np.roll(u, 1, axis=ax) + np.roll(u, -1, axis=ax) - 2 * u)
        out /= h * h
        _zero_boundary(out)
        return out

    def _zero_boundary(u):
        for ax in range(n):
            sl = [slice(None)] * n
            sl[ax] = 0
            u[tuple(sl)] = 0.0
            sl[ax] = -1
            u[tuple(sl)] = 0.0

    # snap requested times onto the step grid; report the actual step time
    targets = {int(round(ts / dt)): int(round(ts / dt)) * dt for ts in sample_times}
    targets.pop(0, None)
    snapshots = {0.0: u_prev.copy()}
    u_cur = u_prev + dt * psi0 + 0.5 * dt ** 2 * lap(u_prev)
    if 1 in targets:
        snapshots[targets[1]] = u_cur.copy()
    for step in range(2, nsteps + 1):
        u_next = 2 * u_cur - u_prev + dt ** 2 * lap(u_cur)
        u_prev, u_cur = u_cur, u_next
        if step in targets:
            snapshots[targets[step]] = u_cur.copy()
    return axis, snapshots


def _comparison_mask(axis, n, compare_radius, max_per_axis=15):
    """Indices of a strided interior sub-lattice |x|_inf <= compare_radius."""
    inner = np.nonzero(np.abs(axis) <= compare_radius + 1e-12)[0]
    stride = max(1, int(math.ceil(len(inner) / max_per_axis)))
    keep = inner[::stride]
    flat = np.zeros(len(axis), dtype=bool)
    flat[keep] = True
    grids = np.meshgrid(*([flat] * n), indexing="ij")
    mask = grids[0]
    for g in grids[1:]:
        mask = mask & g
    return mask.ravel()


def evolve_compare(data: CauchyData, n: int, t_final: float, p_max: int = 40,
                   h: float = 0.1, compare_radius: float = 2.0,
                   sample_times=None, cfl: float = 0.45,
                   self_convergence: bool = True, expansion: Expansion = None) -> dict:
    """Spectral reconstruction vs leapfrog reference on interior points.

    Discrepancies are measured on a strided sub-lattice of the interior
    region (the reference solution still evolves on the full grid).  The
    report includes the reference's Richardson self-convergence ratio
    (error(2h)/error(h), near 4 at second order) so a discrepancy can be
    attributed to the grid."""
    if sample_times is None:
        sample_times = [t_final / 2, t_final]
    L = compare_radius + t_final + 1.0
    exp = expansion if expansion is not None else expand(data, n, p_max)
    axis, snaps = leapfrog_solution(data, n, t_final, h, L, cfl, sample_times)

    grids = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    mask = _comparison_mask(axis, n, compare_radius)

    report = {"n": n, "p_max": exp.p_max, "h": h, "t_final": t_final,
              "tail_estimate": exp.tail_estimate, "times": {}}
    sup_err = {}
    inner = pts[mask]
    for ts, fd in sorted(snaps.items()):
        if ts == 0.0:
            continue
        spectral = reconstruct(exp, np.concatenate(
            [np.full((len(inner), 1), ts), inner], axis=1))
        diff = spectral - fd.ravel()[mask]
        sup_err[ts] = float(np.max(np.abs(diff)))
        report["times"][ts] = {
            "sup": sup_err[ts],
            "l2": float(np.sqrt(np.mean(diff ** 2))),
        }
    if self_convergence:
        axis2, snaps2 = leapfrog_solution(data, n, t_final, 2 * h, L, cfl, [t_final])
        mask2 = _comparison_mask(axis2, n, compare_radius)
        grids2 = np.meshgrid(*([axis2] * n), indexing="ij")
        pts2 = np.stack([g.ravel() for g in grids2], axis=1)
        t_fd = max(snaps2)
        spectral2 = reconstruct(exp, np.concatenate(
            [np.full((int(np.sum(mask2)), 1), t_fd), pts2[mask2]], axis=1))
        coarse_sup = float(np.max(np.abs(spectral2 - snaps2[t_fd].ravel()[mask2])))
        fine_sup = sup_err[max(sup_err)]
        report["self_convergence_ratio"] = coarse_sup / fine_sup if fine_sup else float("inf")
    return report


# ----------------------------------------------------------------------
# Estimator facade
# ----------------------------------------------------------------------


class SpectralCauchySolver(BaseEstimator):
    """Fit/predict wrapper: fit on Cauchy data, predict solution values.

    Parameters follow scikit-learn conventions (stored untouched, validated
    at fit time), so the solver composes with that ecosystem's tooling:

        solver = SpectralCauchySolver(n=3, p_max=40).fit(phi, psi)
        u = solver.predict(points)          # rows (t, x_1, ..., x_n)
    """

    def __init__(self, n=3, p_max=30, l_max=None, theta_nodes=None,
                 sphere_degree=None, tail_tol=np.inf):
        self.n = n
        self.p_max = p_max
        self.l_max = l_max
        self.theta_nodes = theta_nodes
        self.sphere_degree = sphere_degree
        self.tail_tol = tail_tol

    def fit(self, initial_value, initial_velocity=None, **ignored):
        n = check_dimension(self.n)
        if isinstance(initial_value, CauchyData):
            data = initial_value
        else:
            if initial_velocity is None:
                initial_velocity = lambda X: np.zeros(np.asarray(X).shape[0])
            data = CauchyData(initial_value, initial_velocity)
        k_max = max((self.p_max - lowest_energy(n)) // 2, 0)
        l_max = k_max if self.l_max is None else min(self.l_max, k_max)
        if self.theta_nodes is None and self.sphere_degree is None:
            grid = default_expansion_grid(n, self.p_max, l_max)
        else:
            grid = slice_grid(n, k_max, l_max, self.theta_nodes, self.sphere_degree)
        self.expansion_ = expand(data, n, self.p_max, l_max, grid,
                                 tail_tol=self.tail_tol)
        self.tail_estimate_ = self.expansion_.tail_estimate
        return self

    def predict(self, X):
        if not hasattr(self, "expansion_"):
            raise ParameterError("solver is not fitted; call fit() first")
        return reconstruct(self.expansion_, X)
