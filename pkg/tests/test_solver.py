"""Spectral Cauchy solver: expansion, reconstruction, referee, estimator."""

import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad
from sklearn.base import clone

from wavebasis.errors import ConfigError, ParameterError
from wavebasis.kleingordon import kg_inner_noncompact, slice_grid
from wavebasis.modes import ModeIndex, mode_norm_constant, solution_mode, _radial_ts_poly
from wavebasis.geometry import NoncompactField
from wavebasis.solver import (CauchyData, Expansion, SpectralCauchySolver,
                              default_expansion_grid, evolve_compare, expand,
                              expand_radial_route, gaussian_data,
                              leapfrog_solution, mode_data, reconstruct,
                              reexpand, tabulated_data)
from wavebasis.special import evaluate_poly


def gaussian_coefficient_oracle(p, n=3):
    """Brute-force adaptive quadrature for the radial Gaussian coefficients:
    c_p = 2 p sqrt(Area(S^2)) * int R_p(rho) e^(-rho^2)/(1+rho^2) rho^2 drho."""
    g = _radial_ts_poly(p, 0, n)
    A = mode_norm_constant(p, 0, n)

    def integrand(rho):
        R = A * evaluate_poly(g, (np.zeros(1), np.array([rho ** 2])))[0] \
            * (1 + rho ** 2) ** (-0.5 * p)
        return R * math.exp(-rho ** 2) / (1 + rho ** 2) * rho ** 2

    val, _err = quad(integrand, 0, np.inf, limit=400)
    return 2 * p * math.sqrt(4 * math.pi) * val


def test_zero_data_gives_zero_expansion():
    zero = CauchyData(lambda X: np.zeros(len(X)), lambda X: np.zeros(len(X)))
    exp = expand(zero, 3, p_max=8)
    assert all(abs(c) == 0.0 for _, c in exp.entries)


def test_empty_expansion_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        exp = expand(gaussian_data(), 3, p_max=1)
    assert len(exp.entries) == 0
    assert any("below the lowest energy" in str(w.message) for w in caught)


def test_mode_round_trip_coefficients():
    n = 3
    idx = ModeIndex(8, 2, 3)
    exp = expand(mode_data(idx, n), n, p_max=12)
    for i, c in exp.entries:
        if i == idx:
            assert abs(c - 1.0) < 1e-10
        else:
            assert abs(c) < 1e-8


def test_mode_round_trip_reconstruction(rng):
    n = 3
    idx = ModeIndex(6, 1, 1)
    exp = expand(mode_data(idx, n), n, p_max=10)
    pts = np.column_stack([rng.uniform(-1.5, 1.5, 1000),
                           rng.uniform(-2, 2, (1000, n))])
    u = reconstruct(exp, pts)
    f = solution_mode(idx, n)
    truth = f(pts[:, 0], pts[:, 1:]).real
    assert np.max(np.abs(u - truth)) < 1e-8


def test_single_mode_origin_value():
    n = 3
    idx = ModeIndex(2, 0, 0)
    exp = expand(mode_data(idx, n), n, p_max=6)
    u = reconstruct(exp, np.zeros((1, 1 + n)))
    expected = mode_norm_constant(2, 0, n) / math.sqrt(4 * math.pi)
    assert abs(u[0] - expected) < 1e-10


def test_gaussian_coefficients_match_oracle():
    exp = expand(gaussian_data(), 3, p_max=16)
    cmap = {i.p: c for i, c in exp.entries if i.l == 0 and i.j == 0}
    for p in (2, 6, 12, 16):
        assert abs(cmap[p] - gaussian_coefficient_oracle(p)) < 1e-8
    # angular coefficients vanish for radial data
    assert max(abs(c) for i, c in exp.entries if i.l > 0) < 1e-12


def test_gaussian_shell_decay():
    exp = expand(gaussian_data(), 3, p_max=30)
    for N in range(7):
        ok, ratio = exp.shell_ratio_test(N)
        assert ok, f"shell ratio test failed at weight {N}: {ratio}"


def test_reconstruction_is_real(rng):
    exp = expand(gaussian_data(), 3, p_max=12)
    pts = np.column_stack([rng.uniform(-1, 1, 50), rng.uniform(-2, 2, (50, 3))])
    u = reconstruct(exp, pts)
    assert u.dtype.kind == "f"


def test_parseval():
    n = 3
    exp = expand(gaussian_data(), n, p_max=20)
    grid = slice_grid(n, (20 - 2) // 2)
    fields = {i: solution_mode(i, n) for i, c in exp.entries if abs(c) > 1e-13}
    coeffs = {i: c for i, c in exp.entries}

    def core(t, xs):
        return sum(coeffs[i] * f.core(t, xs) for i, f in fields.items())

    def dt_core(t, xs):
        return sum(coeffs[i] * f._dt_core(t, xs) for i, f in fields.items())

    combo = NoncompactField(core, dt_core=dt_core, n=n)
    val = kg_inner_noncompact(combo, combo, grid)
    assert abs(val.real - exp.norm_squared) < 1e-8
    assert abs(val.imag) < 1e-10


def test_two_coefficient_routes_agree():
    n = 3
    a = expand(gaussian_data(), n, p_max=10)
    b = expand_radial_route(gaussian_data(), n, p_max=10,
                            radius=60.0, radial_nodes=900)
    am = dict(a.entries)
    bm = dict(b.entries)
    assert max(abs(am[k] - bm[k]) for k in am) < 1e-9


def test_projection_idempotence():
    n = 3
    exp = expand(gaussian_data(), n, p_max=10)
    again = reexpand(exp)
    am = dict(exp.entries)
    bm = dict(again.entries)
    assert max(abs(am[k] - bm[k]) for k in am) < 1e-9


def test_expansion_json_round_trip():
    exp = expand(gaussian_data(), 3, p_max=8)
    back = Expansion.from_json(exp.to_json())
    assert back.n == exp.n and back.p_max == exp.p_max
    bm = dict(back.entries)
    assert max(abs(bm[i] - c) for i, c in exp.entries) < 1e-16


def test_uniform_tail_bounds_decay():
    exp = expand(gaussian_data(), 3, p_max=30)
    bounds = exp.uniform_tail_bounds()
    vals = list(bounds.values())
    assert vals[-1] < 5e-3 * max(vals)


def test_tabulated_data_grid_mismatch():
    grid = default_expansion_grid(2, 5)
    pts = grid.slice_points()
    data = tabulated_data(pts, np.exp(-np.sum(pts ** 2, axis=1)), np.zeros(len(pts)))
    with pytest.raises(ParameterError):
        data.initial_value(pts + 0.1)
    exp = expand(data, 2, p_max=5, grid=grid)
    assert len(exp.entries) > 0


def test_data_validation_rejects_complex():
    bad = CauchyData(lambda X: np.exp(1j * X[:, 0]), lambda X: np.zeros(len(X)))
    with pytest.raises(ParameterError):
        expand(bad, 2, p_max=3)


# ----------------------------------------------------------------------
# finite-difference referee
# ----------------------------------------------------------------------


def test_leapfrog_zero_data():
    zero = CauchyData(lambda X: np.zeros(len(X)), lambda X: np.zeros(len(X)))
    _, snaps = leapfrog_solution(zero, 2, t_final=0.5, h=0.1, box_halfwidth=2.0)
    assert all(np.max(np.abs(u)) == 0.0 for u in snaps.values())


def test_leapfrog_cfl_guard():
    zero = CauchyData(lambda X: np.zeros(len(X)), lambda X: np.zeros(len(X)))
    with pytest.raises(ConfigError):
        leapfrog_solution(zero, 3, 1.0, 0.1, 2.0, cfl=0.9)
    with pytest.raises(ConfigError):
        leapfrog_solution(zero, 4, 1.0, 0.1, 2.0)


def test_evolve_compare_mode_data_second_order():
    """Against the closed-form mode solution the discrepancy is pure grid
    error: second-order decay under refinement, spectral side exact."""
    n = 2
    idx = ModeIndex(3, 1, 0)
    data = mode_data(idx, n)
    reps = {}
    for h in (0.2, 0.1):
        reps[h] = evolve_compare(data, n, t_final=0.5, p_max=7, h=h,
                                 compare_radius=1.5, sample_times=[0.5],
                                 self_convergence=False)
    e_coarse = reps[0.2]["times"][0.5]["sup"]
    e_fine = reps[0.1]["times"][0.5]["sup"]
    assert 2.5 < e_coarse / e_fine < 6.0
    # spectral truncation at p_max >= p reproduces the mode exactly
    exp = expand(data, n, p_max=7)
    f = solution_mode(idx, n)
    pts = np.column_stack([np.full(40, 0.37), np.linspace(-1.5, 1.5, 40),
                           np.full(40, 0.2)])
    assert np.max(np.abs(reconstruct(exp, pts)
                         - f(pts[:, 0], pts[:, 1:]).real)) < 1e-8


def test_evolve_compare_gaussian_small():
    rep = evolve_compare(gaussian_data(), 2, t_final=0.6, p_max=25, h=0.05,
                         compare_radius=1.5)
    worst = max(d["sup"] for d in rep["times"].values())
    assert worst < 5e-3
    assert 2.0 < rep["self_convergence_ratio"] < 8.0


# ----------------------------------------------------------------------
# estimator facade
# ----------------------------------------------------------------------


def test_estimator_fit_predict(rng):
    solver = SpectralCauchySolver(n=2, p_max=21)
    assert solver.get_params()["p_max"] == 21
    cloned = clone(solver)
    assert cloned.get_params() == solver.get_params()
    solver.fit(lambda X: np.exp(-np.sum(X ** 2, axis=1)))
    pts = np.column_stack([np.zeros(30), rng.uniform(-1, 1, (30, 2))])
    u = solver.predict(pts)
    truth = np.exp(-np.sum(pts[:, 1:] ** 2, axis=1))
    assert np.max(np.abs(u - truth)) < 1e-3
    assert solver.tail_estimate_ < 1e-3


def test_estimator_requires_fit():
    with pytest.raises(ParameterError):
        SpectralCauchySolver(n=2).predict(np.zeros((1, 3)))


def test_estimator_validates_points():
    solver = SpectralCauchySolver(n=2, p_max=9).fit(gaussian_data())
    with pytest.raises(ParameterError):
        solver.predict(np.zeros((3, 5)))
