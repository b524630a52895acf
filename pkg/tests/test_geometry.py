"""Coordinate charts, the Z_4 cover phase, and function transport."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import interior_cylinder_points, unit_vectors
from wavebasis.errors import ChartBoundaryError, ParameterError, PoleError
from wavebasis.geometry import (CompactField, NoncompactField, cone_embedding,
                                cover_phase, embedding_radius, from_compact,
                                minkowski_interval, pull_to_compact,
                                push_to_noncompact, to_compact)
from wavebasis.jets import gexp


def test_interval_examples(rng):
    X = rng.normal(size=(5, 3))
    assert np.allclose(minkowski_interval(np.zeros(5), X), np.sum(X ** 2, axis=1))
    assert np.allclose(minkowski_interval(np.ones(1), np.zeros((1, 3))), [-1.0])
    # light cone: ||x|| = |t|
    t = np.array([0.7])
    x = np.array([[0.7, 0.0]])
    assert abs(minkowski_interval(t, x)) < 1e-15


def test_embedding_radius_examples(rng):
    assert np.allclose(embedding_radius(np.zeros(1), np.zeros((1, 3))), [1.0])
    assert np.allclose(embedding_radius(np.ones(1), np.zeros((1, 3))), [2.0])
    # algebraic simplification at t = 0: lam = 1 + ||x||^2
    X = rng.normal(size=(20, 4))
    lam = embedding_radius(np.zeros(20), X)
    assert np.allclose(lam, 1 + np.sum(X ** 2, axis=1), atol=1e-14)


def test_cone_embedding_examples():
    v = cone_embedding(np.zeros(1), np.zeros((1, 3)))[0]
    assert np.allclose(v, [0, 1, -1, 0, 0, 0])
    v = cone_embedding(np.ones(1), np.zeros((1, 3)))[0]
    assert np.allclose(v, [2, 0, -2, 0, 0, 0])


def test_cone_identity_random(rng):
    t = rng.uniform(-3, 3, 10_000)
    X = rng.uniform(-3, 3, (10_000, 3))
    v = cone_embedding(t, X)
    a2 = np.sum(v[:, :2] ** 2, axis=1)
    b2 = np.sum(v[:, 2:] ** 2, axis=1)
    assert np.max(np.abs(a2 - b2) / np.maximum(a2, 1.0)) < 1e-12


def test_cover_phase_examples():
    assert cover_phase(0.0, -1.0) == 0
    assert cover_phase(2 * np.pi, 0.3) == 2
    assert cover_phase(np.pi, 0.0) in (1, 3)  # see ledger: table vs phase sign
    assert cover_phase(np.pi, 0.0) == 1


def test_cover_phase_boundaries():
    with pytest.raises(ChartBoundaryError):
        cover_phase(0.0, 1.0)                 # cos(phi) = b0
    with pytest.raises(ChartBoundaryError):
        cover_phase(np.pi, -1.0)              # phi/2 on an interval endpoint


def test_cover_phase_locally_constant(rng):
    phi, theta, _ = interior_cylinder_points(rng, 300, 2)
    b0 = -np.cos(theta)
    j = cover_phase(phi, b0)
    for dphi, db in ((1e-6, 0), (-1e-6, 0), (0, 1e-6), (0, -1e-6)):
        assert np.all(cover_phase(phi + dphi, b0 + db) == j)


def test_to_compact_slice(rng):
    X = rng.normal(size=(50, 3))
    phi, theta, xhat = to_compact(np.zeros(50), X)
    assert np.allclose(phi, 0.0, atol=1e-15)
    rho2 = np.sum(X ** 2, axis=1)
    assert np.allclose(np.cos(theta), (1 - rho2) / (1 + rho2), atol=1e-14)
    # unit radius lands on the equator
    _, theta1, _ = to_compact(np.zeros(3), np.eye(3))
    assert np.allclose(theta1, np.pi / 2, atol=1e-14)


def test_to_compact_pole_error():
    with pytest.raises(PoleError):
        to_compact(np.array([0.5]), np.zeros((1, 3)))


def test_from_compact_examples(rng):
    theta = rng.uniform(0.1, 2.8, 20)
    xhat = unit_vectors(rng, 20, 3)
    t, X = from_compact(np.zeros(20), theta, xhat)
    assert np.allclose(t, 0.0)
    assert np.allclose(X, xhat * np.tan(theta / 2)[:, None], atol=1e-13)
    t, X = from_compact(np.zeros(1), np.zeros(1), xhat[:1])
    assert np.allclose(t, 0) and np.allclose(X, 0)
    with pytest.raises(ChartBoundaryError):
        from_compact(np.array([np.pi]), np.array([0.0]), xhat[:1])
    with pytest.raises(ParameterError):
        from_compact(np.zeros(1), np.ones(1), 2.0 * xhat[:1])


@given(st.floats(-2.0, 2.0), st.floats(0.05, 2.0), st.floats(0.0, 2 * math.pi))
@settings(max_examples=80, deadline=None)
def test_round_trip_from_noncompact(t, r, ang):
    x = np.array([[r * math.cos(ang), r * math.sin(ang)]])
    tt = np.array([t])
    phi, theta, xhat = to_compact(tt, x)
    t2, x2 = from_compact(phi, theta, xhat)
    assert abs(t2[0] - t) < 1e-10 * (1 + abs(t))
    assert np.max(np.abs(x2 - x)) < 1e-10 * (1 + r)


def test_round_trip_from_compact(rng):
    # restricted to the principal cell, the maps invert both ways
    phi = rng.uniform(-0.9 * np.pi, 0.9 * np.pi, 200)
    theta = rng.uniform(0.05, np.pi - 0.05, 200)
    keep = np.cos(phi) + np.cos(theta) > 0.05
    phi, theta = phi[keep], theta[keep]
    xhat = unit_vectors(rng, len(phi), 3)
    t, X = from_compact(phi, theta, xhat)
    phi2, theta2, xhat2 = to_compact(t, X)
    assert np.max(np.abs(phi2 - phi)) < 1e-10
    assert np.max(np.abs(theta2 - theta)) < 1e-10
    assert np.max(np.abs(xhat2 - xhat)) < 1e-10


def test_pull_constant(rng):
    one = NoncompactField(lambda t, xs: 1.0 + 0.0 * t, n=2)
    F = pull_to_compact(one, m=0, r=0.0)
    phi, theta, xhat = interior_cylinder_points(rng, 60, 2)
    assert np.allclose(F(phi, theta, xhat), 1.0, atol=1e-14)


def test_push_constant(rng):
    one = CompactField(lambda phi, theta, xs: 1.0 + 0.0 * phi, n=2)
    f = push_to_noncompact(one, r=0.0)
    t = rng.uniform(-2, 2, 40)
    X = rng.uniform(-2, 2, (40, 2))
    assert np.allclose(f(t, X), 1.0, atol=1e-14)
    assert np.allclose(f.dt(t, X), 0.0, atol=1e-13)


def test_pull_push_inverse_on_smooth_function(rng):
    n, r = 3, -1.0

    def core(t, xs):
        s = xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]
        return gexp(-(0.3 * t * t + 0.2 * s)) * (1 + 0.1 * xs[0])

    f = NoncompactField(core, n=n)
    back = push_to_noncompact(pull_to_compact(f, m=2, r=r), r=r)
    t = rng.uniform(-1.5, 1.5, 100)
    X = rng.uniform(-1.5, 1.5, (100, 3))
    assert np.max(np.abs(back(t, X) - f(t, X))) < 1e-10

    def Fcore(phi, theta, xs):
        nrm2 = xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]
        return gexp(1j * phi) * (xs[2] * xs[2] / nrm2 + 0.5)

    F = CompactField(Fcore, n=n)
    # forward then back, inside the principal cell
    phi = rng.uniform(-0.9 * np.pi, 0.9 * np.pi, 200)
    theta = rng.uniform(0.1, np.pi - 0.1, 200)
    keep = np.cos(phi) + np.cos(theta) > 0.1
    phi, theta = phi[keep], theta[keep]
    xhat = unit_vectors(rng, len(phi), 3)
    again = pull_to_compact(push_to_noncompact(F, r=r), m=0, r=r)
    assert np.max(np.abs(again(phi, theta, xhat) - F(phi, theta, xhat))) < 1e-10


def test_pull_periodicity(rng):
    """F(phi + 4 pi) = F(phi); for even m also F(phi + 2 pi) = F(phi)."""
    from wavebasis.modes import ModeIndex, default_m, solution_mode, weight
    for n, idx in [(3, ModeIndex(6, 1, 1)), (2, ModeIndex(5, 1, 0))]:
        f = solution_mode(idx, n)
        F = pull_to_compact(f, default_m(n), float(weight(n)))
        phi, theta, xhat = interior_cylinder_points(rng, 50, n, phi_range=(-2.0, 2.0))
        base = F(phi, theta, xhat)
        assert np.max(np.abs(F(phi + 4 * np.pi, theta, xhat) - base)) < 1e-12
        if default_m(n) % 2 == 0:
            assert np.max(np.abs(F(phi + 2 * np.pi, theta, xhat) - base)) < 1e-12


def test_push_phase_exponential_gives_lowest_mode(rng):
    """Transporting e^(-i r phi) back yields D^r (the ground solution, up
    to scale)."""
    n = 3
    r = (1 - n) / 2.0

    def Fcore(phi, theta, xs):
        return gexp(-1j * r * phi)

    f = push_to_noncompact(CompactField(Fcore, n=n), r=r)
    t = rng.uniform(-1.5, 1.5, 60)
    X = rng.uniform(-1.5, 1.5, (60, 3))
    D = (1 - 1j * t) ** 2 + np.sum(X ** 2, axis=1)
    assert np.max(np.abs(f(t, X) - D ** r)) < 1e-12
