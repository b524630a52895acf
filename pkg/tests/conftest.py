import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def unit_vectors(rng, count, n):
    v = rng.normal(size=(count, n))
    return v / np.linalg.norm(v, axis=1)[:, None]


def interior_cylinder_points(rng, count, n, phi_range=(-6.0, 6.0)):
    """Random cylinder points bounded away from chart-cell boundaries."""
    phi = np.empty(0)
    theta = np.empty(0)
    while len(phi) < count:
        cand_phi = rng.uniform(*phi_range, 2 * count)
        cand_theta = rng.uniform(0.15, np.pi - 0.15, 2 * count)
        c = np.cos(cand_phi) + np.cos(cand_theta)
        keep = (np.abs(c) > 0.05) & (np.abs(np.cos(cand_phi / 2)) > 0.05) \
            & (np.abs(np.sin(cand_phi / 2)) > 0.05)
        phi = np.concatenate([phi, cand_phi[keep]])
        theta = np.concatenate([theta, cand_theta[keep]])
    return phi[:count], theta[:count], unit_vectors(rng, count, n)
