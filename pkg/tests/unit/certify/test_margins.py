import numpy as np
import pytest
from pydantic import ValidationError

from barrierflow.certify.margins import Margins, covering_radius, eta_margin, probe_set, psi_margin
from barrierflow.errors import DimensionError


def brute_force_radius(latents, probes):
    distances = np.linalg.norm(probes[:, None, :] - latents[None, :, :], axis=2)
    return distances.min(axis=1).max()


def test_covering_radius_midpoint():
    probes = np.linspace(0.0, 1.0, 101)[:, None]
    assert covering_radius(np.array([[0.0], [1.0]]), probes) == pytest.approx(0.5)


def test_covering_radius_matches_brute_force():
    rng = np.random.default_rng(0)
    latents = rng.normal(size=(40, 3))
    probes = rng.normal(size=(200, 3))
    assert covering_radius(latents, probes) == pytest.approx(brute_force_radius(latents, probes))


def test_self_cover_is_zero():
    latents = np.random.default_rng(1).random((10, 2))
    assert covering_radius(latents, latents[:4]) == 0.0


def test_more_data_never_increases_radius():
    rng = np.random.default_rng(2)
    latents = rng.random((20, 2))
    probes = probe_set(latents, resolution=20)
    before = covering_radius(latents, probes)
    after = covering_radius(np.vstack([latents, rng.random((20, 2))]), probes)
    assert after <= before


def test_covering_radius_rejects_empty_and_mismatched():
    with pytest.raises(DimensionError):
        covering_radius(np.zeros((0, 2)), np.zeros((3, 2)))
    with pytest.raises(DimensionError):
        covering_radius(np.zeros((3, 2)), np.zeros((3, 3)))


def test_margin_products():
    assert psi_margin(2.0, 0.1) == pytest.approx(0.2)
    assert psi_margin(5.0, 0.0) == 0.0
    assert psi_margin(2.0, 0.2) == pytest.approx(2 * psi_margin(2.0, 0.1))
    assert eta_margin(1.5, 0.2) == pytest.approx(0.3)
    assert eta_margin(1.5, 0.0) == 0.0
    with pytest.raises(ValueError):
        psi_margin(-1.0, 0.1)


def test_margins_are_sound_by_construction():
    margins = Margins.from_estimates(2.0, 0.1, 0.05)
    assert margins.sound
    assert margins.eta == pytest.approx(0.1)
    with pytest.raises(ValidationError):
        Margins(lipschitz_bound=1.0, psi=-0.1)


def test_probe_set_modes():
    latents = np.array([[0.0, 0.0], [1.0, 2.0]])
    grid = probe_set(latents, resolution=5)
    assert grid.shape == (25, 2)
    assert grid.min(axis=0).tolist() == [0.0, 0.0]
    assert grid.max(axis=0).tolist() == [1.0, 2.0]
    sobol = probe_set(np.random.default_rng(0).random((10, 4)), sobol_points=100, seed=1)
    assert sobol.shape == (128, 4)
