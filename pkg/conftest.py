"""
Shared fixtures: a small synthetic dataset generated once per session
"""

import pytest

from dataio import SyntheticSettings, generate_synthetic


@pytest.fixture(scope='session')
def tiny_settings():
    return SyntheticSettings(n_sites=8, grid_nx=6, grid_ny=6, n_days=20, n_inputs=3,
                             cell_km=12.0)


@pytest.fixture(scope='session')
def tiny_synthetic(tiny_settings):
    """(field, data, truth) for the tiny settings, seed 3"""
    return generate_synthetic(tiny_settings, seed=3)
