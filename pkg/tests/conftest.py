import numpy as np
import pytest

from qfall import (
    MassPair,
    WavepacketSpec,
    make_grid,
)

EPS_RATIO = (np.e - 1.0) / (np.e + 1.0)  # epsilon^2 of the even cat at delta = delta0


@pytest.fixture(scope="session")
def wide_grid():
    return make_grid(-40.0, 40.0, 4096)


@pytest.fixture
def gaussian_at_two():
    return WavepacketSpec.gaussian(2.0, 1.0)


@pytest.fixture
def male_cat():
    return WavepacketSpec.male_cat(2.0, 1.0, 1.0)


@pytest.fixture
def female_cat():
    return WavepacketSpec.female_cat(2.0, 1.0, 1.0)


@pytest.fixture
def yurke_stoler():
    return WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0)


@pytest.fixture
def unit_mass():
    return MassPair(1.0, 1.0)


def random_cat(rng, z0_range=(-2.0, 2.0)) -> WavepacketSpec:
    """Valid random cat spec for property-style loops (seeded by caller)."""
    z0 = rng.uniform(*z0_range)
    delta0 = rng.uniform(0.6, 1.6)
    delta = rng.uniform(0.3, 2.5) * delta0
    mods = rng.uniform(0.3, 1.0, size=2)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=2)
    return WavepacketSpec.cat(
        z0, delta, delta0,
        mods[0] * np.exp(1j * phases[0]),
        mods[1] * np.exp(1j * phases[1]))


def grid_for(spec: WavepacketSpec, n_points: int = 4096):
    """Grid holding the spec with wide spectral margins."""
    half = spec.delta + 14.0 * spec.delta0
    return make_grid(spec.z0 - half, spec.z0 + half, n_points)
