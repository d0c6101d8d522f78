"""
Shared fixtures: shipped literature parameters, synthetic scattering modes
obeying detailed balance (a = n_BE(b)), and the grids most tests run on.
"""
import numpy as np
import pytest
from scipy import constants

from app import create_app
from shared.grid import build_cartesian_grid, build_radial_grid
from shared.kernels import KernelContext
from shared.material import ScatteringMode, bose_einstein, load_params

EV = constants.electron_volt


def phonon_mode(label, C, b, k_B_T, anisotropy=0.0):
    return ScatteringMode(label, C=C, a=bose_einstein(b, k_B_T), b=b, anisotropy=anisotropy)


@pytest.fixture(scope="session")
def params():
    return load_params()


@pytest.fixture(scope="session")
def kT(params):
    return params.k_B_T


@pytest.fixture(scope="session")
def synthetic_modes(params):
    kT = params.k_B_T
    return [
        ScatteringMode("elastic", C=4e-25, a=0.0, b=0.0, elastic=True, anisotropy=1.0),
        phonon_mode("optical", 1.5e-24, 0.16 * EV, kT),
        phonon_mode("K", 8e-25, 0.12 * EV, kT, anisotropy=-1.0),
    ]


@pytest.fixture(scope="session")
def ctx(params, synthetic_modes):
    return KernelContext.create(params, synthetic_modes)


@pytest.fixture(scope="session")
def radial_grid(params):
    return build_radial_grid(1.2 * EV, 512, params)


@pytest.fixture(scope="session")
def small_radial_grid(params):
    return build_radial_grid(1.2 * EV, 128, params)


@pytest.fixture(scope="session")
def cartesian_grid():
    return build_cartesian_grid(1.6e9, 64, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def app():
    app = create_app()
    app.config.update(TESTING=True)
    return app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()
