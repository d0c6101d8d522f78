import math

import numpy as np
import pytest
from scipy import constants

from shared.errors import ParameterError
from shared.grid import DistributionField, build_cartesian_grid, build_radial_grid, reflect
from shared.observables import DEFAULT_G_DEG, compute_observables, physical_scale
from shared.oracles import equilibrium_density

EV = constants.electron_volt


def current_scale(params, density):
    return params.e_charge * physical_scale(DEFAULT_G_DEG) * params.v_F * density


class TestDensity:
    @pytest.mark.parametrize("mu_eV", [-0.1, 0.1, 0.3])
    def test_equilibrium(self, params, radial_grid, mu_eV):
        f = DistributionField.equilibrium(radial_grid, mu_eV * EV, params)
        obs = compute_observables(f, radial_grid, params)
        assert obs.density_raw == pytest.approx(equilibrium_density(mu_eV * EV, params), rel=1e-8)
        assert obs.density_phys == pytest.approx(4 / (2 * math.pi) ** 2 * obs.density_raw, rel=1e-15)

    def test_degenerate_limit(self, params, kT):
        eta = 40.0
        grid = build_radial_grid(eta * kT + 30 * kT, 512, params)
        f = DistributionField.equilibrium(grid, eta * kT, params)
        reduced = compute_observables(f, grid, params).density_raw * params.hbar_v_F**2 / (2 * math.pi * kT**2)
        assert reduced == pytest.approx(eta**2 / 2 + math.pi**2 / 6, rel=1e-8)

    def test_degeneracy_factor(self, params, radial_grid):
        f = DistributionField.equilibrium(radial_grid, 0.1 * EV, params)
        obs = compute_observables(f, radial_grid, params, g_deg=2.0)
        assert obs.density_phys == pytest.approx(2 / (2 * math.pi) ** 2 * obs.density_raw, rel=1e-15)
        with pytest.raises(ParameterError):
            compute_observables(f, radial_grid, params, g_deg=0.0)


class TestCurrent:
    def test_radial_grid_carries_no_current(self, params, radial_grid):
        f = DistributionField.equilibrium(radial_grid, 0.1 * EV, params)
        obs = compute_observables(f, radial_grid, params)
        assert obs.current == (0.0, 0.0)

    def test_isotropic_distribution(self, params, cartesian_grid):
        f = DistributionField.equilibrium(cartesian_grid, 0.2 * EV, params)
        obs = compute_observables(f, cartesian_grid, params)
        bound = 1e-10 * current_scale(params, obs.density_raw)
        assert abs(obs.jx) <= bound and abs(obs.jy) <= bound

    def test_bump_direction(self, params):
        grid = build_cartesian_grid(1.6e9, 128, 128)
        kx, ky = grid.mesh()
        k0 = (6e8, 4e8)
        s = 5e7
        f = DistributionField.create(grid, 0.9 * np.exp(-((kx - k0[0]) ** 2 + (ky - k0[1]) ** 2) / (2 * s**2)))
        obs = compute_observables(f, grid, params)
        target = math.atan2(k0[1], k0[0])
        velocity_angle = math.atan2(obs.mean_velocity[1], obs.mean_velocity[0])
        current_angle = math.atan2(-obs.jy, -obs.jx)
        assert abs(velocity_angle - target) <= math.radians(1)
        assert abs(current_angle - target) <= math.radians(1)

    def test_reflection_reverses_current(self, params, cartesian_grid):
        f = DistributionField.equilibrium(cartesian_grid, 0.2 * EV, params, offset=(2e8, -1e8))
        obs = compute_observables(f, cartesian_grid, params)
        mirrored = compute_observables(reflect(f), cartesian_grid, params)
        assert mirrored.density_raw == pytest.approx(obs.density_raw, rel=1e-14)
        assert mirrored.energy_density == pytest.approx(obs.energy_density, rel=1e-12)
        assert mirrored.current == pytest.approx(tuple(-c for c in obs.current), rel=1e-10)

    def test_linear(self, params, cartesian_grid):
        f = DistributionField.equilibrium(cartesian_grid, 0.2 * EV, params, offset=(2e8, 0.0))
        g = DistributionField.equilibrium(cartesian_grid, 0.1 * EV, params, offset=(0.0, -1.5e8))
        mixed = compute_observables(0.3 * f.values + 0.5 * g.values, cartesian_grid, params)
        obs_f = compute_observables(f, cartesian_grid, params)
        obs_g = compute_observables(g, cartesian_grid, params)
        assert mixed.density_raw == pytest.approx(0.3 * obs_f.density_raw + 0.5 * obs_g.density_raw, rel=1e-13)
        for axis in (0, 1):
            expected = 0.3 * obs_f.current[axis] + 0.5 * obs_g.current[axis]
            assert mixed.current[axis] == pytest.approx(expected, rel=1e-12)

    def test_empty_field(self, params, cartesian_grid):
        obs = compute_observables(np.zeros(cartesian_grid.shape), cartesian_grid, params)
        assert obs.density_raw == 0.0
        assert obs.mean_velocity == (0.0, 0.0)
