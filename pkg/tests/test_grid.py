import logging
import math

import numpy as np
import pytest
from scipy import constants

from shared.errors import DistributionRangeError, GridError
from shared.grid import (
    DistributionField,
    build_cartesian_grid,
    build_radial_grid,
    check_occupancy,
    default_eps_max,
    grid_from_spec,
    integrate,
    reflect,
    shift_interpolate,
)
from shared.oracles import equilibrium_density

EV = constants.electron_volt


class TestRadialGrid:
    def test_disk_area(self, radial_grid):
        area = math.pi * radial_grid.r_max**2
        assert integrate(np.ones(radial_grid.shape), radial_grid) == pytest.approx(area, rel=1e-10)

    def test_nodes_inside_disk(self, radial_grid):
        r = radial_grid.r_nodes
        assert np.all(np.diff(r) > 0)
        assert r[0] > 0 and r[-1] < radial_grid.r_max

    @pytest.mark.parametrize("m", range(0, 15))
    def test_polynomial_exactness(self, params, m):
        grid = build_radial_grid(1.0 * EV, 64, params)
        R = grid.r_max
        exact = 2 * math.pi * R ** (m + 2) / (m + 2)
        assert integrate(grid.r_nodes**m, grid) == pytest.approx(exact, rel=1e-12)

    @pytest.mark.parametrize("mu_eV", [-0.2, 0.0, 0.1, 0.3])
    def test_equilibrium_density(self, params, radial_grid, mu_eV):
        field = DistributionField.equilibrium(radial_grid, mu_eV * EV, params)
        expected = equilibrium_density(mu_eV * EV, params)
        assert integrate(field, radial_grid) == pytest.approx(expected, rel=1e-8)

    def test_gaussian(self, radial_grid):
        s = radial_grid.r_max / 8
        values = np.exp(-radial_grid.r_nodes**2 / (2 * s**2))
        assert integrate(values, radial_grid) == pytest.approx(2 * math.pi * s**2, rel=1e-8)

    def test_refinement_reduces_error(self, params):
        mu = 0.1 * EV
        expected = equilibrium_density(mu, params)
        errors = []
        for n in (128, 256):
            grid = build_radial_grid(1.2 * EV, n, params, order=2)
            field = DistributionField.equilibrium(grid, mu, params)
            errors.append(abs(integrate(field, grid) - expected))
        assert errors[0] / errors[1] >= 4

    @pytest.mark.parametrize("eps_max, n, order", [
        (1.0 * EV, 8, 8),
        (1.0 * EV, 20, 8),
        (0.0, 64, 8),
        (-1.0, 64, 8),
        (1.0 * EV, 64, 0),
    ])
    def test_rejects(self, params, eps_max, n, order):
        with pytest.raises(GridError):
            build_radial_grid(eps_max, n, params, order=order)

    def test_default_cutoff(self, kT):
        assert default_eps_max(0.3 * EV, kT) == 0.3 * EV + 25 * kT
        assert default_eps_max(-0.3 * EV, kT) == 25 * kT


class TestCartesianGrid:
    def test_area(self, cartesian_grid):
        total = integrate(np.ones(cartesian_grid.shape), cartesian_grid)
        assert total == pytest.approx((2 * cartesian_grid.k_max) ** 2, rel=1e-12)

    def test_symmetric_nodes(self, cartesian_grid):
        kx = cartesian_grid.kx_nodes
        np.testing.assert_allclose(kx, -kx[::-1], rtol=1e-12)

    def test_gaussian(self, cartesian_grid):
        s = cartesian_grid.k_max / 8
        kx, ky = cartesian_grid.mesh()
        values = np.exp(-(kx**2 + ky**2) / (2 * s**2))
        assert integrate(values, cartesian_grid) == pytest.approx(2 * math.pi * s**2, rel=1e-10)

    @pytest.mark.parametrize("nx, ny", [(1, 8), (8, 0), (8.0, 8)])
    def test_rejects(self, nx, ny):
        with pytest.raises(GridError):
            build_cartesian_grid(1e9, nx, ny)

    def test_spec_round_trip(self, cartesian_grid, radial_grid):
        rebuilt = grid_from_spec(cartesian_grid.spec())
        np.testing.assert_array_equal(rebuilt.kx_nodes, cartesian_grid.kx_nodes)
        rebuilt = grid_from_spec(radial_grid.spec())
        np.testing.assert_array_equal(rebuilt.weights, radial_grid.weights)

    def test_unknown_spec(self):
        with pytest.raises(GridError):
            grid_from_spec({"type": "polar", "n": 16})
        with pytest.raises(GridError):
            grid_from_spec({"type": "cartesian", "k_max": 1e9})


class TestIntegrate:
    def test_linear(self, params, radial_grid):
        f = DistributionField.equilibrium(radial_grid, 0.1 * EV, params).values
        g = DistributionField.equilibrium(radial_grid, -0.1 * EV, params).values
        combined = integrate(0.3 * f + 0.5 * g, radial_grid)
        expected = 0.3 * integrate(f, radial_grid) + 0.5 * integrate(g, radial_grid)
        assert combined == pytest.approx(expected, rel=1e-13)

    def test_zero(self, radial_grid):
        assert integrate(np.zeros(radial_grid.shape), radial_grid) == 0.0

    def test_shape_mismatch(self, radial_grid, small_radial_grid):
        with pytest.raises(GridError):
            integrate(np.zeros(small_radial_grid.shape), radial_grid)
        field = DistributionField(small_radial_grid, np.zeros(small_radial_grid.shape))
        with pytest.raises(GridError):
            integrate(field, radial_grid)


class TestOccupancy:
    def test_rejects_out_of_range(self, radial_grid):
        values = np.full(radial_grid.shape, 0.5)
        values[3] = 1.5
        with pytest.raises(DistributionRangeError):
            DistributionField.create(radial_grid, values)

    def test_round_off_clamped_silently(self, radial_grid, caplog):
        values = np.full(radial_grid.shape, 1.0 + 1e-14)
        with caplog.at_level(logging.WARNING, logger="shared.grid"):
            field = DistributionField.create(radial_grid, values)
        assert field.max == 1.0
        assert caplog.text == ""

    def test_fast_mode_clamps_with_warning(self, caplog):
        with caplog.at_level(logging.WARNING, logger="shared.grid"):
            clamped = check_occupancy(np.array([-0.2, 0.5, 1.3]), checked=False)
        np.testing.assert_array_equal(clamped, [0.0, 0.5, 1.0])
        assert "clamping" in caplog.text

    def test_nan_rejected(self):
        with pytest.raises(DistributionRangeError):
            check_occupancy(np.array([0.5, np.nan]), checked=False)

    def test_shifted_equilibrium_needs_cartesian(self, params, radial_grid):
        with pytest.raises(GridError):
            DistributionField.equilibrium(radial_grid, 0.1 * EV, params, offset=(1e7, 0.0))

    def test_from_function_sees_node_energies(self, params, cartesian_grid):
        f = DistributionField.from_function(cartesian_grid, lambda eps: np.exp(-eps / (0.5 * EV)), params)
        assert f.values.shape == cartesian_grid.shape
        np.testing.assert_array_equal(f.values, np.exp(-cartesian_grid.energies(params) / (0.5 * EV)))

    def test_from_function_checks_range(self, params, radial_grid):
        with pytest.raises(DistributionRangeError):
            DistributionField.from_function(radial_grid, lambda eps: 2.0 + 0 * eps, params)

    def test_zero_offset_matches_plain_equilibrium(self, params, cartesian_grid):
        plain = DistributionField.equilibrium(cartesian_grid, 0.1 * EV, params, scale=0.5)
        offset = DistributionField.equilibrium(cartesian_grid, 0.1 * EV, params, scale=0.5, offset=(0.0, 0.0))
        np.testing.assert_array_equal(plain.values, offset.values)


class TestShift:
    @pytest.fixture
    def field(self, params, cartesian_grid):
        return DistributionField.equilibrium(cartesian_grid, 0.2 * EV, params, offset=(2e8, -1e8))

    def test_zero_shift_is_identity(self, field, cartesian_grid):
        shifted = shift_interpolate(field, cartesian_grid, (0.0, 0.0))
        np.testing.assert_array_equal(shifted.values, field.values)

    def test_one_cell_shift_is_exact(self, field, cartesian_grid):
        hx, _ = cartesian_grid.spacing
        shifted = shift_interpolate(field, cartesian_grid, (hx, 0.0)).values
        np.testing.assert_array_equal(shifted[1:, :], field.values[:-1, :])
        assert np.all(shifted[0, :] == 0)

    def test_two_cell_shift_is_exact(self, field, cartesian_grid):
        _, hy = cartesian_grid.spacing
        shifted = shift_interpolate(field, cartesian_grid, (0.0, -2 * hy)).values
        np.testing.assert_array_equal(shifted[:, :-2], field.values[:, 2:])
        assert np.all(shifted[:, -2:] == 0)

    def test_half_cell_shift_is_second_order(self):
        k_max = 1.0e9
        s = k_max / 6

        def bump(x, y):
            return 0.9 * np.exp(-(x**2 + y**2) / (2 * s**2))

        errors = []
        for n in (64, 128, 256):
            grid = build_cartesian_grid(k_max, n, n)
            h, _ = grid.spacing
            kx, ky = grid.mesh()
            field = DistributionField.create(grid, bump(kx, ky))
            shifted = shift_interpolate(field, grid, (0.5 * h, 0.5 * h)).values
            exact = bump(kx - 0.5 * h, ky - 0.5 * h)
            errors.append(math.sqrt(np.sum((shifted - exact) ** 2) * h * h))
        orders = [math.log2(errors[i] / errors[i + 1]) for i in range(2)]
        for order in orders:
            assert 1.8 <= order <= 2.2

    def test_bounds_preserved(self, field, cartesian_grid):
        hx, hy = cartesian_grid.spacing
        shifted = shift_interpolate(field, cartesian_grid, (0.37 * hx, -1.6 * hy))
        assert 0.0 <= shifted.min and shifted.max <= 1.0

    def test_rejects_large_shift(self, field, cartesian_grid):
        with pytest.raises(GridError):
            shift_interpolate(field, cartesian_grid, (cartesian_grid.k_max, 0.0))

    def test_needs_cartesian(self, params, radial_grid):
        field = DistributionField.equilibrium(radial_grid, 0.1 * EV, params)
        with pytest.raises(GridError):
            shift_interpolate(field, radial_grid, (1e7, 0.0))

    def test_reflect(self, field):
        twice = reflect(reflect(field))
        np.testing.assert_array_equal(twice.values, field.values)
        assert reflect(field).values[0, 0] == field.values[-1, -1]
