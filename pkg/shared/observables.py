"""
Macroscopic moments of a distribution: density, energy density, mean
velocity and electric current density.
"""
import math
from dataclasses import dataclass

import numpy as np

from shared.errors import ParameterError
from shared.grid import check_occupancy, field_values
from shared.sweep import weighted_sum

# spin x valley
DEFAULT_G_DEG = 4.0


@dataclass(frozen=True)
class Observables:
    density_raw: float
    density_phys: float
    energy_density: float
    current: tuple
    mean_velocity: tuple
    g_deg: float

    @property
    def jx(self) -> float:
        return self.current[0]

    @property
    def jy(self) -> float:
        return self.current[1]


def physical_scale(g_deg: float) -> float:
    """Factor g_deg / (2 pi)^2 from raw k-space integrals to per-area quantities."""
    return g_deg / (2 * math.pi) ** 2


def compute_observables(f, grid, params, g_deg: float = DEFAULT_G_DEG) -> Observables:
    if not (math.isfinite(g_deg) and g_deg > 0):
        raise ParameterError(f"g_deg must be positive, got {g_deg!r}")
    values = check_occupancy(field_values(f, grid))
    weights = grid.weights
    density = weighted_sum(weights, values)
    energy = weighted_sum(weights, grid.energies(params) * values)

    if grid.kind == "cartesian":
        kx, ky = grid.mesh()
        k = np.hypot(kx, ky)
        # k/|k| at k = 0 is taken as the zero vector
        safe_k = np.where(k > 0, k, 1.0)
        ux = np.where(k > 0, kx / safe_k, 0.0)
        uy = np.where(k > 0, ky / safe_k, 0.0)
        flux = (weighted_sum(weights, ux * values), weighted_sum(weights, uy * values))
    else:
        # radial grids carry isotropic distributions only
        flux = (0.0, 0.0)

    scale = physical_scale(g_deg)
    current = tuple(-params.e_charge * scale * params.v_F * component for component in flux)
    if density > 0:
        velocity = tuple(params.v_F * component / density for component in flux)
    else:
        velocity = (0.0, 0.0)
    return Observables(
        density_raw=density,
        density_phys=scale * density,
        energy_density=energy,
        current=current,
        mean_velocity=velocity,
        g_deg=g_deg,
    )
