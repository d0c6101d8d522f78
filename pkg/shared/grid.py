"""
Discrete k-space for the BGK solver.

RadialGrid: composite Gauss-Legendre panels on [0, r_max] with the 2 pi r
area Jacobian folded into the weights (isotropic distributions).
CartesianGrid: uniform midpoint tensor grid on [-k_max, k_max]^2
(field-driven, anisotropic distributions).
DistributionField: occupancy values on either grid.
"""
import logging
import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.special import expit, roots_legendre

from shared.errors import DistributionRangeError, GridError
from shared.sweep import weighted_sum

logger = logging.getLogger(__name__)

MIN_RADIAL_NODES = 16
MIN_ADVECTION_NODES = 32
DEFAULT_GAUSS_ORDER = 8
# occupancies this far outside [0, 1] are round-off and clamped silently
OCCUPANCY_TOL = 1e-12
# shifts within this many cells of an integer are applied as lattice translations
SHIFT_SNAP_TOL = 1e-9
# neglected Fermi-Dirac tail beyond eps_max is below e^-25
EPS_MAX_TAIL_KT = 25.0


def check_occupancy(values, checked: bool = True, tol: float = OCCUPANCY_TOL):
    """
    Return values clamped to [0, 1].

    Violations up to `tol` are clamped silently. Larger ones raise in checked
    mode and are clamped with a warning in fast mode.
    """
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DistributionRangeError("occupancy contains NaN or infinite values")
    lo, hi = float(values.min(initial=0.0)), float(values.max(initial=1.0))
    if lo >= 0.0 and hi <= 1.0:
        return values
    excess = max(-lo, hi - 1.0)
    if excess > tol:
        if checked:
            raise DistributionRangeError(f"occupancy outside [0, 1]: min {lo!r}, max {hi!r}")
        logger.warning("clamping occupancy outside [0, 1] (min %r, max %r)", lo, hi)
    return np.clip(values, 0.0, 1.0)


def default_eps_max(mu_max: float, k_B_T: float) -> float:
    """Radial cutoff energy covering F(., mu) for every mu <= mu_max."""
    return max(mu_max, 0.0) + EPS_MAX_TAIL_KT * k_B_T


# =============================================================================
# GRIDS
# =============================================================================
@dataclass(frozen=True, eq=False)
class RadialGrid:
    r_nodes: np.ndarray
    weights: np.ndarray
    r_max: float
    order: int
    kind: ClassVar[str] = "radial"

    @property
    def shape(self) -> tuple:
        return self.r_nodes.shape

    @property
    def size(self) -> int:
        return self.r_nodes.size

    def k_magnitude(self) -> np.ndarray:
        return self.r_nodes

    def energies(self, params) -> np.ndarray:
        return params.hbar_v_F * self.r_nodes

    def spec(self) -> dict:
        return {"type": "radial", "r_max": self.r_max, "n": self.size, "order": self.order}


@dataclass(frozen=True, eq=False)
class CartesianGrid:
    kx_nodes: np.ndarray
    ky_nodes: np.ndarray
    k_max: float
    cell_area: float
    kind: ClassVar[str] = "cartesian"

    @property
    def shape(self) -> tuple:
        return (self.kx_nodes.size, self.ky_nodes.size)

    @property
    def size(self) -> int:
        return self.kx_nodes.size * self.ky_nodes.size

    @property
    def spacing(self) -> tuple:
        return (2 * self.k_max / self.kx_nodes.size, 2 * self.k_max / self.ky_nodes.size)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.shape, self.cell_area)

    def mesh(self) -> tuple:
        return np.meshgrid(self.kx_nodes, self.ky_nodes, indexing="ij")

    def k_magnitude(self) -> np.ndarray:
        kx, ky = self.mesh()
        return np.hypot(kx, ky)

    def energies(self, params) -> np.ndarray:
        return params.hbar_v_F * self.k_magnitude()

    def spec(self) -> dict:
        nx, ny = self.shape
        return {"type": "cartesian", "k_max": self.k_max, "nx": nx, "ny": ny}


def _radial_grid(r_max: float, n: int, order: int) -> RadialGrid:
    if not (isinstance(n, int) and n >= MIN_RADIAL_NODES):
        raise GridError(f"radial grid needs at least {MIN_RADIAL_NODES} nodes, got {n!r}")
    if not (isinstance(order, int) and order >= 1):
        raise GridError(f"Gauss order must be a positive integer, got {order!r}")
    if n % order:
        raise GridError(f"node count {n} is not a multiple of the Gauss order {order}")
    if not (math.isfinite(r_max) and r_max > 0):
        raise GridError(f"radial extent must be positive, got {r_max!r}")

    x, w = roots_legendre(order)
    edges = np.linspace(0.0, r_max, n // order + 1)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    r = (mid + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel() * 2.0 * np.pi * r
    return RadialGrid(r_nodes=r, weights=weights, r_max=float(r_max), order=order)


def build_radial_grid(eps_max: float, n: int, params, order: int = DEFAULT_GAUSS_ORDER) -> RadialGrid:
    """Composite Gauss-Legendre grid on the disk of energies eps <= eps_max."""
    if not (math.isfinite(eps_max) and eps_max > 0):
        raise GridError(f"eps_max must be positive, got {eps_max!r}")
    return _radial_grid(eps_max / params.hbar_v_F, n, order)


def build_cartesian_grid(k_max: float, nx: int, ny: int) -> CartesianGrid:
    """Midpoint grid on [-k_max, k_max]^2, symmetric about the origin."""
    if not (math.isfinite(k_max) and k_max > 0):
        raise GridError(f"k_max must be positive, got {k_max!r}")
    for name, count in (("nx", nx), ("ny", ny)):
        if not (isinstance(count, int) and count >= 2):
            raise GridError(f"{name} must be an integer >= 2, got {count!r}")
    hx, hy = 2 * k_max / nx, 2 * k_max / ny
    kx = -k_max + (np.arange(nx) + 0.5) * hx
    ky = -k_max + (np.arange(ny) + 0.5) * hy
    return CartesianGrid(kx_nodes=kx, ky_nodes=ky, k_max=float(k_max), cell_area=hx * hy)


def grid_from_spec(spec: dict):
    """Rebuild a grid from the dict produced by grid.spec()."""
    if not isinstance(spec, dict):
        raise GridError("grid spec must be an object")
    kind = spec.get("type")
    try:
        if kind == "radial":
            return _radial_grid(float(spec["r_max"]), spec["n"], spec.get("order", DEFAULT_GAUSS_ORDER))
        if kind == "cartesian":
            return build_cartesian_grid(float(spec["k_max"]), spec["nx"], spec["ny"])
    except KeyError as e:
        raise GridError(f"grid spec is missing {e.args[0]!r}")
    raise GridError(f"unknown grid type: {kind!r}")


# =============================================================================
# DISTRIBUTION FIELD
# =============================================================================
@dataclass(frozen=True, eq=False)
class DistributionField:
    grid: object
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridError(f"field shape {values.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "values", values)

    @classmethod
    def create(cls, grid, values, checked: bool = True) -> "DistributionField":
        """Field with the occupancy bounds enforced."""
        return cls(grid, check_occupancy(values, checked=checked))

    @classmethod
    def from_function(cls, grid, fn, params) -> "DistributionField":
        """Field with values fn(eps) at the node energies."""
        return cls.create(grid, fn(grid.energies(params)))

    @classmethod
    def equilibrium(cls, grid, mu: float, params, scale: float = 1.0, offset=None) -> "DistributionField":
        """scale * F(eps(k - offset), mu); offset needs a Cartesian grid."""
        occupation = lambda eps: scale * expit(-(eps - mu) / params.k_B_T)
        if offset is None or not np.any(offset):
            return cls.from_function(grid, occupation, params)
        if grid.kind != "cartesian":
            raise GridError("a shifted equilibrium needs a Cartesian grid")
        kx, ky = grid.mesh()
        return cls.create(grid, occupation(params.hbar_v_F * np.hypot(kx - offset[0], ky - offset[1])))

    def with_values(self, values, checked: bool = True) -> "DistributionField":
        return DistributionField.create(self.grid, values, checked=checked)

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def max(self) -> float:
        return float(self.values.max())


def field_values(field, grid) -> np.ndarray:
    """Node values of a DistributionField or bare array, checked against grid."""
    if isinstance(field, DistributionField):
        if field.grid is not grid and field.grid.spec() != grid.spec():
            raise GridError("field is defined on a different grid")
        return field.values
    values = np.asarray(field, dtype=float)
    if values.shape != grid.shape:
        raise GridError(f"field shape {values.shape} does not match grid shape {grid.shape}")
    return values


def integrate(field, grid) -> float:
    """Quadrature sum_i w_i f_i over the grid."""
    return weighted_sum(grid.weights, field_values(field, grid))


# =============================================================================
# ADVECTION
# =============================================================================
def _lattice_shift(values: np.ndarray, sx: int, sy: int) -> np.ndarray:
    """out[i, j] = values[i + sx, j + sy], zero where the source is off-grid."""
    out = np.zeros_like(values)
    nx, ny = values.shape

    def slices(s, n):
        if s >= 0:
            return slice(0, n - s), slice(s, n)
        return slice(-s, n), slice(0, n + s)

    (dst_x, src_x), (dst_y, src_y) = slices(sx, nx), slices(sy, ny)
    out[dst_x, dst_y] = values[src_x, src_y]
    return out


def shift_interpolate(field, grid: CartesianGrid, delta_k) -> DistributionField:
    """
    Semi-Lagrangian translation by delta_k: new f(k) = old f(k - delta_k),
    bilinear in between nodes and 0 where the foot leaves the domain. Shifts
    that land on the lattice are exact.
    """
    if grid.kind != "cartesian":
        raise GridError("advection needs a Cartesian grid")
    values = field_values(field, grid)
    dkx, dky = (float(d) for d in delta_k)
    if abs(dkx) >= grid.k_max or abs(dky) >= grid.k_max:
        raise GridError(f"shift ({dkx:.6g}, {dky:.6g}) exceeds the domain half-width {grid.k_max:.6g}")

    hx, hy = grid.spacing
    # foot of the characteristic, in cells
    sx, sy = -dkx / hx, -dky / hy
    rx, ry = round(sx), round(sy)
    if abs(sx - rx) <= SHIFT_SNAP_TOL and abs(sy - ry) <= SHIFT_SNAP_TOL:
        shifted = _lattice_shift(values, int(rx), int(ry))
    else:
        ix, iy = np.indices(values.shape, dtype=float)
        shifted = map_coordinates(
            values, [ix + sx, iy + sy], order=1, mode="grid-constant", cval=0.0, prefilter=False
        )
    return DistributionField(grid, np.clip(shifted, 0.0, 1.0))


def reflect(field: DistributionField) -> DistributionField:
    """f(-k) on a Cartesian grid (the midpoint lattice is symmetric about 0)."""
    if field.grid.kind != "cartesian":
        raise GridError("reflection needs a Cartesian grid")
    return DistributionField(field.grid, field.values[::-1, ::-1].copy())
