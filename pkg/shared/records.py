"""
File formats for BGK runs.

- Trajectory CSV: one row per emitted SimState, TRAJECTORY_COLUMNS.
- Distribution CSV: `# grid: {...}` comment line with the grid spec, then
  `r,f` (radial) or `kx,ky,f` (Cartesian) rows in grid order.
- Run summary JSON next to the trajectory.

Floats are written with repr(), the shortest string that round-trips.
"""
import csv
import json
import math
from pathlib import Path

import numpy as np
from scipy import constants

from shared.errors import GridError
from shared.grid import DistributionField, grid_from_spec

EV = constants.electron_volt

TRAJECTORY_COLUMNS = [
    "t", "mu_eV", "density_raw", "density_phys", "energy_density",
    "jx", "jy", "min_f", "max_f", "mass_residual",
]
GRID_COMMENT = "# grid: "
# node coordinates in a distribution file must match the grid to this relative accuracy
COORD_RTOL = 1e-9


def format_float(value) -> str:
    return repr(float(value))


def summary_path(out_path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.name + ".summary.json")


# =============================================================================
# TRAJECTORY
# =============================================================================
def trajectory_row(state, observables) -> list:
    return [
        format_float(v)
        for v in (
            state.t,
            state.mu / EV,
            observables.density_raw,
            observables.density_phys,
            observables.energy_density,
            observables.jx,
            observables.jy,
            state.diagnostics.min_f,
            state.diagnostics.max_f,
            state.diagnostics.residual,
        )
    ]


class TrajectoryWriter:
    """Streams trajectory rows, flushing after each so a failed run keeps its prefix."""

    def __init__(self, path):
        self.path = Path(path)
        self._file = None
        self._writer = None
        self.rows = 0

    def __enter__(self):
        self._file = open(self.path, "w", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(TRAJECTORY_COLUMNS)
        return self

    def write(self, state, observables):
        self._writer.writerow(trajectory_row(state, observables))
        self._file.flush()
        self.rows += 1

    def __exit__(self, exc_type, exc, tb):
        self._file.close()
        return False


def write_summary(out_path, summary: dict) -> Path:
    path = summary_path(out_path)
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


# =============================================================================
# DISTRIBUTION CSV
# =============================================================================
def write_distribution(stream, field: DistributionField):
    """Write `field` with its grid spec header to an open text stream."""
    grid = field.grid
    stream.write(GRID_COMMENT + json.dumps(grid.spec(), sort_keys=True) + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    if grid.kind == "radial":
        writer.writerow(["r", "f"])
        for r, f in zip(grid.r_nodes, field.values):
            writer.writerow([format_float(r), format_float(f)])
    else:
        writer.writerow(["kx", "ky", "f"])
        for i, kx in enumerate(grid.kx_nodes):
            for j, ky in enumerate(grid.ky_nodes):
                writer.writerow([format_float(kx), format_float(ky), format_float(field.values[i, j])])


def _coordinates_match(found, expected) -> bool:
    scale = max(float(np.max(np.abs(expected))), 1.0)
    return bool(np.all(np.abs(np.asarray(found) - expected) <= COORD_RTOL * scale))


def read_distribution(path, grid_spec: dict = None) -> DistributionField:
    """
    Read a distribution CSV. The grid comes from `grid_spec` if given, else
    from the file's grid comment. Occupancy bounds are not checked here.
    """
    path = Path(path)
    try:
        with open(path, "r", newline="") as f:
            lines = f.read().splitlines()
    except FileNotFoundError:
        raise GridError(f"distribution file not found: {path}")

    header_spec = None
    while lines and lines[0].startswith("#"):
        comment = lines.pop(0)
        if comment.startswith(GRID_COMMENT):
            try:
                header_spec = json.loads(comment[len(GRID_COMMENT):])
            except json.JSONDecodeError as e:
                raise GridError(f"malformed grid comment in {path}: {e}")
    spec = grid_spec or header_spec
    if spec is None:
        raise GridError(f"{path} has no grid comment; pass the grid spec explicitly")
    grid = grid_from_spec(spec)

    rows = list(csv.reader(lines))
    expected_header = ["r", "f"] if grid.kind == "radial" else ["kx", "ky", "f"]
    if not rows or [c.strip() for c in rows[0]] != expected_header:
        raise GridError(f"{path}: expected header {','.join(expected_header)}")
    try:
        table = np.array([[float(c) for c in row] for row in rows[1:] if row], dtype=float)
    except ValueError as e:
        raise GridError(f"{path}: non-numeric value ({e})")
    if table.shape != (grid.size, len(expected_header)):
        raise GridError(f"{path}: expected {grid.size} rows of {len(expected_header)} columns, got {table.shape}")
    if not np.all(np.isfinite(table)):
        raise GridError(f"{path}: non-finite value")

    if grid.kind == "radial":
        coords_ok = _coordinates_match(table[:, 0], grid.r_nodes)
        values = table[:, 1]
    else:
        kx, ky = grid.mesh()
        coords_ok = _coordinates_match(table[:, 0], kx.ravel()) and _coordinates_match(table[:, 1], ky.ravel())
        values = table[:, 2].reshape(grid.shape)
    if not coords_ok:
        raise GridError(f"{path}: node coordinates do not match the grid spec")
    return DistributionField(grid, values)


def load_grid_spec(path) -> dict:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except FileNotFoundError:
        raise GridError(f"grid spec file not found: {path}")
    except json.JSONDecodeError as e:
        raise GridError(f"malformed grid spec {path}: {e}")


def relative_drift(initial: float, final: float) -> float:
    return abs(final - initial) / initial if initial > 0 else math.nan
