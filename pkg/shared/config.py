"""
Simulation config loading.

A config is a strict JSON object; unknown keys and out-of-range values raise
ConfigError with the dotted path of the offending field (e.g. scheme.dt).
Energies are given in eV, the field in V/m, times in seconds.
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path

from scipy import constants

from shared.chemical_potential import MuSolveOptions
from shared.dynamics import VARIANTS, CONSERVATIVE, Simulation, StepScheme
from shared.errors import BGKError, ConfigError
from shared.grid import (
    DEFAULT_GAUSS_ORDER,
    DistributionField,
    build_cartesian_grid,
    build_radial_grid,
    default_eps_max,
)
from shared.kernels import KernelContext
from shared.material import DEFAULT_PARAMS_FILE, load_params
from shared.observables import DEFAULT_G_DEG

EV = constants.electron_volt

INITIAL_KINDS = ("equilibrium", "scaled", "shifted")


@dataclass(frozen=True)
class GridSpec:
    type: str
    n: int = 0
    order: int = DEFAULT_GAUSS_ORDER
    eps_max_eV: float = None
    k_max: float = None
    nx: int = 0
    ny: int = 0


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    mu0_eV: float
    s: float = 1.0
    k0: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class SchemeSpec:
    dt: float
    t_end: float
    variant: str = CONSERVATIVE
    output_every: int = 1
    collisions: bool = True


@dataclass(frozen=True)
class ToleranceSpec:
    abs_tol_mu_eV: float = 1e-14
    rel_tol_residual: float = 1e-13
    max_bracket_expansions: int = 64
    max_iterations: int = 200

    def options(self) -> MuSolveOptions:
        return MuSolveOptions(
            abs_tol_mu=self.abs_tol_mu_eV * EV,
            rel_tol_residual=self.rel_tol_residual,
            max_bracket_expansions=self.max_bracket_expansions,
            max_iterations=self.max_iterations,
        )


@dataclass(frozen=True)
class SimConfig:
    params_path: Path
    grid: GridSpec
    initial: InitialSpec
    field_V_per_m: tuple
    scheme: SchemeSpec
    tolerances: ToleranceSpec
    g_deg: float = DEFAULT_G_DEG


# =============================================================================
# FIELD READERS
# =============================================================================
def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _object(data, path: str, allowed: set, required: set = frozenset()) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(path, "must be an object")
    for key in data:
        if key not in allowed:
            raise ConfigError(_join(path, key), "unknown key")
    for key in sorted(required):
        if key not in data:
            raise ConfigError(_join(path, key), "is required")
    return data


def _number(data: dict, key: str, path: str, default=None, positive=False, minimum=None, maximum=None):
    if key not in data:
        return default
    value = data[key]
    where = _join(path, key)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(where, f"must be a finite number, got {value!r}")
    value = float(value)
    if positive and value <= 0:
        raise ConfigError(where, f"must be > 0, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(where, f"must be >= {minimum}, got {value!r}")
    if maximum is not None and value > maximum:
        raise ConfigError(where, f"must be <= {maximum}, got {value!r}")
    return value


def _integer(data: dict, key: str, path: str, default=None, minimum=1):
    if key not in data:
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(_join(path, key), f"must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(_join(path, key), f"must be >= {minimum}, got {value!r}")
    return value


def _vector(data: dict, key: str, path: str, default=(0.0, 0.0)) -> tuple:
    if key not in data:
        return default
    value = data[key]
    where = _join(path, key)
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigError(where, "must be a list of two numbers")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
            raise ConfigError(f"{where}[{i}]", f"must be a finite number, got {item!r}")
        out.append(float(item))
    return tuple(out)


def _choice(data: dict, key: str, path: str, choices, default=None) -> str:
    value = data.get(key, default)
    if value not in choices:
        raise ConfigError(_join(path, key), f"must be one of {', '.join(choices)}, got {value!r}")
    return value


# =============================================================================
# SECTIONS
# =============================================================================
def _grid_spec(data) -> GridSpec:
    kind = _choice(_object(data, "grid", {"type", "eps_max_eV", "n", "order", "k_max", "nx", "ny"}, {"type"}),
                   "type", "grid", ("radial", "cartesian"))
    if kind == "radial":
        _object(data, "grid", {"type", "eps_max_eV", "n", "order"}, {"n"})
        return GridSpec(
            type=kind,
            n=_integer(data, "n", "grid", minimum=16),
            order=_integer(data, "order", "grid", default=DEFAULT_GAUSS_ORDER),
            eps_max_eV=_number(data, "eps_max_eV", "grid", positive=True),
        )
    _object(data, "grid", {"type", "k_max", "nx", "ny"}, {"k_max", "nx", "ny"})
    return GridSpec(
        type=kind,
        k_max=_number(data, "k_max", "grid", positive=True),
        nx=_integer(data, "nx", "grid", minimum=2),
        ny=_integer(data, "ny", "grid", minimum=2),
    )


def _initial_spec(data, grid: GridSpec) -> InitialSpec:
    _object(data, "initial", {"kind", "mu0_eV", "s", "k0"}, {"kind", "mu0_eV"})
    kind = _choice(data, "kind", "initial", INITIAL_KINDS)
    spec = InitialSpec(
        kind=kind,
        mu0_eV=_number(data, "mu0_eV", "initial"),
        s=_number(data, "s", "initial", default=1.0),
        k0=_vector(data, "k0", "initial"),
    )
    if kind == "scaled" and not 0 < spec.s <= 1:
        raise ConfigError("initial.s", f"must satisfy 0 < s <= 1, got {spec.s!r}")
    if kind != "scaled" and "s" in data:
        raise ConfigError("initial.s", "only applies to the scaled initial condition")
    if kind == "shifted" and grid.type != "cartesian":
        raise ConfigError("initial.kind", "a shifted equilibrium needs a cartesian grid")
    if kind != "shifted" and "k0" in data:
        raise ConfigError("initial.k0", "only applies to the shifted initial condition")
    return spec


def _scheme_spec(data) -> SchemeSpec:
    _object(data, "scheme", {"variant", "dt", "t_end", "output_every", "collisions"}, {"dt", "t_end"})
    collisions = data.get("collisions", True)
    if not isinstance(collisions, bool):
        raise ConfigError("scheme.collisions", f"must be true or false, got {collisions!r}")
    return SchemeSpec(
        dt=_number(data, "dt", "scheme", positive=True),
        t_end=_number(data, "t_end", "scheme", minimum=0.0),
        variant=_choice(data, "variant", "scheme", VARIANTS, default=CONSERVATIVE),
        output_every=_integer(data, "output_every", "scheme", default=1),
        collisions=collisions,
    )


def _tolerance_spec(data) -> ToleranceSpec:
    _object(data, "tolerances", {"abs_tol_mu_eV", "rel_tol_residual", "max_bracket_expansions", "max_iterations"})
    defaults = ToleranceSpec()
    return ToleranceSpec(
        abs_tol_mu_eV=_number(data, "abs_tol_mu_eV", "tolerances", defaults.abs_tol_mu_eV, positive=True),
        rel_tol_residual=_number(data, "rel_tol_residual", "tolerances", defaults.rel_tol_residual, positive=True),
        max_bracket_expansions=_integer(data, "max_bracket_expansions", "tolerances",
                                        defaults.max_bracket_expansions),
        max_iterations=_integer(data, "max_iterations", "tolerances", defaults.max_iterations),
    )


def parse_sim_config(data, base_dir: Path = None) -> SimConfig:
    """Validate a decoded config object; relative params paths resolve against base_dir."""
    top = _object(
        data, "",
        {"params", "grid", "initial", "field_V_per_m", "scheme", "tolerances", "g_deg"},
        {"grid", "initial", "scheme"},
    )
    params_path = DEFAULT_PARAMS_FILE
    if "params" in top:
        if not isinstance(top["params"], str) or not top["params"]:
            raise ConfigError("params", "must be a file path")
        params_path = Path(top["params"])
        if not params_path.is_absolute() and base_dir is not None:
            params_path = base_dir / params_path

    grid = _grid_spec(top["grid"])
    field = _vector(top, "field_V_per_m", "")
    if any(field) and grid.type != "cartesian":
        raise ConfigError("field_V_per_m", "a nonzero field needs a cartesian grid")
    return SimConfig(
        params_path=params_path,
        grid=grid,
        initial=_initial_spec(top["initial"], grid),
        field_V_per_m=field,
        scheme=_scheme_spec(top["scheme"]),
        tolerances=_tolerance_spec(top.get("tolerances", {})),
        g_deg=_number(top, "g_deg", "", default=DEFAULT_G_DEG, positive=True),
    )


def load_sim_config(path) -> SimConfig:
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError("", f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError("", f"malformed JSON in {path}: {e}")
    return parse_sim_config(data, base_dir=path.parent)


# =============================================================================
# BUILD
# =============================================================================
def build_simulation(config: SimConfig) -> Simulation:
    """Load parameters and construct grid, initial field, scheme and tolerances."""
    params = load_params(config.params_path)
    ctx = KernelContext.from_params(params)
    mu0 = config.initial.mu0_eV * EV

    spec = config.grid
    initial = config.initial
    try:
        if spec.type == "radial":
            eps_max = spec.eps_max_eV * EV if spec.eps_max_eV else default_eps_max(mu0, params.k_B_T)
            grid = build_radial_grid(eps_max, spec.n, params, order=spec.order)
        else:
            grid = build_cartesian_grid(spec.k_max, spec.nx, spec.ny)
    except BGKError as e:
        raise ConfigError("grid", str(e))

    f0 = DistributionField.equilibrium(
        grid, mu0, params,
        scale=initial.s if initial.kind == "scaled" else 1.0,
        offset=initial.k0 if initial.kind == "shifted" else None,
    )
    scheme = StepScheme(dt=config.scheme.dt, variant=config.scheme.variant, collisions=config.scheme.collisions)

    return Simulation(
        ctx=ctx,
        grid=grid,
        f0=f0,
        scheme=scheme,
        t_end=config.scheme.t_end,
        field=config.field_V_per_m,
        output_every=config.scheme.output_every,
        opts=config.tolerances.options(),
        mu_guess=mu0,
    )
