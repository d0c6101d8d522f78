"""
Time integration of the homogeneous BGK model.

Relaxation sub-steps are exact for frozen (F, kappa):
    f_new = F + (f - F) exp(-kappa dt),
a convex combination of f and F, so 0 <= f <= 1 holds for any dt.
Two ways to pick the mu that freezes F and kappa:
  frozen-mu       mu = solve_mu(f) at the start of the step
  conservative    mu from an inner root so the step keeps the discrete density
A constant field adds a semi-Lagrangian k-space shift, split as
half relaxation / shift / half relaxation.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from shared.chemical_potential import MuSolveOptions, mu_for_density, solve_monotone, solve_mu
from shared.errors import GridError, ParameterError, ShiftBoundError
from shared.grid import MIN_ADVECTION_NODES, DistributionField, integrate, shift_interpolate
from shared.sweep import chunk_sum, sweep_sum

logger = logging.getLogger(__name__)

FROZEN_MU = "frozen-mu"
CONSERVATIVE = "conservative"
VARIANTS = (FROZEN_MU, CONSERVATIVE)

# largest k-space shift per step, in grid cells
MAX_SHIFT_CELLS = 4.0

# warm-started mu searches step out by this multiple of the previous mu change,
# never less than this multiple of abs_tol_mu
WARM_WIDTH_FACTOR = 4.0
WARM_WIDTH_FLOOR = 1e3


@dataclass(frozen=True)
class StepScheme:
    dt: float
    variant: str = CONSERVATIVE
    collisions: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown step variant {self.variant!r}; expected one of {', '.join(VARIANTS)}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError(f"dt must be positive, got {self.dt!r}")


@dataclass(frozen=True)
class Diagnostics:
    density: float
    min_f: float
    max_f: float
    residual: float
    step_mu: float = math.nan
    shift_ratio: float = 0.0
    max_kappa_dt: float = 0.0
    l2_to_equilibrium: float = math.nan
    mu_change: float = math.nan

    @property
    def bounds_ok(self) -> bool:
        return self.min_f >= 0.0 and self.max_f <= 1.0


@dataclass(frozen=True, eq=False)
class SimState:
    """(t, f, mu) with mu = solve_mu(f) and the diagnostics of the last step."""
    t: float
    f: DistributionField
    mu: float
    diagnostics: Diagnostics


@dataclass(frozen=True, eq=False)
class Simulation:
    """Everything run() needs; built from a SimConfig by shared.config."""
    ctx: object
    grid: object
    f0: DistributionField
    scheme: StepScheme
    t_end: float
    field: tuple = (0.0, 0.0)
    output_every: int = 1
    opts: MuSolveOptions = None
    mu_guess: float = 0.0


def _diagnostics(f: DistributionField, grid, report, **extra) -> Diagnostics:
    return Diagnostics(
        density=integrate(f, grid),
        min_f=f.min,
        max_f=f.max,
        residual=report.scaled_residual,
        **extra,
    )


def initial_state(f: DistributionField, ctx, grid, opts: MuSolveOptions = None,
                  t: float = 0.0, mu_guess: float = 0.0) -> SimState:
    report = solve_mu(f, ctx, grid, opts, mu_guess=mu_guess)
    return SimState(t=t, f=f, mu=report.mu, diagnostics=_diagnostics(f, grid, report, step_mu=report.mu))


# =============================================================================
# RELAXATION
# =============================================================================
def _start_width(state: SimState, ctx, opts: MuSolveOptions) -> float:
    """First bracket step for this step's mu searches, sized by the last mu change."""
    change = state.diagnostics.mu_change
    if not math.isfinite(change):
        return ctx.k_B_T
    return min(ctx.k_B_T, max(WARM_WIDTH_FACTOR * abs(change), WARM_WIDTH_FLOOR * opts.abs_tol_mu))


def _relax_values(values, mu, dt, table):
    equilibrium, rate = table.terms(mu)
    equilibrium, rate = equilibrium.reshape(values.shape), rate.reshape(values.shape)
    return equilibrium + (values - equilibrium) * np.exp(-rate * dt), float(np.max(rate)) * dt


def _conservative_mu(values, weights, dt, table, opts, mu_guess, width) -> float:
    """mu with int (1 - e^{-kappa dt}) (F - f) dk = 0, i.e. the step keeps the density."""
    flat_values, flat_w = np.ravel(values), np.ravel(weights)

    def density_change(mu):
        def integrand(lo, hi):
            equilibrium, rate = table.terms(mu, lo, hi)
            w = flat_w[lo:hi] * -np.expm1(-rate * dt)
            return w * (equilibrium - flat_values[lo:hi]), w * equilibrium

        return chunk_sum(integrand, table.size)

    return solve_monotone(density_change, mu_guess, width, opts).mu


def relax_step(state: SimState, scheme: StepScheme, ctx, grid, opts: MuSolveOptions = None,
               dt: float = None) -> SimState:
    """One exact relaxation step of length dt (default scheme.dt)."""
    opts = opts or MuSolveOptions()
    dt = scheme.dt if dt is None else dt
    if not scheme.collisions:
        return replace(state, t=state.t + dt)

    table = ctx.table(grid)
    width = _start_width(state, ctx, opts)
    values = state.f.values
    if scheme.variant == CONSERVATIVE:
        step_mu = _conservative_mu(values, grid.weights, dt, table, opts, state.mu, width)
    else:
        step_mu = state.mu
    new_values, max_kappa_dt = _relax_values(values, step_mu, dt, table)
    f_new = state.f.with_values(new_values)

    report = solve_mu(f_new, ctx, grid, opts, mu_guess=state.mu, width=width)
    diagnostics = _diagnostics(
        f_new, grid, report, step_mu=step_mu, max_kappa_dt=max_kappa_dt, mu_change=report.mu - state.mu,
    )
    return SimState(t=state.t + dt, f=f_new, mu=report.mu, diagnostics=diagnostics)


# =============================================================================
# FIELD DRIVE
# =============================================================================
def field_shift(field, dt: float, params) -> tuple:
    """k-space displacement -(e / hbar) E dt of the characteristics."""
    factor = -params.e_charge / params.hbar * dt
    return (factor * float(field[0]), factor * float(field[1]))


def field_step(state: SimState, field, scheme: StepScheme, ctx, grid, opts: MuSolveOptions = None) -> SimState:
    """Strang splitting: relax dt/2, shift along k(t) = k0 - (e/hbar) E t, relax dt/2."""
    if grid.kind != "cartesian":
        raise GridError("field drive needs a Cartesian grid")
    if min(grid.shape) < MIN_ADVECTION_NODES:
        raise GridError(f"field drive needs at least {MIN_ADVECTION_NODES} nodes per axis, got {grid.shape}")
    opts = opts or MuSolveOptions()

    delta_k = field_shift(field, scheme.dt, ctx.params)
    hx, hy = grid.spacing
    shift_ratio = max(abs(delta_k[0]) / hx, abs(delta_k[1]) / hy)
    if shift_ratio > MAX_SHIFT_CELLS:
        raise ShiftBoundError(
            f"shift of {shift_ratio:.3g} cells per step exceeds {MAX_SHIFT_CELLS:g}",
            scheme.dt * MAX_SHIFT_CELLS / shift_ratio,
        )
    if delta_k == (0.0, 0.0):
        return relax_step(state, scheme, ctx, grid, opts)

    half = 0.5 * scheme.dt
    first = relax_step(state, scheme, ctx, grid, opts, dt=half)
    shifted = shift_interpolate(first.f, grid, delta_k)
    moved = initial_state(shifted, ctx, grid, opts, t=first.t, mu_guess=first.mu)
    second = relax_step(moved, scheme, ctx, grid, opts, dt=half)
    diagnostics = replace(
        second.diagnostics,
        shift_ratio=shift_ratio,
        max_kappa_dt=2.0 * max(first.diagnostics.max_kappa_dt, second.diagnostics.max_kappa_dt),
        mu_change=second.mu - state.mu,
    )
    return replace(second, diagnostics=diagnostics)


# =============================================================================
# RUN
# =============================================================================
def step_count(t_end: float, dt: float) -> int:
    if t_end < 0:
        raise ParameterError(f"t_end must be >= 0, got {t_end!r}")
    return int(math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0


def _equilibrium_target(sim: Simulation, state: SimState):
    """F(., mu_inf) with the initial density, for homogeneous collisional runs."""
    if any(sim.field) or not sim.scheme.collisions or state.diagnostics.density <= 0:
        return None
    report = mu_for_density(state.diagnostics.density, sim.grid, sim.ctx.params, sim.opts, mu_guess=state.mu)
    return DistributionField.equilibrium(sim.grid, report.mu, sim.ctx.params).values


def _l2_distance(values, target, grid) -> float:
    return sweep_sum(lambda w, v, g: w * (v - g) ** 2, [grid.weights, values, target])


def run(sim: Simulation):
    """
    Generate SimState records from t = 0 to t_end: the initial state, every
    output_every-th step and the final step.
    """
    opts = sim.opts or MuSolveOptions()
    state = initial_state(sim.f0, sim.ctx, sim.grid, opts, mu_guess=sim.mu_guess)
    target = _equilibrium_target(sim, state)
    distance = _l2_distance(state.f.values, target, sim.grid) if target is not None else math.nan
    state = replace(state, diagnostics=replace(state.diagnostics, l2_to_equilibrium=distance))
    yield state

    n_steps = step_count(sim.t_end, sim.scheme.dt)
    logger.info("running %d steps of %s stepping (dt=%g s)", n_steps, sim.scheme.variant, sim.scheme.dt)
    for index in range(1, n_steps + 1):
        scheme = sim.scheme
        if index == n_steps:
            scheme = replace(scheme, dt=sim.t_end - (n_steps - 1) * sim.scheme.dt)
        if any(sim.field):
            state = field_step(state, sim.field, scheme, sim.ctx, sim.grid, opts)
        else:
            state = relax_step(state, scheme, sim.ctx, sim.grid, opts)

        if target is not None:
            new_distance = _l2_distance(state.f.values, target, sim.grid)
            if new_distance > distance * (1 + 1e-12):
                logger.warning("distance to equilibrium grew at step %d (%.6g -> %.6g)", index, distance, new_distance)
            distance = new_distance
            state = replace(state, diagnostics=replace(state.diagnostics, l2_to_equilibrium=distance))

        if index % sim.output_every == 0 or index == n_steps:
            yield state
