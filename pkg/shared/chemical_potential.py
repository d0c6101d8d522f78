"""
Chemical-potential solver.

For a frozen admissible f the mass residual R(mu) = int kappa (F - f) dk is
strictly increasing in mu, negative as mu -> -inf and positive as mu -> +inf,
so it has exactly one root. The root is bracketed by geometric expansion and
refined by Illinois regula falsi with a bisection guard.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.special import expit

from shared.errors import BracketError, ParameterError, SolverError
from shared.grid import check_occupancy, field_values
from shared.sweep import chunk_sum, sweep_sum

logger = logging.getLogger(__name__)

EV = constants.electron_volt

# regula falsi steps allowed without halving the bracket before a forced bisection
STALL_LIMIT = 3


@dataclass(frozen=True)
class MuSolveOptions:
    """Stopping rules; abs_tol_mu is an energy in joules."""
    abs_tol_mu: float = 1e-14 * EV
    rel_tol_residual: float = 1e-13
    max_bracket_expansions: int = 64
    max_iterations: int = 200

    def __post_init__(self):
        for name in ("abs_tol_mu", "rel_tol_residual"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive, got {value!r}")
        for name in ("max_bracket_expansions", "max_iterations"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value >= 1):
                raise ParameterError(f"{name} must be an integer >= 1, got {value!r}")


@dataclass(frozen=True)
class MuSolveReport:
    mu: float
    residual: float
    scale: float
    iterations: int
    bracket: tuple
    status: str

    @property
    def mu_eV(self) -> float:
        return self.mu / EV

    @property
    def scaled_residual(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual


# =============================================================================
# GENERIC MONOTONE ROOT
# =============================================================================
def _converged(value: float, scale: float, opts: MuSolveOptions) -> bool:
    return value == 0 or abs(value) <= opts.rel_tol_residual * abs(scale)


def expand_bracket(fn, center: float, width: float, max_expansions: int, r_center: float = None):
    """
    Find lo < hi with fn(lo) < 0 < fn(hi), starting from center and searching
    only on the side the sign of fn(center) points to, doubling the step each
    time. fn returns (value, scale); only the value's sign is used here.
    """
    if r_center is None:
        r_center = fn(center)[0]
    lo = hi = center
    r_lo = r_hi = r_center
    expansions = 0
    while not (r_lo < 0 < r_hi):
        if expansions >= max_expansions:
            raise BracketError(lo, hi, r_lo, r_hi, expansions)
        if r_lo >= 0:
            if r_lo > 0:
                hi, r_hi = lo, r_lo
            lo = center - width
            r_lo = fn(lo)[0]
        else:
            if r_hi < 0:
                lo, r_lo = hi, r_hi
            hi = center + width
            r_hi = fn(hi)[0]
        width *= 2.0
        expansions += 1
    logger.debug("bracket [%.6g, %.6g] after %d expansions", lo, hi, expansions)
    return lo, hi, r_lo, r_hi


def illinois(fn, lo: float, hi: float, r_lo: float, r_hi: float, opts: MuSolveOptions) -> MuSolveReport:
    """
    Illinois regula falsi on a sign-changing bracket of an increasing fn.
    Stops when |value| <= rel_tol_residual * scale or the bracket is narrower
    than abs_tol_mu.
    """
    side = 0
    width_mark = hi - lo
    stalled = 0
    for iteration in range(1, opts.max_iterations + 1):
        if stalled >= STALL_LIMIT:
            x = 0.5 * (lo + hi)
        else:
            x = hi - r_hi * (hi - lo) / (r_hi - r_lo)
            if not lo < x < hi:
                x = 0.5 * (lo + hi)
        value, scale = fn(x)
        logger.debug("iteration %d: x=%.17g residual=%.6g", iteration, x, value)

        if _converged(value, scale, opts):
            return MuSolveReport(x, value, scale, iteration, (lo, hi), "residual")
        if value < 0:
            lo, r_lo = x, value
            if side == -1:
                r_hi *= 0.5
            side = -1
        else:
            hi, r_hi = x, value
            if side == 1:
                r_lo *= 0.5
            side = 1

        if hi - lo <= opts.abs_tol_mu:
            return MuSolveReport(x, value, scale, iteration, (lo, hi), "bracket")
        if hi - lo <= 0.5 * width_mark:
            width_mark = hi - lo
            stalled = 0
        else:
            stalled += 1
    raise SolverError(f"no convergence after {opts.max_iterations} iterations", (lo, hi))


def solve_monotone(fn, center: float, width: float, opts: MuSolveOptions) -> MuSolveReport:
    """Root of an increasing fn near center; center itself is accepted when it already converges."""
    value, scale = fn(center)
    if _converged(value, scale, opts):
        return MuSolveReport(center, value, scale, 0, (center, center), "initial")
    lo, hi, r_lo, r_hi = expand_bracket(fn, center, width, opts.max_bracket_expansions, r_center=value)
    return illinois(fn, lo, hi, r_lo, r_hi, opts)


# =============================================================================
# MASS RESIDUAL
# =============================================================================
class MassResidual:
    """R(mu) = int kappa(eps, mu) (F(eps, mu) - f) dk for a frozen f."""

    def __init__(self, f, ctx, grid, checked: bool = True):
        self.ctx = ctx
        self.grid = grid
        self.values = np.ravel(check_occupancy(field_values(f, grid), checked=checked))
        self.weights = np.ravel(grid.weights)
        self.table = ctx.table(grid)

    def evaluate(self, mu: float):
        """(R(mu), int kappa F dk)"""

        def integrand(lo, hi):
            equilibrium, rate = self.table.terms(mu, lo, hi)
            w = self.weights[lo:hi]
            gain = w * rate * equilibrium
            return w * rate * (equilibrium - self.values[lo:hi]), gain

        return chunk_sum(integrand, self.values.size)

    def __call__(self, mu: float) -> float:
        return self.evaluate(mu)[0]


def residual(f, mu: float, ctx, grid, checked: bool = True) -> float:
    """Mass-conservation residual int kappa (F - f) dk at mu."""
    return MassResidual(f, ctx, grid, checked=checked)(mu)


def residual_and_scale(f, mu: float, ctx, grid, checked: bool = True):
    """(residual, int kappa F dk); the second value scales the stopping rule."""
    return MassResidual(f, ctx, grid, checked=checked).evaluate(mu)


def bracket(f, ctx, grid, opts: MuSolveOptions = None, mu_guess: float = 0.0, width: float = None):
    """(mu_lo, mu_hi) with residual(mu_lo) < 0 < residual(mu_hi)."""
    opts = opts or MuSolveOptions()
    problem = MassResidual(f, ctx, grid)
    width = ctx.k_B_T if width is None else width
    lo, hi, _, _ = expand_bracket(problem.evaluate, mu_guess, width, opts.max_bracket_expansions)
    return lo, hi


def solve_mu(f, ctx, grid, opts: MuSolveOptions = None, mu_guess: float = 0.0,
             checked: bool = True, width: float = None) -> MuSolveReport:
    """
    The unique mu with residual(f, mu) = 0, searched outward from mu_guess in
    steps starting at width (default k_B T).
    """
    opts = opts or MuSolveOptions()
    problem = MassResidual(f, ctx, grid, checked=checked)
    width = ctx.k_B_T if width is None else width
    report = solve_monotone(problem.evaluate, mu_guess, width, opts)
    logger.debug("solve_mu: mu=%.12g eV in %d iterations (%s)", report.mu_eV, report.iterations, report.status)
    return report


def mu_for_density(target: float, grid, params, opts: MuSolveOptions = None,
                   mu_guess: float = 0.0) -> MuSolveReport:
    """mu such that the discrete integral of F(eps(k), mu) equals target."""
    if not (math.isfinite(target) and target > 0):
        raise ParameterError(f"target density must be positive, got {target!r}")
    opts = opts or MuSolveOptions()
    weights = np.ravel(grid.weights)
    eps = np.ravel(grid.energies(params))

    def density_gap(mu):
        total = sweep_sum(lambda w, e: w * expit(-(e - mu) / params.k_B_T), [weights, eps])
        return total - target, target

    return solve_monotone(density_gap, mu_guess, params.k_B_T, opts)
