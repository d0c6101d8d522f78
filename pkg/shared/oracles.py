"""
Reference oracles.

Slow, independent evaluations used to cross-check the closed forms and the
solvers: numeric angular coefficients, gain/loss integrals with the energy
deltas resolved in the radial variable and the angle integrated numerically,
adaptive equilibrium density, and a dense mu scan. run_checks() bundles them
into the report printed by `validate`.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as quadrature
from scipy.optimize import brentq
from scipy.special import roots_legendre

from shared.chemical_potential import EV, residual, solve_mu
from shared.errors import BGKError, OracleError
from shared.grid import (
    DistributionField,
    build_radial_grid,
    check_occupancy,
    default_eps_max,
    field_values,
    integrate,
)
from shared.kernels import (
    KernelContext,
    kappa,
    kappa_low_mu_limit,
    lambda_bounds,
    lambda_fn,
    phi0,
    phi1,
    relaxation_terms,
)
from shared.material import build_modes, fermi_dirac, rate_terms

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleConfig:
    angular_order: int = 64
    sample_points: int = 100
    envelope_points: int = 10_000
    scan_points: int = 2001
    scan_range_eV: tuple = (-1.0, 1.0)
    grid_nodes: int = 256
    seed: int = 20240611

    def __post_init__(self):
        if self.scan_points < 1000:
            raise OracleError("mu scans need at least 1000 samples")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


# =============================================================================
# ANGULAR COEFFICIENTS
# =============================================================================
def angular_coefficient_numeric(term) -> float:
    """prefactor * integral over [0, 2 pi] of (p + q cos t), by adaptive quadrature."""
    value, _ = quadrature.quad(
        lambda t: term.prefactor * (term.p + term.q * math.cos(t)),
        0.0,
        2 * math.pi,
        epsabs=0.0,
        epsrel=1e-14,
        limit=200,
    )
    return value


def numeric_mode_coefficients(params) -> dict:
    """Channel label -> C from the uncombined rate expressions."""
    return {
        label: math.fsum(angular_coefficient_numeric(term) for term in terms)
        for label, terms in rate_terms(params).items()
    }


# =============================================================================
# GAIN / LOSS INTEGRALS
# =============================================================================
def _angular_weight(mode, order: int) -> float:
    """integral of G(cos t) = C / (2 pi) (1 + anisotropy cos t) by Gauss-Legendre."""
    x, w = roots_legendre(order)
    theta = math.pi * (x + 1.0)
    shape = mode.C / (2 * math.pi) * (1.0 + mode.anisotropy * np.cos(theta))
    return math.pi * math.fsum(w * shape)


def _delta_branches(eps: float, mode):
    """(partner energy, gain weight, loss weight) for each delta with partner energy >= 0."""
    branches = [(eps + mode.b, mode.a + 1.0, mode.a)]
    if eps - mode.b > 0:
        branches.append((eps - mode.b, mode.a, mode.a + 1.0))
    return branches


def phi0_bruteforce(eps: float, mu: float, ctx: KernelContext, order: int = 64) -> float:
    """
    Gain integral with each delta(eps(k') - eps(k) -/+ hbar w) resolved at
    r' = y / (hbar v_F), Jacobian r' / (hbar v_F), and the angle integrated
    numerically.
    """
    hv = ctx.params.hbar_v_F
    total = []
    for mode in ctx.modes:
        angular = _angular_weight(mode, order)
        for y, gain_weight, _ in _delta_branches(eps, mode):
            r_prime = y / hv
            total.append(gain_weight * (r_prime / hv) * angular * fermi_dirac(y, mu, ctx.k_B_T))
    return math.fsum(total)


def phi1_bruteforce(eps: float, mu: float, ctx: KernelContext, order: int = 64) -> float:
    """Loss-side counterpart of phi0_bruteforce with the Pauli factor 1 - F at the partner state."""
    hv = ctx.params.hbar_v_F
    total = []
    for mode in ctx.modes:
        angular = _angular_weight(mode, order)
        for y, _, loss_weight in _delta_branches(eps, mode):
            r_prime = y / hv
            # hole occupation 1 - F(y, mu) = F(mu, y), without cancellation
            total.append(loss_weight * (r_prime / hv) * angular * fermi_dirac(mu, y, ctx.k_B_T))
    return math.fsum(total)


# =============================================================================
# EQUILIBRIUM DENSITY
# =============================================================================
def equilibrium_density(mu: float, params) -> float:
    """(2 pi / (hbar v_F)^2) int_0^inf s F(s, mu) ds, tail beyond mu + 60 kT dropped."""
    kT = params.k_B_T
    eta = mu / kT

    def integrand(x):
        return x * fermi_dirac(x, eta, 1.0)

    knee = max(eta, 0.0)
    pieces = [(0.0, knee), (knee, knee + 60.0)] if knee > 0 else [(0.0, 60.0)]
    total = math.fsum(
        quadrature.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)[0] for lo, hi in pieces
    )
    return 2 * math.pi / params.hbar_v_F**2 * kT**2 * total


def mu_from_density(density: float, params) -> float:
    """Invert equilibrium_density by bracketing and Brent's method."""
    if not density > 0:
        raise OracleError(f"density must be positive, got {density!r}")
    kT = params.k_B_T
    lo, hi = -kT, kT
    while equilibrium_density(lo, params) > density:
        lo -= 2 * (hi - lo)
    while equilibrium_density(hi, params) < density:
        hi += 2 * (hi - lo)
    return brentq(lambda mu: equilibrium_density(mu, params) - density, lo, hi, xtol=1e-16 * EV, rtol=1e-15)


# =============================================================================
# MU SCAN
# =============================================================================
def residual_scan(f, ctx, grid, mus, block: int = 64) -> np.ndarray:
    """Residual at every mu in `mus`, broadcast over the grid in blocks of mu values."""
    values = np.ravel(check_occupancy(field_values(f, grid)))
    weights = np.ravel(grid.weights)
    eps = np.ravel(grid.energies(ctx.params))
    mus = np.asarray(mus, dtype=float)
    out = np.empty(mus.size)
    for start in range(0, mus.size, block):
        chunk = mus[start:start + block, None]
        equilibrium, rate = relaxation_terms(eps[None, :], chunk, ctx)
        rows = weights * rate * (equilibrium - values)
        out[start:start + block] = [math.fsum(row) for row in rows]
    return out


def mu_scan(f, ctx, grid, mu_range: tuple, n: int = 2001) -> float:
    """
    Root of the residual by a dense scan and a local Brent refinement.
    Anything other than exactly one sign change is an oracle failure.
    """
    if n < 1000:
        raise OracleError("mu scans need at least 1000 samples")
    mus = np.linspace(mu_range[0], mu_range[1], n)
    scan = residual_scan(f, ctx, grid, mus)
    signs = np.sign(scan)
    exact = np.flatnonzero(signs == 0)
    changes = np.flatnonzero(signs[:-1] * signs[1:] < 0)
    if exact.size + changes.size != 1:
        raise OracleError(
            f"expected one sign change of the residual over [{mu_range[0]:.6g}, {mu_range[1]:.6g}], "
            f"found {exact.size + changes.size}"
        )
    if exact.size:
        return float(mus[exact[0]])
    i = int(changes[0])
    return brentq(lambda mu: residual(f, mu, ctx, grid), mus[i], mus[i + 1], xtol=1e-16 * EV, rtol=1e-15)


# =============================================================================
# CHECK SUITE
# =============================================================================
def _rel_diff(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(a), np.abs(b))
    return float(np.max(np.where(scale > 0, np.abs(a - b) / np.where(scale > 0, scale, 1.0), 0.0)))


def _check_angular(params, modes):
    numeric = numeric_mode_coefficients(params)
    unknown = [mode.label for mode in modes if mode.label not in numeric]
    if unknown:
        return False, f"no rate expression for mode(s) {', '.join(unknown)}"
    worst = max(_rel_diff(mode.C, numeric[mode.label]) for mode in modes)
    return worst <= 1e-12, f"max rel diff {worst:.3e}"


def _check_cosine_cancellation(params):
    cosine = math.fsum(term.prefactor * term.q for term in rate_terms(params)["optical"])
    return cosine == 0.0, f"summed LO+TO cosine coefficient {cosine!r}"


def _sample_points(ctx, cfg, rng):
    kT = ctx.k_B_T
    eps = rng.uniform(0.0, 50.0 * kT, cfg.sample_points)
    mu = rng.uniform(-50.0 * kT, 50.0 * kT, cfg.sample_points)
    return eps, mu


def _check_bruteforce(ctx, cfg, rng):
    eps, mu = _sample_points(ctx, cfg, rng)
    gain = [phi0_bruteforce(e, m, ctx, cfg.angular_order) for e, m in zip(eps, mu)]
    loss = [phi1_bruteforce(e, m, ctx, cfg.angular_order) for e, m in zip(eps, mu)]
    worst = max(_rel_diff(phi0(eps, mu, ctx), gain), _rel_diff(phi1(eps, mu, ctx), loss))
    return worst <= 1e-8, f"max rel diff {worst:.3e} over {cfg.sample_points} points"


def _check_detailed_balance(ctx, cfg, rng):
    eps, mu = _sample_points(ctx, cfg, rng)
    f_eq = fermi_dirac(eps, mu, ctx.k_B_T)
    hole = fermi_dirac(mu, eps, ctx.k_B_T)
    worst = _rel_diff(phi0(eps, mu, ctx) * hole, phi1(eps, mu, ctx) * f_eq)
    return worst <= 1e-12, f"max rel diff {worst:.3e}"


def _check_kappa(ctx, cfg, rng):
    eps, mu = _sample_points(ctx, cfg, rng)
    rate = kappa(eps, mu, ctx)
    if not (np.all(np.isfinite(rate)) and np.all(rate >= 0)):
        return False, "kappa negative or not finite"
    worst = _rel_diff(rate, phi0(eps, mu, ctx) + phi1(eps, mu, ctx))
    limit = _rel_diff(kappa(eps, -100.0 * ctx.k_B_T, ctx), kappa_low_mu_limit(eps, ctx))
    return max(worst, limit) <= 1e-12, f"kappa vs phi0+phi1 {worst:.3e}, low-mu limit {limit:.3e}"


def _check_envelope(ctx, cfg, rng):
    kT = ctx.k_B_T
    n = cfg.envelope_points
    violations = 0
    for mode in ctx.modes:
        eps = rng.uniform(0.0, 50.0 * kT, n)
        xi = np.exp(rng.uniform(-40.0, 40.0, n))
        phi = rng.uniform(0.0, 1.0, n)
        value = lambda_fn(eps, xi, mode.a, mode.b, phi, kT)
        lower, upper = lambda_bounds(eps, xi, mode.a, mode.b, phi, kT)
        beta = math.exp(mode.b / kT)
        slack = 1e-12 * ((mode.a + 1) * (eps + mode.b) + mode.a * eps * beta + np.abs(value))
        violations += int(np.count_nonzero((lower > value + slack) | (value > upper + slack)))
    return violations == 0, f"{violations} violations over {n * len(ctx.modes)} points"


def _check_density(ctx, cfg):
    worst = 0.0
    for mu_eV in (-0.2, 0.0, 0.1, 0.3):
        mu = mu_eV * EV
        grid = build_radial_grid(default_eps_max(mu, ctx.k_B_T), cfg.grid_nodes, ctx.params)
        f = DistributionField.equilibrium(grid, mu, ctx.params)
        worst = max(worst, _rel_diff(integrate(f, grid), equilibrium_density(mu, ctx.params)))
    return worst <= 1e-8, f"max rel diff {worst:.3e}"


def _check_mu_solve(ctx, cfg):
    lo, hi = (v * EV for v in cfg.scan_range_eV)
    grid = build_radial_grid(default_eps_max(hi, ctx.k_B_T), cfg.grid_nodes, ctx.params)
    worst = 0.0
    for mu_eV, scale in ((-0.2, 1.0), (0.1, 1.0), (0.3, 0.7), (0.2, 0.3)):
        f = DistributionField.equilibrium(grid, mu_eV * EV, ctx.params, scale=scale)
        solved = solve_mu(f, ctx, grid).mu
        scanned = mu_scan(f, ctx, grid, (lo, hi), cfg.scan_points)
        worst = max(worst, abs(solved - scanned) / EV)
    return worst <= 1e-9, f"max |solve_mu - mu_scan| {worst:.3e} eV"


def run_checks(params, modes=None, cfg: OracleConfig = None) -> list:
    """Every oracle cross-check as a CheckResult; modes default to build_modes(params)."""
    cfg = cfg or OracleConfig()
    modes = build_modes(params) if modes is None else list(modes)
    ctx = KernelContext.from_params(params, modes)
    rng = np.random.default_rng(cfg.seed)

    checks = [
        ("angular_coefficients", lambda: _check_angular(params, modes)),
        ("optical_cosine_cancellation", lambda: _check_cosine_cancellation(params)),
        ("phi_bruteforce", lambda: _check_bruteforce(ctx, cfg, rng)),
        ("detailed_balance", lambda: _check_detailed_balance(ctx, cfg, rng)),
        ("kappa_identities", lambda: _check_kappa(ctx, cfg, rng)),
        ("lambda_envelope", lambda: _check_envelope(ctx, cfg, rng)),
        ("equilibrium_density", lambda: _check_density(ctx, cfg)),
        ("mu_solve_vs_scan", lambda: _check_mu_solve(ctx, cfg)),
    ]
    results = []
    for name, check in checks:
        try:
            passed, detail = check()
        except BGKError as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        logger.info("%s: %s (%s)", name, "pass" if passed else "FAIL", detail)
        results.append(CheckResult(name, bool(passed), detail))
    return results
