"""
Collision kernels of the BGK model.

Closed forms of the gain integral Phi0, the loss integral Phi1, the collision
frequency kappa = Phi0 / F and the monotone integrand lambda used by the
chemical-potential equation. All functions broadcast over numpy arrays, so
eps of shape (N,) against mu of shape (M, 1) evaluates an (M, N) table.

Every expression X / (1 + xi exp(y / k_B T)) is written as X * expit(-...)
and kappa is assembled from ratios of Fermi factors split as e^{max(x,0)} (1 + e^{-|x|}),
so no intermediate overflows for any (eps, mu).
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from shared.errors import DomainError, ParameterError
from shared.grid import check_occupancy
from shared.material import PhysicalParams, ScatteringMode, build_modes

MAX_CACHED_TABLES = 8


@dataclass(frozen=True)
class KernelContext:
    """Parameters, reduced modes and the cached prefactor 1 / (hbar v_F)^2."""
    params: PhysicalParams
    modes: tuple
    prefactor: float
    _tables: dict = field(default_factory=dict, init=False, compare=False, repr=False)

    @classmethod
    def create(cls, params: PhysicalParams, modes) -> "KernelContext":
        modes = tuple(modes)
        if not modes:
            raise ParameterError("kernel context needs at least one scattering mode")
        for mode in modes:
            if not isinstance(mode, ScatteringMode):
                raise ParameterError(f"not a ScatteringMode: {mode!r}")
        return cls(params=params, modes=modes, prefactor=1.0 / (params.hbar * params.v_F) ** 2)

    @classmethod
    def from_params(cls, params: PhysicalParams, modes=None) -> "KernelContext":
        return cls.create(params, build_modes(params) if modes is None else modes)

    @property
    def k_B_T(self) -> float:
        return self.params.k_B_T

    def mode_columns(self, ndim: int = 1) -> tuple:
        """(C, a, b) stacked over modes, shaped to broadcast against ndim-dimensional arrays."""
        shape = (-1,) + (1,) * ndim
        return tuple(
            np.array([getattr(mode, name) for mode in self.modes], dtype=float).reshape(shape)
            for name in ("C", "a", "b")
        )

    def table(self, grid) -> "KappaTable":
        """KappaTable on the node energies of grid, built once per grid."""
        entry = self._tables.get(id(grid))
        if entry is None or entry[0] is not grid:
            if len(self._tables) >= MAX_CACHED_TABLES:
                self._tables.clear()
            entry = (grid, KappaTable(grid.energies(self.params), self))
            self._tables[id(grid)] = entry
        return entry[1]


# =============================================================================
# HELPERS
# =============================================================================
def _positive_part(z):
    return np.maximum(z, 0.0)


def _check_energy(eps):
    eps = np.asarray(eps, dtype=float)
    if np.any(eps < 0) or np.any(~np.isfinite(eps)):
        raise DomainError("energy must be finite and >= 0")
    return eps


def _check_xi(xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(~(xi > 0)) or np.any(~np.isfinite(xi)):
        raise DomainError("xi must be finite and > 0")
    return xi


def _check_mode_args(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("phonon occupation a and energy b must be >= 0")
    return a, b


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def _guarded_product(coef, term):
    """coef * term with 0 * inf taken as 0 (coef >= 0)."""
    with np.errstate(invalid="ignore", over="ignore"):
        return np.where(coef > 0, coef * term, 0.0)


# =============================================================================
# PSI / PHI0 / PHI1 / KAPPA
# =============================================================================
def _psi(eps, log_xi, a, b, k_B_T):
    up = eps + b
    down = _positive_part(eps - b)
    return (
        (a + 1.0) * up * expit(-(up / k_B_T + log_xi))
        + a * down * expit(-(down / k_B_T + log_xi))
    )


def psi(eps, xi, a, b, k_B_T: float):
    """
    (a+1)(eps+b) / (1 + xi e^{(eps+b)/kT}) + a [eps-b]_+ / (1 + xi e^{[eps-b]_+/kT})
    """
    eps = _check_energy(eps)
    xi = _check_xi(xi)
    a, b = _check_mode_args(a, b)
    return _scalar_or_array(_psi(eps, np.log(xi), a, b, k_B_T))


def phi0(eps, mu, ctx: KernelContext):
    """Gain integral: sum over modes of prefactor * C * psi(eps, e^{-mu/kT}; a, b)."""
    eps = _check_energy(eps)
    log_xi = -np.asarray(mu, dtype=float) / ctx.k_B_T
    total = 0.0
    for mode in ctx.modes:
        total = total + mode.C * _psi(eps, log_xi, mode.a, mode.b, ctx.k_B_T)
    return _scalar_or_array(ctx.prefactor * total)


def phi1(eps, mu, ctx: KernelContext):
    """Loss integral: emission to eps-b with weight a+1, absorption to eps+b with weight a."""
    eps = _check_energy(eps)
    mu = np.asarray(mu, dtype=float)
    kT = ctx.k_B_T
    total = 0.0
    for mode in ctx.modes:
        down = eps - mode.b
        up = eps + mode.b
        total = total + mode.C * (
            (mode.a + 1.0) * _positive_part(down) * expit((down - mu) / kT)
            + mode.a * up * expit((up - mu) / kT)
        )
    return _scalar_or_array(ctx.prefactor * total)


def _fermi_ratio(v, u, gap):
    """
    F(y) / F(eps) = (1 + e^v) / (1 + e^u) for v = (eps - mu)/kT, u = (y - mu)/kT.
    gap = (eps - y)/kT replaces v - u when both are positive, so the ratio stays
    exact however far mu sits below the energies.
    """
    lead = np.where((u > 0) & (v > 0), gap, np.maximum(v, 0.0) - np.maximum(u, 0.0))
    return np.exp(lead) * (1.0 + np.exp(-np.abs(v))) / (1.0 + np.exp(-np.abs(u)))


def _kappa(eps, mu, ctx: KernelContext):
    kT = ctx.k_B_T
    C, a, b = ctx.mode_columns(len(np.broadcast_shapes(np.shape(eps), np.shape(mu))))
    up = eps + b
    down = _positive_part(eps - b)
    v = (eps - mu) / kT
    ratio_up = _fermi_ratio(v, (up - mu) / kT, (eps - up) / kT)
    ratio_down = _fermi_ratio(v, (down - mu) / kT, (eps - down) / kT)
    total = C * ((a + 1.0) * up * ratio_up + a * down * ratio_down)
    return ctx.prefactor * total.sum(axis=0)


def kappa(eps, mu, ctx: KernelContext):
    """Collision frequency kappa = Phi0 * (1 + e^{(eps-mu)/kT})."""
    eps = _check_energy(eps)
    return _scalar_or_array(_kappa(eps, np.asarray(mu, dtype=float), ctx))


def relaxation_terms(eps, mu, ctx: KernelContext):
    """(F, kappa) on the given energies; the pair every relaxation update needs."""
    eps = _check_energy(eps)
    mu = np.asarray(mu, dtype=float)
    return expit(-(eps - mu) / ctx.k_B_T), _kappa(eps, mu, ctx)


class KappaTable:
    """
    F and kappa on fixed node energies. The mode-stacked final-state energies,
    gaps and weights do not depend on mu and are built once, so evaluating at a
    new mu is a single pass over a (2 x modes, nodes) array.
    """

    def __init__(self, eps, ctx: KernelContext):
        eps = np.ravel(_check_energy(eps))
        C, a, b = ctx.mode_columns(1)
        up = eps + b
        down = _positive_part(eps - b)
        final = np.concatenate([up, down])
        self.k_B_T = ctx.k_B_T
        self.eps = eps
        self.final = final
        self.gap = (eps - final) / self.k_B_T
        self.weight = ctx.prefactor * np.concatenate([C * (a + 1.0) * up, C * a * down])

    @property
    def size(self) -> int:
        return self.eps.size

    def terms(self, mu: float, lo: int = 0, hi: int = None) -> tuple:
        """(F, kappa) on nodes lo:hi at a scalar mu."""
        eps = self.eps[lo:hi]
        v = (eps - mu) / self.k_B_T
        u = (self.final[:, lo:hi] - mu) / self.k_B_T
        ratio = _fermi_ratio(v, u, self.gap[:, lo:hi])
        return expit(-v), (self.weight[:, lo:hi] * ratio).sum(axis=0)


def bgk_rhs(f_value, eps, mu, ctx: KernelContext, checked: bool = True):
    """kappa (F - f). Checked mode rejects f outside [0, 1]; fast mode clamps and logs."""
    f_value = check_occupancy(f_value, checked=checked)
    equilibrium, rate = relaxation_terms(eps, mu, ctx)
    return _scalar_or_array(rate * (equilibrium - f_value))


# =============================================================================
# LAMBDA AND ITS ENVELOPE
# =============================================================================
def _lambda_parts(eps, log_xi, a, b, k_B_T):
    up_coef = (a + 1.0) * (eps + b)
    down_coef = a * _positive_part(eps - b)
    with np.errstate(over="ignore"):
        beta = np.exp(b / k_B_T)
    beta_inv = np.exp(-b / k_B_T)
    # 1 / (1 + xi beta w) and 1 / (1 + xi w / beta), w = e^{eps/kT}
    d_up = expit(-(log_xi + (eps + b) / k_B_T))
    d_down = expit(-(log_xi + (eps - b) / k_B_T))
    return up_coef, down_coef, beta, beta_inv, d_up, d_down


def _check_phi(phi):
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0) or np.any(phi > 1):
        raise DomainError("phi must lie in [0, 1]")
    return phi


def lambda_fn(eps, xi, a, b, phi, k_B_T: float):
    """
    psi(eps, xi; a, b) * {1 - phi [1 + xi e^{eps/kT}]}, evaluated in the
    expanded form that stays finite when xi e^{eps/kT} overflows.
    """
    eps = _check_energy(eps)
    log_xi = np.log(_check_xi(xi))
    a, b = _check_mode_args(a, b)
    phi = _check_phi(phi)
    up_coef, down_coef, beta, beta_inv, d_up, d_down = _lambda_parts(eps, log_xi, a, b, k_B_T)
    value = up_coef * ((beta_inv * phi + 1.0 - phi) * d_up - beta_inv * phi)
    value = value + _guarded_product(down_coef, (beta * phi + 1.0 - phi) * d_down - beta * phi)
    return _scalar_or_array(value)


def lambda_bounds(eps, xi, a, b, phi, k_B_T: float, tight: bool = False):
    """
    Analytic (lower, upper) envelope of lambda_fn.

    The default pair drops the 1 in both denominators (upper) and the
    emission term (lower); tight=True returns the intermediate pair.
    """
    eps = _check_energy(eps)
    log_xi = np.log(_check_xi(xi))
    a, b = _check_mode_args(a, b)
    phi = _check_phi(phi)
    up_coef, down_coef, beta, beta_inv, d_up, d_down = _lambda_parts(eps, log_xi, a, b, k_B_T)

    if tight:
        upper = up_coef * (d_up - beta_inv * phi) + _guarded_product(down_coef, beta * (d_down - phi))
        lower = up_coef * beta_inv * (d_up - phi) + _guarded_product(down_coef, d_down - beta * phi)
        return _scalar_or_array(lower), _scalar_or_array(upper)

    with np.errstate(over="ignore"):
        # 1 / (xi beta w) and beta / (xi w / beta)
        inv_up = np.exp(-(log_xi + (eps + b) / k_B_T))
        inv_down = np.exp(2.0 * b / k_B_T - log_xi - eps / k_B_T)
    upper = _guarded_product(up_coef, inv_up - beta_inv * phi)
    upper = upper + _guarded_product(down_coef, inv_down - beta * phi)
    lower = beta_inv * up_coef * d_up - (up_coef * beta_inv + _guarded_product(down_coef, beta)) * phi
    return _scalar_or_array(lower), _scalar_or_array(upper)


def kappa_low_mu_limit(eps, ctx: KernelContext):
    """
    Limit of kappa as mu -> -inf at fixed eps, where F(y) / F(eps) -> e^{(eps-y)/kT}:
    sum over modes of prefactor * C * [(a+1)(eps+b) e^{-b/kT} + a [eps-b]_+ e^{b/kT}].
    """
    eps = _check_energy(eps)
    kT = ctx.k_B_T
    total = 0.0
    for mode in ctx.modes:
        total = total + mode.C * (
            (mode.a + 1.0) * (eps + mode.b) * np.exp(-mode.b / kT)
            + _guarded_product(mode.a * _positive_part(eps - mode.b), np.exp(mode.b / kT))
        )
    return _scalar_or_array(ctx.prefactor * total)
