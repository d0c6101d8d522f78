"""
Material parameters for electrons in the graphene conduction band.
Holds the physical constants, the Dirac-cone dispersion, the equilibrium
occupations and the reduction of each phonon channel to a (C, a, b) triple.
"""
import json
import logging
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from scipy import constants
from scipy.special import expit

from shared.errors import DomainError, ParameterError

logger = logging.getLogger(__name__)

# Default parameter file (relative to project root)
DEFAULT_PARAMS_FILE = Path(__file__).parent.parent / "static" / "data" / "graphene_params.json"

# =============================================================================
# PARAMETER FILE SCHEMA
# key -> (PhysicalParams field, conversion factor to SI)
# =============================================================================
EV = constants.electron_volt

PARAM_FILE_KEYS = {
    "hbar_eVs": ("hbar", EV),           # eV*s -> J*s
    "v_F": ("v_F", 1.0),                # m/s
    "T": ("k_B_T", constants.k),        # K -> J (k_B * T)
    "D_ac_eV_per_m": ("D_ac", EV),      # acoustic deformation potential, eV -> J
    "v_p": ("v_p", 1.0),                # m/s
    "sigma_m": ("sigma_m", 1.0),        # kg/m^2
    "D_O": ("D_O", EV),                 # eV/m -> J/m
    "omega_O": ("omega_O", 1.0),        # rad/s
    "D_K": ("D_K", EV),                 # eV/m -> J/m
    "omega_K": ("omega_K", 1.0),        # rad/s
}
PARAM_FILE_META_KEYS = {"source"}


@dataclass(frozen=True)
class PhysicalParams:
    """Material and lattice constants, all in SI units."""
    hbar: float
    v_F: float
    k_B_T: float
    D_ac: float
    v_p: float
    sigma_m: float
    D_O: float
    omega_O: float
    D_K: float
    omega_K: float
    e_charge: float = constants.elementary_charge

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ParameterError(f"{f.name} must be finite and strictly positive, got {value!r}")
        if self.v_p >= self.v_F:
            logger.warning("sound speed v_p=%g is not below the Fermi velocity v_F=%g", self.v_p, self.v_F)

    @property
    def hbar_v_F(self) -> float:
        return self.hbar * self.v_F


@dataclass(frozen=True)
class ScatteringMode:
    """
    One phonon channel reduced to its angular coefficient C, phonon occupation a
    and phonon energy b. `anisotropy` is q/p of the combined angular factor
    G(cos t) = C/(2 pi) * (1 + q/p cos t); it only feeds the brute-force oracles.
    """
    label: str
    C: float
    a: float
    b: float
    elastic: bool = False
    anisotropy: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.C) and self.C > 0):
            raise ParameterError(f"mode {self.label}: C must be positive, got {self.C!r}")
        if not (math.isfinite(self.a) and self.a >= 0):
            raise ParameterError(f"mode {self.label}: occupation a must be >= 0, got {self.a!r}")
        if not (math.isfinite(self.b) and self.b >= 0):
            raise ParameterError(f"mode {self.label}: energy b must be >= 0, got {self.b!r}")
        if self.elastic and (self.a != 0 or self.b != 0):
            raise ParameterError(f"mode {self.label}: elastic modes carry a = b = 0")
        if abs(self.anisotropy) > 1:
            raise ParameterError(f"mode {self.label}: |anisotropy| must be <= 1")


@dataclass(frozen=True)
class RateTerm:
    """prefactor * (p + q cos t): one angular rate expression before integration."""
    label: str
    prefactor: float
    p: float
    q: float


# =============================================================================
# PARAMETER LOADING
# =============================================================================
def params_from_dict(data: dict) -> PhysicalParams:
    """Convert a parameter-file dict (eV / K / SI mix) into SI PhysicalParams."""
    if not isinstance(data, dict):
        raise ParameterError("parameter file must contain a JSON object")
    for key in data:
        if key not in PARAM_FILE_KEYS and key not in PARAM_FILE_META_KEYS:
            raise ParameterError(f"unknown parameter key: {key}")
    missing = [key for key in PARAM_FILE_KEYS if key not in data]
    if missing:
        raise ParameterError(f"missing parameter keys: {', '.join(missing)}")

    values = {}
    for key, (name, factor) in PARAM_FILE_KEYS.items():
        raw = data[key]
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ParameterError(f"{key} must be a number, got {raw!r}")
        values[name] = float(raw) * factor
    return PhysicalParams(**values)


def load_params(path=None) -> PhysicalParams:
    """Load and validate a JSON parameter file (default: shipped literature values)."""
    path = Path(path) if path else DEFAULT_PARAMS_FILE
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ParameterError(f"parameter file not found: {path}")
    except json.JSONDecodeError as e:
        raise ParameterError(f"malformed parameter file {path}: {e}")
    return params_from_dict(data)


# =============================================================================
# DISPERSION AND EQUILIBRIUM OCCUPATIONS
# =============================================================================
def dispersion(k_magnitude, params: PhysicalParams):
    """Dirac cone: eps = hbar * v_F * |k|."""
    k = np.asarray(k_magnitude, dtype=float)
    if np.any(k < 0):
        raise DomainError("wavevector magnitude must be >= 0")
    eps = params.hbar_v_F * k
    return float(eps) if eps.ndim == 0 else eps


def fermi_dirac(eps, mu, k_B_T: float):
    """1 / (1 + exp((eps - mu) / k_B_T)), saturating without overflow."""
    value = expit(-(np.asarray(eps, dtype=float) - mu) / k_B_T)
    return float(value) if np.ndim(value) == 0 else value


def bose_einstein(hbar_omega, k_B_T: float):
    """Phonon occupation 1 / (exp(hbar_omega / k_B_T) - 1)."""
    x = np.asarray(hbar_omega, dtype=float)
    if np.any(x <= 0):
        raise DomainError("phonon energy must be > 0")
    value = 1.0 / np.expm1(x / k_B_T)
    return float(value) if value.ndim == 0 else value


# =============================================================================
# SCATTERING CHANNELS
# =============================================================================
def rate_terms(params: PhysicalParams) -> dict:
    """
    Angular rate expressions per channel, each as prefactor * (p + q cos t).

    The combined channels keep their uncombined terms (LO and TO separately)
    so the angular integral can be checked numerically against build_modes.
    """
    inv_4pi2 = 1.0 / (2 * math.pi) ** 2
    acoustic = inv_4pi2 * math.pi * params.D_ac**2 * params.k_B_T / (
        2 * params.hbar * params.sigma_m * params.v_p**2
    )
    optical = inv_4pi2 * math.pi * params.D_O**2 / (params.sigma_m * params.omega_O)
    k_phonon = inv_4pi2 * 2 * math.pi * params.D_K**2 / (params.sigma_m * params.omega_K)
    return {
        "acoustic": [RateTerm("acoustic", acoustic, 1.0, 1.0)],
        "optical": [
            RateTerm("LO", optical, 1.0, -1.0),
            RateTerm("TO", optical, 1.0, 1.0),
        ],
        "K": [RateTerm("K", k_phonon, 1.0, -1.0)],
    }


def build_modes(params: PhysicalParams) -> list:
    """
    Reduce the acoustic, LO+TO and K channels to ScatteringMode triples.

    Closed forms of C = integral over [0, 2 pi] of the rate expression:
      acoustic  D_ac^2 k_B T / (4 hbar sigma_m v_p^2)   (elastic, 2 n_q folded in)
      LO + TO   D_O^2 / (sigma_m omega_O)               (cosine terms cancel)
      K         D_K^2 / (sigma_m omega_K)
    """
    hw_O = params.hbar * params.omega_O
    hw_K = params.hbar * params.omega_K
    return [
        ScatteringMode(
            label="acoustic",
            C=params.D_ac**2 * params.k_B_T / (4 * params.hbar * params.sigma_m * params.v_p**2),
            a=0.0,
            b=0.0,
            elastic=True,
            anisotropy=1.0,
        ),
        ScatteringMode(
            label="optical",
            C=params.D_O**2 / (params.sigma_m * params.omega_O),
            a=bose_einstein(hw_O, params.k_B_T),
            b=hw_O,
        ),
        ScatteringMode(
            label="K",
            C=params.D_K**2 / (params.sigma_m * params.omega_K),
            a=bose_einstein(hw_K, params.k_B_T),
            b=hw_K,
            anisotropy=-1.0,
        ),
    ]

