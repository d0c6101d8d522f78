"""
Error types for the graphene BGK solver.
Library code raises these; the command blueprints map them to exit codes.
"""


class BGKError(Exception):
    """Base class for every solver error."""


class ParameterError(BGKError):
    """Invalid physical parameters or parameter file."""


class ConfigError(BGKError):
    """Simulation config violation, tagged with the dotted field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class GridError(BGKError):
    """Invalid grid construction or field/grid size mismatch."""


class DistributionRangeError(BGKError):
    """Occupancy outside [0, 1] beyond round-off."""


class BracketError(BGKError):
    """No sign change found while expanding a root bracket."""

    def __init__(self, lo: float, hi: float, r_lo: float, r_hi: float, expansions: int):
        self.lo, self.hi = lo, hi
        self.r_lo, self.r_hi = r_lo, r_hi
        sign = lambda r: "+" if r > 0 else ("-" if r < 0 else "0")
        super().__init__(
            f"no sign change after {expansions} expansions: "
            f"residual({lo:.6g}) is {sign(r_lo)}, residual({hi:.6g}) is {sign(r_hi)}"
        )


class SolverError(BGKError):
    """Root iteration did not converge; carries the best bracket."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        self.bracket = bracket
        super().__init__(f"{message} (bracket [{bracket[0]:.12g}, {bracket[1]:.12g}])")


class ShiftBoundError(BGKError):
    """Advection shift per step too large for the grid."""

    def __init__(self, message: str, suggested_dt: float):
        self.suggested_dt = suggested_dt
        super().__init__(f"{message}; try dt <= {suggested_dt:.6g}")


class OracleError(BGKError):
    """A reference oracle found a result that contradicts the model."""


class DomainError(BGKError, ValueError):
    """Argument outside the domain of a kernel or physics function."""
