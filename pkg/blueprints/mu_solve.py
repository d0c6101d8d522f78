"""
Mu-solve Blueprint - chemical potential of a stored distribution.

Exit codes: 0 ok, 2 unreadable input, 4 occupancy outside [0, 1],
5 no root (bracket or iteration failure).
"""
import sys

import click
from flask import Blueprint, current_app

from shared.chemical_potential import solve_mu
from shared.errors import BracketError, DistributionRangeError, GridError, ParameterError, SolverError
from shared.kernels import KernelContext
from shared.material import load_params
from shared.records import load_grid_spec, read_distribution

mu_solve_bp = Blueprint('mu_solve', __name__, cli_group=None)

EXIT_INPUT = 2
EXIT_RANGE = 4
EXIT_NO_ROOT = 5


@mu_solve_bp.cli.command('mu-solve')
@click.option('--params', 'params_path', type=click.Path(dir_okay=False), default=None,
              help='Parameter file (default: shipped literature values).')
@click.option('--dist', 'dist_path', required=True, type=click.Path(dir_okay=False),
              help='Distribution CSV.')
@click.option('--grid', 'grid_path', type=click.Path(dir_okay=False), default=None,
              help='Grid spec JSON overriding the CSV grid comment.')
def mu_solve(params_path, dist_path, grid_path):
    """Solve the mass-conservation equation for mu."""
    try:
        params = load_params(params_path)
        grid_spec = load_grid_spec(grid_path) if grid_path else None
        field = read_distribution(dist_path, grid_spec)
    except (ParameterError, GridError) as e:
        click.echo(f"input error: {e}", err=True)
        sys.exit(EXIT_INPUT)

    ctx = KernelContext.from_params(params)
    try:
        report = solve_mu(field, ctx, field.grid)
    except DistributionRangeError as e:
        click.echo(f"range error: {e}", err=True)
        sys.exit(EXIT_RANGE)
    except (BracketError, SolverError) as e:
        click.echo(f"no root: {e}", err=True)
        sys.exit(EXIT_NO_ROOT)

    current_app.logger.info("mu-solve: %d iterations, bracket %s", report.iterations, report.bracket)
    click.echo(f"mu_eV = {report.mu_eV:.12g}")
    click.echo(f"residual = {report.scaled_residual:.3e}")
