"""
Tabulate Blueprint - collision kernels on an energy range as CSV.
Columns: eps_eV, phi0, phi1, kappa, F (rates in 1/s).
"""
import csv
import math
import sys

import click
import numpy as np
from flask import Blueprint

from shared.errors import ParameterError
from shared.kernels import KernelContext, phi0, phi1, relaxation_terms
from shared.material import load_params
from shared.records import EV, format_float

tabulate_bp = Blueprint('tabulate', __name__, cli_group=None)

EXIT_INPUT = 2
COLUMNS = ["eps_eV", "phi0", "phi1", "kappa", "F"]


def kernel_table(ctx, mu: float, eps_max: float, n: int) -> list:
    """Rows (eps in eV, Phi0, Phi1, kappa, F) on n evenly spaced energies in [0, eps_max]."""
    eps = np.linspace(0.0, eps_max, n)
    equilibrium, rate = relaxation_terms(eps, mu, ctx)
    gain, loss = phi0(eps, mu, ctx), phi1(eps, mu, ctx)
    return [
        (e / EV, g, l, k, f)
        for e, g, l, k, f in zip(eps, gain, loss, rate, equilibrium)
    ]


@tabulate_bp.cli.command('tabulate')
@click.option('--params', 'params_path', type=click.Path(dir_okay=False), default=None,
              help='Parameter file (default: shipped literature values).')
@click.option('--mu', 'mu_eV', required=True, type=float, help='Chemical potential in eV.')
@click.option('--eps-max', 'eps_max_eV', required=True, type=float, help='Largest energy in eV.')
@click.option('--n', 'n', required=True, type=int, help='Number of rows (>= 2).')
@click.option('--out', 'out', type=click.File('w'), default='-', help='Output CSV (default: stdout).')
def tabulate(params_path, mu_eV, eps_max_eV, n, out):
    """Tabulate Phi0, Phi1, kappa and F against energy."""
    if n < 2:
        raise click.BadParameter("must be >= 2", param_hint="--n")
    if not (math.isfinite(eps_max_eV) and eps_max_eV > 0):
        raise click.BadParameter("must be a positive energy", param_hint="--eps-max")
    if not math.isfinite(mu_eV):
        raise click.BadParameter("must be finite", param_hint="--mu")
    try:
        ctx = KernelContext.from_params(load_params(params_path))
    except ParameterError as e:
        click.echo(f"input error: {e}", err=True)
        sys.exit(EXIT_INPUT)

    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in kernel_table(ctx, mu_eV * EV, eps_max_eV * EV, n):
        writer.writerow([format_float(v) for v in row])
