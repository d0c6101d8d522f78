"""
Validate Blueprint - runs the reference-oracle cross-checks for a parameter
file and prints a pass/fail table as CSV.

Exit codes: 0 all pass, 1 a check failed, 2 parameter file rejected.
"""
import csv
import sys

import click
from flask import Blueprint, current_app

from shared.errors import ParameterError
from shared.material import build_modes, load_params
from shared.oracles import run_checks

validate_bp = Blueprint('validate', __name__, cli_group=None)

EXIT_FAILED = 1
EXIT_INPUT = 2


@validate_bp.cli.command('validate')
@click.option('--params', 'params_path', type=click.Path(dir_okay=False), default=None,
              help='Parameter file (default: shipped literature values).')
def validate(params_path):
    """Cross-check closed forms and solvers against the oracles."""
    try:
        params = load_params(params_path)
        modes = build_modes(params)
    except ParameterError as e:
        click.echo(f"parameter error: {e}", err=True)
        sys.exit(EXIT_INPUT)

    results = run_checks(params, modes)
    writer = csv.writer(click.get_text_stream("stdout"), lineterminator="\n")
    writer.writerow(["check", "passed", "detail"])
    for result in results:
        writer.writerow([result.name, "pass" if result.passed else "FAIL", result.detail])

    failed = [r.name for r in results if not r.passed]
    if failed:
        current_app.logger.error("validation failed: %s", ", ".join(failed))
        click.echo(f"failed: {', '.join(failed)}", err=True)
        sys.exit(EXIT_FAILED)
