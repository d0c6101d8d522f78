"""
Simulate Blueprint - time integration of the BGK model from a JSON config.
Writes the trajectory CSV and a <out>.summary.json run summary.

Exit codes: 0 ok, 2 config or parameter error, 3 runtime solver failure.
"""
import sys
import time

import click
from flask import Blueprint, current_app

from shared.dynamics import run
from shared.errors import BGKError, ConfigError, ParameterError
from shared.config import build_simulation, load_sim_config
from shared.observables import compute_observables
from shared.records import EV, TrajectoryWriter, relative_drift, write_summary

simulate_bp = Blueprint('simulate', __name__, cli_group=None)

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


@simulate_bp.cli.command('simulate')
@click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False),
              help='Simulation config (JSON).')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False),
              help='Trajectory CSV to write.')
def simulate(config_path, out_path):
    """Run a simulation and write its trajectory."""
    try:
        config = load_sim_config(config_path)
        sim = build_simulation(config)
    except (ConfigError, ParameterError) as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)

    started = time.perf_counter()
    first = last = None
    summary = {"config": str(config_path), "status": "ok"}
    try:
        with TrajectoryWriter(out_path) as writer:
            for state in run(sim):
                writer.write(state, compute_observables(state.f, sim.grid, sim.ctx.params, config.g_deg))
                first = first or state
                last = state
    except BGKError as e:
        current_app.logger.error("simulation failed: %s", e)
        summary.update(status="error", error=f"{type(e).__name__}: {e}")
    finally:
        summary["wall_time_s"] = time.perf_counter() - started

    if last is not None:
        summary.update(
            rows=writer.rows,
            final_t=last.t,
            final_mu_eV=last.mu / EV,
            initial_density=first.diagnostics.density,
            final_density=last.diagnostics.density,
            conservation_drift=relative_drift(first.diagnostics.density, last.diagnostics.density),
        )
    write_summary(out_path, summary)

    if summary["status"] != "ok":
        click.echo(f"runtime error: {summary['error']}", err=True)
        sys.exit(EXIT_RUNTIME)
    click.echo(f"wrote {writer.rows} rows to {out_path} (final mu {last.mu / EV:.12g} eV)")
