"""
Graphene BGK - Main Application
Batch tools for the BGK relaxation model of electrons in graphene.

Commands:
- simulate: time integration from a JSON config, trajectory CSV out
- mu-solve: chemical potential of a stored distribution
- tabulate: Phi0, Phi1, kappa and F against energy
- validate: reference-oracle cross-checks for a parameter file

Run as `python app.py <command>` or `flask --app app <command>`.
"""
import logging
import os
from pathlib import Path

# Load environment variables from .env file
from dotenv import load_dotenv
env_path = Path(__file__).parent / '.env'
load_dotenv(env_path)

from flask import Flask
from flask.cli import FlaskGroup

# Import blueprints
from blueprints.simulate import simulate_bp
from blueprints.mu_solve import mu_solve_bp
from blueprints.tabulate import tabulate_bp
from blueprints.validate import validate_bp

logging.basicConfig(
    level=os.environ.get('BGK_LOG_LEVEL', 'WARNING').upper(),
    format='%(asctime)s %(levelname)s %(name)s: %(message)s',
)


def create_app():
    app = Flask(__name__)

    # Register blueprints
    app.register_blueprint(simulate_bp)
    app.register_blueprint(mu_solve_bp)
    app.register_blueprint(tabulate_bp)
    app.register_blueprint(validate_bp)
    return app


app = create_app()

cli = FlaskGroup(create_app=create_app, add_default_commands=False, load_dotenv=False)


if __name__ == "__main__":
    cli()
