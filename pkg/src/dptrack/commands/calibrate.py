"""Calibrate command implementation."""

import json
from pathlib import Path

import click
from rich.console import Console

from dptrack.commands.budget import parse_horizon
from dptrack.core.errors import ConfigError, HypothesisViolated
from dptrack.core.experiment import build, load_run_config
from dptrack.core.privacy import budget, calibrate_noise
from dptrack.models.run_config import NoiseParams

console = Console(stderr=True)


@click.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--eps", type=float, required=True, help="Target privacy budget")
@click.option("--horizon", "-K", help="Number of iterations, or 'inf' (default: config horizon)")
@click.option("--split", type=float, default=0.5, show_default=True, help="Share of the budget spent on the tracker noise")
def calibrate(config_path: Path, eps: float, horizon: str | None, split: float):
    """Print Laplace scales that spend exactly EPS at the worst agent."""
    try:
        if not eps > 0:
            raise ConfigError("eps", f"must be positive, got {eps}")
        if not 0 < split < 1:
            raise ConfigError("split", f"must lie in (0, 1), got {split}")
        config = load_run_config(config_path)
        exp = build(config)
        query = exp.privacy_query(horizon=parse_horizon(horizon, config.horizon), with_scales=False)
        b_eta, b_xi = calibrate_noise(eps, split, query)
        achieved = budget(query.with_scales(b_eta, b_xi)).epsilon
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(2)
    except HypothesisViolated as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(3)

    noise = NoiseParams(b_eta=b_eta, b_xi=b_xi, n=exp.objectives.n, r=exp.objectives.r)
    data = {
        "b_eta": b_eta,
        "b_xi": b_xi,
        "sigma_eta_sq": noise.sigma_eta_sq,
        "sigma_xi_sq": noise.sigma_xi_sq,
        "target_eps": eps,
        "epsilon": achieved,
        "split": split,
        "horizon": "inf" if query.horizon is None else query.horizon,
    }
    click.echo(json.dumps(data, indent=2))
