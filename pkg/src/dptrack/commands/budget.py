"""Budget command implementation."""

import json
from pathlib import Path

import click
from rich.console import Console

from dptrack.core.errors import ConfigError, HypothesisViolated
from dptrack.core.experiment import build, load_run_config
from dptrack.core.privacy import budget as privacy_budget
from dptrack.core.privacy import budget_curve
from dptrack.core.results import OutputDirectory, ResultsError

console = Console(stderr=True)


def parse_horizon(value: str | None, default: int) -> int | None:
    """An iteration count, or None for 'inf'."""
    if value is None:
        return default
    if value.lower() in ("inf", "infinity"):
        return None
    try:
        horizon = int(value)
    except ValueError:
        raise ConfigError("horizon", f"expected an integer or 'inf', got {value!r}")
    if horizon < 1:
        raise ConfigError("horizon", f"must be at least 1, got {horizon}")
    return horizon


@click.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--horizon", "-K", help="Number of iterations, or 'inf' (default: config horizon)")
@click.option("--b-eta", type=float, help="Laplace scale of the tracker noise")
@click.option("--b-xi", type=float, help="Laplace scale of the decision noise")
@click.option("--curve", is_flag=True, help="Include the budget for every horizon up to K")
@click.option("--output", "-o", type=click.Path(file_okay=False, path_type=Path), help="Write budget.json here")
@click.option("--overwrite", is_flag=True, help="Replace an existing output directory")
def budget(
    config_path: Path,
    horizon: str | None,
    b_eta: float | None,
    b_xi: float | None,
    curve: bool,
    output: Path | None,
    overwrite: bool,
):
    """Print the privacy budget of a configuration as JSON.

    Scales come from the configuration's noise section unless --b-eta and
    --b-xi are given.
    """
    try:
        config = load_run_config(config_path)
        exp = build(config)
        k = parse_horizon(horizon, config.horizon)
        query = exp.privacy_query(horizon=k)
        if b_eta is not None or b_xi is not None:
            query = query.with_scales(
                b_eta if b_eta is not None else exp.noise.b_eta,
                b_xi if b_xi is not None else exp.noise.b_xi,
            )
        if not (query.b_eta > 0 and query.b_xi > 0):
            raise ConfigError("noise", "both Laplace scales must be positive to evaluate a budget")
        report = privacy_budget(query)
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(2)
    except HypothesisViolated as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(3)

    data = {"query": query.to_dict(), **report.to_dict()}
    if curve and k is not None:
        data["curve"] = budget_curve(query).tolist()

    if output:
        try:
            with OutputDirectory(output, overwrite=overwrite) as out:
                out.write_json("budget.json", data)
                out.write_meta(config.to_dict(), command="budget")
        except (ResultsError, OSError) as e:
            console.print(f"[red]Error:[/red] {e}")
            raise SystemExit(1)

    click.echo(json.dumps(data, indent=2))
