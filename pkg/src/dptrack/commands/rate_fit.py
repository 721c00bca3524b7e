"""Rate-fit command implementation."""

import json
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from dptrack.core.rates import DEFAULT_BURN_IN, InsufficientDataError, fit_trajectory
from dptrack.core.results import read_meta
from dptrack.models.trajectory import Trajectory

console = Console(stderr=True)


def resolve_m(path: Path, m_value: float | None) -> float:
    """--m if given, else the schedule in a sibling meta.json, else 1."""
    if m_value is not None:
        return m_value
    meta = read_meta(path.parent)
    if meta:
        return float(meta.get("config", {}).get("schedule", {}).get("m", 1.0))
    return 1.0


@click.command("rate-fit")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--burn-in", type=float, default=DEFAULT_BURN_IN, show_default=True, help="Leading fraction of rows to skip")
@click.option("--m", "m_value", type=float, help="Schedule offset m (default: from meta.json, else 1)")
@click.option("--json", "as_json", is_flag=True, help="Print results as JSON")
def rate_fit(files: tuple[Path, ...], burn_in: float, m_value: float | None, as_json: bool):
    """Fit polynomial decay exponents to trajectory CSV files.

    Reports the slope of log(error) against log(m+k) after burn-in for each
    error channel.
    """
    results = {}
    for path in files:
        try:
            trajectory = Trajectory.from_csv(path)
            m = resolve_m(path, m_value)
            results[str(path)] = {"m": m, "fits": [fit.to_dict() for fit in fit_trajectory(trajectory, m, burn_in)]}
        except InsufficientDataError as e:
            console.print(f"[red]Error:[/red] {path}: {e}")
            raise SystemExit(1)
        except ValueError as e:
            console.print(f"[red]Error:[/red] {e}")
            raise SystemExit(1)

    if as_json:
        click.echo(json.dumps(results, indent=2))
        return

    out = Console()
    for name, entry in results.items():
        table = Table(title=f"{name} (m={entry['m']:g})", show_header=True, header_style="bold")
        table.add_column("Error")
        table.add_column("Slope", justify="right")
        table.add_column("Std. error", justify="right")
        table.add_column("R²", justify="right")
        table.add_column("Samples", justify="right")
        for fit in entry["fits"]:
            table.add_row(
                fit["channel"],
                f"{fit['slope']:.4f}",
                f"{fit['stderr']:.2e}",
                f"{fit['r_squared']:.4f}",
                str(fit["samples"]),
            )
        out.print(table)
