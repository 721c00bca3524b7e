"""Sweep command implementation."""

import dataclasses
import logging
import math
from pathlib import Path

import click
import pandas as pd
from rich.console import Console

from dptrack.core.bounds import StepsizeTooLargeError, monotonicity_table
from dptrack.core.engine import DimensionMismatchError, monte_carlo
from dptrack.core.errors import ConfigError, HypothesisViolated
from dptrack.core.experiment import Experiment, build, load_run_config
from dptrack.core.results import OutputDirectory, ResultsError
from dptrack.core.topology import TopologyError, ring_for_spectra, ring_spectra
from dptrack.models.bounds import SweepTable

logger = logging.getLogger(__name__)

console = Console(stderr=True)

SWEEP_COLUMNS = ("rho_w", "rho_wo", "theta", "fd_sign_rhow", "fd_sign_rhowo", "admissible")
PLATEAU_COLUMNS = ("opt_plateau", "opt_plateau_se", "cons_plateau", "cons_plateau_se")


def parse_floats(value: str, field: str) -> list[float]:
    """Comma-separated numbers."""
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(field, f"expected comma-separated numbers, got {value!r}")


def spectral_grid(
    exp: Experiment,
    rho_w: str | None,
    rho_wo: str | None,
    ring_r: float | None,
    ring_d: str | None,
) -> tuple[list[float], list[float]]:
    """(rho_w values, rho(W_o) values) from the sweep options.

    A ring sweep fixes r and varies d, so rho(W_o) = r throughout.
    """
    if ring_d is not None:
        if ring_r is None:
            topo = exp.config.topology
            if topo is None or topo.kind != "ring":
                raise ConfigError("ring_r", "--ring-d needs --ring-r unless the config topology is a ring")
            ring_r = float(topo.params["r"])
        ds = parse_floats(ring_d, "ring_d")
        return [ring_spectra(ring_r, d)[0] for d in ds], [ring_r]
    rw = parse_floats(rho_w, "rho_w") if rho_w else [exp.profile.rho_w]
    ro = parse_floats(rho_wo, "rho_wo") if rho_wo else [exp.profile.rho_wo]
    return rw, ro


def simulate_plateaus(exp: Experiment, alpha: float, table: SweepTable) -> list[dict[str, float]]:
    """Monte Carlo plateau errors on the four-agent ring matching each grid point."""
    config = dataclasses.replace(exp.config, schedule=dataclasses.replace(exp.config.schedule, alpha=alpha))
    plateaus = []
    for row in table.rows:
        try:
            wm = ring_for_spectra(row.rho_w, row.rho_wo)
        except TopologyError as e:
            logger.warning("No ring realizes rho_w=%g, rho_wo=%g: %s", row.rho_w, row.rho_wo, e)
            plateaus.append({name: math.nan for name in PLATEAU_COLUMNS})
            continue
        result = monte_carlo(config, wm, exp.objectives, noise=exp.noise)
        opt, opt_se = result.plateau("opt_err")
        cons, cons_se = result.plateau("cons_err")
        plateaus.append({"opt_plateau": opt, "opt_plateau_se": opt_se, "cons_plateau": cons, "cons_plateau_se": cons_se})
    return plateaus


def sweep_frame(table: SweepTable, plateaus: list[dict[str, float]] | None = None) -> pd.DataFrame:
    frame = pd.DataFrame([dataclasses.astuple(row) for row in table.rows], columns=list(SWEEP_COLUMNS))
    frame["admissible"] = frame["admissible"].astype(int)
    if plateaus:
        frame = frame.join(pd.DataFrame(plateaus, columns=list(PLATEAU_COLUMNS)))
    return frame


def format_sweep_csv(table: SweepTable, plateaus: list[dict[str, float]] | None = None) -> str:
    return sweep_frame(table, plateaus).to_csv(index=False, float_format="%.17g", na_rep="nan", lineterminator="\n")


@click.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--rho-w", help="Comma-separated rho_w values")
@click.option("--rho-wo", help="Comma-separated rho(W_o) values")
@click.option("--ring-r", type=float, help="Fixed ring r for a --ring-d sweep")
@click.option("--ring-d", help="Comma-separated ring d values")
@click.option("--alpha", type=float, help="Constant stepsize (default: schedule alpha)")
@click.option("--allow-inadmissible", is_flag=True, help="Keep grid points outside the monotonicity stepsize bound")
@click.option("--simulate", is_flag=True, help="Also measure Monte Carlo plateau errors on matching rings")
@click.option("--output", "-o", type=click.Path(file_okay=False, path_type=Path), help="Write sweep.csv here")
@click.option("--overwrite", is_flag=True, help="Replace an existing output directory")
def sweep(
    config_path: Path,
    rho_w: str | None,
    rho_wo: str | None,
    ring_r: float | None,
    ring_d: str | None,
    alpha: float | None,
    allow_inadmissible: bool,
    simulate: bool,
    output: Path | None,
    overwrite: bool,
):
    """Tabulate the steady-state error bound over spectral parameters.

    Prints CSV with theta and the signs of its finite-difference slopes in
    rho_w and rho(W_o) at each grid point.
    """
    try:
        config = load_run_config(config_path)
        exp = build(config)
        alpha = alpha if alpha is not None else config.schedule.alpha
        rw, ro = spectral_grid(exp, rho_w, rho_wo, ring_r, ring_d)
        table = monotonicity_table(exp.constants(), alpha, rw, ro, strict=not allow_inadmissible)
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(2)
    except (HypothesisViolated, StepsizeTooLargeError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(3)

    plateaus = None
    if simulate:
        try:
            plateaus = simulate_plateaus(exp, alpha, table)
        except DimensionMismatchError as e:
            console.print(f"[red]Error:[/red] {e}")
            raise SystemExit(2)

    text = format_sweep_csv(table, plateaus)
    if output:
        try:
            with OutputDirectory(output, overwrite=overwrite) as out:
                out.write_text("sweep.csv", text)
                out.write_meta(config.to_dict(), command="sweep", alpha=alpha)
        except (ResultsError, OSError) as e:
            console.print(f"[red]Error:[/red] {e}")
            raise SystemExit(1)
    click.echo(text, nl=False)
