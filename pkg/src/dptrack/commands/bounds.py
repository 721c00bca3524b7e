"""Bounds command implementation."""

import json
import math
from pathlib import Path

import click
from rich.console import Console

from dptrack.core.bounds import (
    NoCaseMatchesError,
    closed_form_discrepancy,
    closed_form_theta,
    cor1_stepsize_bound,
    prior_stepsize_bound,
    thm1_stepsize_check,
    thm3_stepsize_bound,
    thm3_system,
    thm4_stepsize_bound,
)
from dptrack.core.errors import ConfigError, HypothesisViolated
from dptrack.core.experiment import build, load_run_config
from dptrack.core.results import OutputDirectory, ResultsError
from dptrack.models.bounds import ProblemConstants
from dptrack.models.run_config import Schedule

console = Console(stderr=True)


def _finite(value: float) -> float | None:
    return value if math.isfinite(value) else None


def bounds_report(pc: ProblemConstants, schedule: Schedule, alpha: float) -> dict:
    """Every stepsize bound, the decay regime and the constant-stepsize system at alpha."""
    geometric = cor1_stepsize_bound(pc)
    prior = prior_stepsize_bound(pc)
    report = {
        "constants": pc.to_dict(),
        "stepsize_bounds": {
            "linear_rate": thm3_stepsize_bound(pc),
            "monotonicity": thm4_stepsize_bound(pc),
            "geometric_decay": geometric,
            "prior": prior,
            "improvement": geometric / prior,
        },
        "alpha": alpha,
        "notes": [],
    }

    if schedule.is_constant:
        report["decay"] = None
    else:
        try:
            report["decay"] = thm1_stepsize_check(
                pc, schedule.p, schedule.q, schedule.alpha, schedule.gamma, m=schedule.m
            ).to_dict()
        except NoCaseMatchesError as e:
            report["decay"] = None
            report["notes"].append(str(e))

    try:
        system = thm3_system(pc, alpha)
    except HypothesisViolated as e:
        report["system"] = None
        report["notes"].append(str(e))
        return report

    report["system"] = system.to_dict()
    if system.contractive:
        theta1, theta2 = closed_form_theta(pc, alpha)
        report["closed_form"] = {
            "theta1": _finite(theta1),
            "theta2": _finite(theta2),
            "discrepancy": closed_form_discrepancy(pc, alpha),
        }
    else:
        report["notes"].append(f"rho(A) = {system.rho_A:.6g} >= 1, no steady state")
    return report


@click.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--alpha", type=float, help="Constant stepsize for the steady-state system (default: schedule alpha)")
@click.option("--output", "-o", type=click.Path(file_okay=False, path_type=Path), help="Write bounds.json here")
@click.option("--overwrite", is_flag=True, help="Replace an existing output directory")
def bounds(config_path: Path, alpha: float | None, output: Path | None, overwrite: bool):
    """Print stepsize bounds and steady-state error bounds as JSON."""
    try:
        config = load_run_config(config_path)
        exp = build(config)
        alpha = alpha if alpha is not None else config.schedule.alpha
        report = bounds_report(exp.constants(), config.schedule, alpha)
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(2)
    except HypothesisViolated as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(3)

    if output:
        try:
            with OutputDirectory(output, overwrite=overwrite) as out:
                out.write_json("bounds.json", report)
                out.write_meta(config.to_dict(), command="bounds")
        except (ResultsError, OSError) as e:
            console.print(f"[red]Error:[/red] {e}")
            raise SystemExit(1)

    click.echo(json.dumps(report, indent=2))
