"""Run command implementation."""

import time
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from dptrack.core.bounds import NoCaseMatchesError, thm1_stepsize_check, thm3_stepsize_bound
from dptrack.core.config import get_config
from dptrack.core.engine import DimensionMismatchError, monte_carlo
from dptrack.core.errors import ConfigError, HypothesisViolated
from dptrack.core.experiment import Experiment, build, load_run_config
from dptrack.core.privacy import budget
from dptrack.core.results import OutputDirectory, ResultsError
from dptrack.models.trajectory import ERROR_CHANNELS

console = Console()


def predicted_exponents(exp: Experiment) -> tuple[dict[str, float], str]:
    """Decay exponents the schedule falls under, with a one-line verdict."""
    sched = exp.config.schedule
    pc = exp.constants()
    if sched.is_constant:
        bound = thm3_stepsize_bound(pc)
        verdict = "linear rate to a noise floor" if sched.alpha_gamma < bound else "stepsize above the linear-rate bound"
        return {}, f"{verdict} (alpha*gamma={sched.alpha_gamma:.4g}, bound={bound:.4g})"
    try:
        check = thm1_stepsize_check(pc, sched.p, sched.q, sched.alpha, sched.gamma, m=sched.m)
    except NoCaseMatchesError as e:
        return {}, str(e)
    status = "satisfied" if check.satisfied else f"violated ({check.binding})"
    return check.exponents, f"decay regime {check.case}, stepsize condition {status}"


@click.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--output", "-o", type=click.Path(file_okay=False, path_type=Path), help="Output directory")
@click.option("--seed", type=int, help="Master seed")
@click.option("--horizon", "-K", type=int, help="Number of iterations K")
@click.option("--trials", "-n", type=int, help="Monte Carlo trials")
@click.option("--workers", "-w", type=int, help="Worker processes for the trials")
@click.option("--ring-r", type=float, help="Use the four-agent ring with this r")
@click.option("--ring-d", type=float, help="Use the four-agent ring with this d")
@click.option("--overwrite", is_flag=True, help="Replace an existing output directory")
def run(
    config_path: Path,
    output: Path | None,
    seed: int | None,
    horizon: int | None,
    trials: int | None,
    workers: int | None,
    ring_r: float | None,
    ring_d: float | None,
    overwrite: bool,
):
    """Simulate noisy gradient tracking and write error trajectories.

    CONFIG_PATH is a YAML run configuration, or the meta.json of an earlier
    run to replay it exactly.
    """
    started = time.perf_counter()
    try:
        config = load_run_config(
            config_path,
            seed=seed,
            horizon=horizon,
            trials=trials,
            workers=workers,
            ring_r=ring_r,
            ring_d=ring_d,
        )
        exp = build(config)
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(2)
    except HypothesisViolated as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(3)

    out_path = output or (Path(config.output) if config.output else get_config().run_dir(config.problem.kind))
    console.print(
        f"[blue]Running[/blue] {config.problem.kind} with n={exp.objectives.n}, r={exp.objectives.r}, "
        f"K={config.horizon}, {config.trials} trial(s)"
    )

    try:
        result = monte_carlo(config, exp.weights, exp.objectives, noise=exp.noise, show_progress=True)
    except DimensionMismatchError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(2)

    report = budget(exp.privacy_query(horizon=config.horizon)) if exp.calibrated else None
    exponents, verdict = predicted_exponents(exp)

    try:
        with OutputDirectory(out_path, overwrite=overwrite) as out:
            for i, trajectory in enumerate(result.trials):
                out.write_trajectory(f"trajectory_{i}.csv", trajectory)
            out.write_trajectory("trajectory_mean.csv", result.mean)
            out.write_meta(
                config.to_dict(),
                trial_seeds=[[config.seed, i] for i in range(config.trials)],
                noise=exp.noise.to_dict(),
                spectral=exp.profile.to_dict(),
                objectives=exp.objectives.to_dict(),
                privacy=report.to_dict() if report else None,
                wall_time=time.perf_counter() - started,
            )
    except (ResultsError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise SystemExit(1)

    table = Table(show_header=True, header_style="bold")
    table.add_column("Error")
    table.add_column("Final mean", justify="right")
    table.add_column("Predicted exponent", justify="right")
    for channel in ERROR_CHANNELS:
        predicted = exponents.get(channel)
        table.add_row(
            channel,
            f"{result.mean.channel(channel)[-1]:.6e}",
            f"{predicted:g}" if predicted is not None else "-",
        )
    console.print(table)
    console.print(f"  {verdict}")
    if report:
        console.print(f"  Privacy budget over K={config.horizon}: [bold]eps = {report.epsilon:.6g}[/bold]")
    console.print(f"\n[green]✓[/green] Wrote {len(result.trials) + 2} files to [bold]{out_path}[/bold]")
