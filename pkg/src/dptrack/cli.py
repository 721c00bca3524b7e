"""CLI entry point for dptrack."""

import logging

import click
from rich.console import Console
from rich.logging import RichHandler

from dptrack import __version__
from dptrack.commands import bounds, budget, calibrate, rate_fit, run, sweep

# stdout stays clean for JSON and CSV output
err_console = Console(stderr=True)

BANNER = r"""
     _       _                  _
  __| |_ __ | |_ _ __ __ _  ___| | __
 / _` | '_ \| __| '__/ _` |/ __| |/ /
| (_| | |_) | |_| | | (_| | (__|   <
 \__,_| .__/ \__|_|  \__,_|\___|_|\_\
      |_|
"""


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


@click.group()
@click.version_option(version=__version__, prog_name="dptrack")
@click.option("--verbose", "-v", is_flag=True, help="Log debug diagnostics to stderr")
@click.option("--quiet", "-q", is_flag=True, help="Suppress the banner")
def main(verbose: bool, quiet: bool):
    """dptrack - differentially private gradient tracking, simulated and bounded.

    Run noisy gradient tracking on synthetic multi-agent problems, compute
    privacy budgets and convergence bounds, and check them against
    Monte Carlo experiments.

    Examples:

        dptrack run experiment.yaml --trials 50

        dptrack bounds experiment.yaml

        dptrack calibrate experiment.yaml --eps 1 --horizon 500

        dptrack rate-fit runs/example/trajectory_mean.csv
    """
    setup_logging(verbose)
    if not quiet:
        err_console.print(BANNER, style="bold blue", highlight=False)


# Register commands
main.add_command(run.run)
main.add_command(rate_fit.rate_fit)
main.add_command(sweep.sweep)
main.add_command(budget.budget)
main.add_command(calibrate.calibrate)
main.add_command(bounds.bounds)


if __name__ == "__main__":
    main()
