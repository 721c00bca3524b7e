"""Decay-rate fits on error trajectories."""

import numpy as np
from scipy import stats

from dptrack.models.trajectory import ERROR_CHANNELS, RateFit, Trajectory

DEFAULT_BURN_IN = 0.2
MIN_SAMPLES = 10


class InsufficientDataError(Exception):
    """Too few positive samples remain after burn-in."""

    pass


def _fit(x: np.ndarray, err: np.ndarray, channel: str, burn_in: float, floor: float) -> RateFit:
    if not 0 <= burn_in < 1:
        raise ValueError(f"burn-in fraction must lie in [0, 1), got {burn_in}")
    start = int(len(err) * burn_in)
    x, err = x[start:], err[start:]
    keep = err > floor
    if keep.sum() < MIN_SAMPLES:
        raise InsufficientDataError(
            f"{channel}: {int(keep.sum())} usable samples after burn-in, need at least {MIN_SAMPLES}"
        )
    result = stats.linregress(x[keep], np.log(err[keep]))
    return RateFit(
        channel=channel,
        slope=float(result.slope),
        stderr=float(result.stderr),
        r_squared=float(result.rvalue**2),
        samples=int(keep.sum()),
    )


def fit_decay_exponent(
    k: np.ndarray, err: np.ndarray, m: float, channel: str = "error", burn_in: float = DEFAULT_BURN_IN
) -> RateFit:
    """Slope of log(err) against log(m+k); -slope is the polynomial decay exponent."""
    return _fit(np.log(m + np.asarray(k, dtype=float)), np.asarray(err, dtype=float), channel, burn_in, 0.0)


def fit_linear_rate(
    k: np.ndarray, err: np.ndarray, channel: str = "error", burn_in: float = DEFAULT_BURN_IN, floor: float = 0.0
) -> RateFit:
    """Slope of log(err) against k; exp(slope) is the per-iteration contraction.

    Samples at or below ``floor`` are dropped so round-off does not bend the fit.
    """
    return _fit(np.asarray(k, dtype=float), np.asarray(err, dtype=float), channel, burn_in, floor)


def fit_trajectory(trajectory: Trajectory, m: float, burn_in: float = DEFAULT_BURN_IN) -> list[RateFit]:
    """Decay-exponent fit for every error channel."""
    return [fit_decay_exponent(trajectory.k, trajectory.channel(c), m, c, burn_in) for c in ERROR_CHANNELS]
