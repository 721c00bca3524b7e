"""Tests for decay-rate fitting."""

import math

import numpy as np
import pytest

from helpers import make_config, variance_noise
from dptrack.core.engine import monte_carlo
from dptrack.core.rates import (
    MIN_SAMPLES,
    InsufficientDataError,
    fit_decay_exponent,
    fit_linear_rate,
    fit_trajectory,
)
from dptrack.models.trajectory import Trajectory


def test_power_law():
    k = np.arange(2000)
    fit = fit_decay_exponent(k, 5.0 * (3.0 + k) ** -0.6, m=3.0, channel="opt_err")
    assert fit.slope == pytest.approx(-0.6, abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.channel == "opt_err"
    assert fit.samples == 1600


def test_geometric():
    k = np.arange(300)
    fit = fit_linear_rate(k, 3.0 * 0.9**k)
    assert fit.slope == pytest.approx(math.log(0.9), abs=1e-10)


def test_floor_drops_round_off():
    k = np.arange(200)
    err = 0.8**k
    err[150:] = 1e-40
    fit = fit_linear_rate(k, err, floor=1e-30)
    assert fit.slope == pytest.approx(math.log(0.8), abs=1e-8)
    assert fit.samples == 150 - 40


def test_zeros_are_skipped():
    k = np.arange(100)
    err = (1.0 + k) ** -1.0
    err[::2] = 0.0
    fit = fit_decay_exponent(k, err, m=1.0)
    assert fit.slope == pytest.approx(-1.0, abs=1e-10)


def test_insufficient_data():
    with pytest.raises(InsufficientDataError):
        fit_decay_exponent(np.arange(MIN_SAMPLES), np.ones(MIN_SAMPLES), m=1.0)


def test_all_zero():
    with pytest.raises(InsufficientDataError):
        fit_linear_rate(np.arange(100), np.zeros(100))


@pytest.mark.parametrize("burn_in", [-0.1, 1.0])
def test_invalid_burn_in(burn_in):
    with pytest.raises(ValueError):
        fit_linear_rate(np.arange(100), np.ones(100), burn_in=burn_in)


def test_fit_trajectory_covers_every_channel():
    k = np.arange(500)
    traj = Trajectory(
        k=k,
        opt_err=(1.0 + k) ** -0.5,
        cons_err=(1.0 + k) ** -1.0,
        track_err=(1.0 + k) ** -1.5,
        gamma_k=np.ones(500),
        beta_k=np.ones(500),
    )
    fits = fit_trajectory(traj, m=1.0)
    assert [f.channel for f in fits] == ["opt_err", "cons_err", "track_err"]
    assert [round(f.slope, 6) for f in fits] == [-0.5, -1.0, -1.5]
    assert set(fits[0].to_dict()) == {"channel", "slope", "stderr", "r_squared", "samples"}



def test_trajectory_csv_keeps_every_digit(tmp_path, rng):
    k = np.arange(50)
    traj = Trajectory(
        k=k,
        opt_err=rng.random(50) * 1e-7,
        cons_err=rng.random(50),
        track_err=rng.random(50) * 1e3,
        gamma_k=1.0 / (1.0 + k) ** 0.3,
        beta_k=np.ones(50),
    )
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    assert path.read_text().splitlines()[0] == "k,opt_err,cons_err,track_err,gamma_k,beta_k"
    assert path.read_text().splitlines()[1].startswith("0,")
    loaded = Trajectory.from_csv(path)
    assert loaded.k.dtype.kind == "i"
    for column in ("k", "opt_err", "cons_err", "track_err", "gamma_k", "beta_k"):
        np.testing.assert_array_equal(getattr(loaded, column), getattr(traj, column))


def test_empty_trajectory_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ValueError):
        Trajectory.from_csv(path)


@pytest.mark.slow
def test_constant_gradient_weight_decays_with_noise(ring, square):
    config = make_config(alpha=0.05, p=0.0, q=0.3, horizon=5000, noise=variance_noise(0.01), seed=31)
    mean = monte_carlo(config, ring, square, trials=50).mean
    fit = fit_decay_exponent(mean.k, mean.opt_err, m=1.0, channel="opt_err")
    assert fit.slope == pytest.approx(-0.6, abs=0.1)


@pytest.mark.slow
def test_decaying_gradient_weight(ring, square):
    config = make_config(alpha=0.8, p=0.6, q=0.9, m=10.0, horizon=5000, noise=variance_noise(0.01), seed=32)
    mean = monte_carlo(config, ring, square, trials=50).mean
    opt = fit_decay_exponent(mean.k, mean.opt_err, m=10.0, channel="opt_err")
    cons = fit_decay_exponent(mean.k, mean.cons_err, m=10.0, channel="cons_err")
    assert opt.slope == pytest.approx(-1.2, abs=0.15)
    # The consensus error decays at least as fast as predicted
    assert cons.slope < -1.2 + 0.15
