"""Noisy gradient-tracking iteration and Monte Carlo driver."""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed

import numpy as np
from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TimeElapsedColumn

from dptrack.core.objectives import clip_rows
from dptrack.core.randomness import NoiseStream, beta_at, gamma_at, make_stream
from dptrack.models.objective import ObjectiveSet
from dptrack.models.run_config import NoiseParams, RunConfig, Schedule
from dptrack.models.trajectory import AlgoState, MonteCarloResult, Trajectory
from dptrack.models.weights import WeightMatrix

logger = logging.getLogger(__name__)

NOISE_BATCH = 512


class DimensionMismatchError(Exception):
    """State, weight matrix and objectives disagree on n or r."""

    pass


def _check_dimensions(x: np.ndarray, s: np.ndarray, wm: WeightMatrix, obj: ObjectiveSet) -> None:
    if wm.n != obj.n:
        raise DimensionMismatchError(f"Weight matrix has {wm.n} agents, objectives have {obj.n}")
    expected = (obj.n, obj.r)
    if x.shape != expected:
        raise DimensionMismatchError(f"x has shape {x.shape}, expected {expected}")
    if s.shape != expected:
        raise DimensionMismatchError(f"s has shape {s.shape}, expected {expected}")


def _gradients(obj: ObjectiveSet, x: np.ndarray, clip: bool) -> tuple[np.ndarray, int]:
    grad = obj.grad_all(x)
    if clip:
        return clip_rows(grad, obj.c_bound)
    return grad, 0


def _update(
    w: np.ndarray,
    wo: np.ndarray,
    x: np.ndarray,
    s: np.ndarray,
    grad: np.ndarray,
    alpha: float,
    gamma_k: float,
    beta_k: float,
    eta: np.ndarray | None,
    xi: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray]:
    # Self-weights act on the agent's own exact state; only neighbor messages carry noise
    s_next = w @ s + gamma_k * grad
    if eta is not None:
        s_next = s_next + beta_k * (wo @ eta)
    x_next = w @ x - alpha * (s_next - s)
    if xi is not None:
        x_next = x_next + beta_k * (wo @ xi)
    return x_next, s_next


def step(
    state: AlgoState,
    wm: WeightMatrix,
    obj: ObjectiveSet,
    sched: Schedule,
    noise: NoiseParams,
    stream: NoiseStream | None = None,
    clip: bool = False,
) -> AlgoState:
    """One iteration from (x_k, s_k) to (x_{k+1}, s_{k+1}).

    s_{k+1} = W s_k + beta_k W_o eta_k + gamma_k grad F(x_k)
    x_{k+1} = W x_k + beta_k W_o xi_k - alpha (s_{k+1} - s_k)
    """
    _check_dimensions(state.x, state.s, wm, obj)
    eta = xi = None
    if not noise.is_zero:
        if stream is None:
            raise ValueError("A noise stream is required when noise is enabled")
        unit_eta, unit_xi = stream.draw(state.k)
        eta, xi = noise.b_eta * unit_eta, noise.b_xi * unit_xi

    grad, _ = _gradients(obj, state.x, clip)
    x_next, s_next = _update(
        wm.w,
        wm.off_diagonal,
        state.x,
        state.s,
        grad,
        sched.alpha,
        float(gamma_at(sched, state.k)),
        float(beta_at(sched, state.k)),
        eta,
        xi,
    )
    return AlgoState(x=x_next, s=s_next, s_prev=state.s, k=state.k + 1)


def default_initial_state(config: RunConfig, obj: ObjectiveSet) -> tuple[np.ndarray, np.ndarray]:
    """x0 uniform in the domain box (seeded by the master seed), s0 = 0, unless given."""
    x0, s0 = config.initial_state(obj.n, obj.r)
    if x0 is None:
        rng = np.random.default_rng(config.seed)
        lo, hi = obj.domain_box
        x0 = rng.uniform(lo, hi, size=(obj.n, obj.r))
    if s0 is None:
        s0 = np.zeros((obj.n, obj.r))
    return x0, s0


def run(
    config: RunConfig,
    wm: WeightMatrix,
    obj: ObjectiveSet,
    noise: NoiseParams | None = None,
    run_id: int = 0,
) -> Trajectory:
    """Run K+1 iterations and record errors for k = 0..K.

    The tracker increment y_k = s_{k+1} - s_k needs one step past the horizon,
    so iteration K is computed and x_{K+1} is discarded.
    """
    horizon = config.horizon
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    if noise is None:
        noise = config.resolve_noise(obj.n, obj.r)
    sched = config.schedule

    x, s = default_initial_state(config, obj)
    _check_dimensions(x, s, wm, obj)

    w = wm.w
    wo = wm.off_diagonal
    ks = np.arange(horizon + 1)
    gammas = gamma_at(sched, ks)
    betas = beta_at(sched, ks)

    opt_err = np.empty(horizon + 1)
    cons_err = np.empty(horizon + 1)
    track_err = np.empty(horizon + 1)
    x_bar = np.empty((horizon + 1, obj.r))

    stream = None if noise.is_zero else make_stream(config.seed, run_id, obj.n, obj.r)
    eta = xi = None
    clipped = 0

    for k in ks:
        if stream is not None:
            offset = k % NOISE_BATCH
            if offset == 0:
                unit_eta, unit_xi = stream.draw_batch(k, min(NOISE_BATCH, horizon + 1 - k))
            eta = noise.b_eta * unit_eta[offset]
            xi = noise.b_xi * unit_xi[offset]

        grad, n_clipped = _gradients(obj, x, config.clip)
        clipped += n_clipped
        x_next, s_next = _update(w, wo, x, s, grad, sched.alpha, gammas[k], betas[k], eta, xi)

        mean_x = x.mean(axis=0)
        y = s_next - s
        x_bar[k] = mean_x
        opt_err[k] = np.sum((mean_x - obj.x_star) ** 2)
        cons_err[k] = np.sum((x - mean_x) ** 2)
        track_err[k] = np.sum((y - y.mean(axis=0)) ** 2)

        x, s = x_next, s_next

    if clipped:
        logger.debug("Run %d clipped %d agent gradients", run_id, clipped)

    return Trajectory(
        k=ks,
        opt_err=opt_err,
        cons_err=cons_err,
        track_err=track_err,
        gamma_k=gammas,
        beta_k=betas,
        x_bar=x_bar,
    )


def _run_trial(config: RunConfig, wm: WeightMatrix, obj: ObjectiveSet, noise: NoiseParams, run_id: int) -> Trajectory:
    return run(config, wm, obj, noise=noise, run_id=run_id)


def monte_carlo(
    config: RunConfig,
    wm: WeightMatrix,
    obj: ObjectiveSet,
    trials: int | None = None,
    noise: NoiseParams | None = None,
    workers: int | None = None,
    show_progress: bool = False,
) -> MonteCarloResult:
    """Independent trials keyed by (seed, trial index), averaged element-wise.

    Results are reduced in trial order, so the output does not depend on the
    worker count.
    """
    trials = config.trials if trials is None else trials
    workers = config.workers if workers is None else workers
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if noise is None:
        noise = config.resolve_noise(obj.n, obj.r)

    results: list[Trajectory | None] = [None] * trials
    progress = None
    if show_progress:
        progress = Progress(
            "[progress.description]{task.description}",
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            console=Console(stderr=True),
        )
        progress.start()
    task = progress.add_task("Monte Carlo trials", total=trials) if progress else None

    try:
        if workers <= 1 or trials == 1:
            for run_id in range(trials):
                results[run_id] = _run_trial(config, wm, obj, noise, run_id)
                if progress:
                    progress.update(task, advance=1)
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                futures = {
                    executor.submit(_run_trial, config, wm, obj, noise, run_id): run_id
                    for run_id in range(trials)
                }
                for future in as_completed(futures):
                    results[futures[future]] = future.result()
                    if progress:
                        progress.update(task, advance=1)
    finally:
        if progress:
            progress.stop()

    logger.debug("Completed %d trials with %d workers", trials, workers)
    return MonteCarloResult(mean=Trajectory.mean(results), trials=results)
