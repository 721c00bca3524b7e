"""Sensitivities, privacy budgets and noise calibration."""

import logging
import math

import numpy as np
from scipy.special import zeta

from dptrack.core.errors import HypothesisViolated
from dptrack.core.randomness import beta_at, gamma_at
from dptrack.models.privacy import AgentBudget, PrivacyQuery, PrivacyReport
from dptrack.models.run_config import Schedule

logger = logging.getLogger(__name__)


def c_coefficient(k: int, t: int, w_ii: float) -> float:
    """c_{k,t} = w^{k-2-t} ((k-t-1) - (k-t) w)."""
    if not 0 <= t < k:
        raise IndexError(f"c_coefficient needs 0 <= t < k, got k={k}, t={t}")
    j = k - t
    return w_ii ** (j - 2) * ((j - 1) - j * w_ii)


def _kernels(length: int, w_ii: float) -> tuple[np.ndarray, np.ndarray]:
    """Lag kernels indexed by j-1 for lags j = 1..length: w^{j-1} and |c| at lag j."""
    j = np.arange(1, length + 1, dtype=float)
    s_kernel = w_ii ** (j - 1)
    x_kernel = np.abs(w_ii ** (j - 2) * ((j - 1) - j * w_ii))
    return s_kernel, x_kernel


def sensitivity_closed_form(
    horizon: int, schedule: Schedule, w_ii: float, c_grad: float, r: int
) -> tuple[np.ndarray, np.ndarray]:
    """Worst-case (Delta s_k, Delta x_k) for k = 0..K.

    Delta s_k = 2 sqrt(r) C sum_{t<k} w^{k-1-t} gamma_t
    Delta x_k = 2 sqrt(r) C alpha sum_{t<k} |c_{k,t}| gamma_t
    """
    scale = 2.0 * math.sqrt(r) * c_grad
    gammas = gamma_at(schedule, np.arange(horizon))
    s_kernel, x_kernel = _kernels(horizon, w_ii)
    delta_s = np.zeros(horizon + 1)
    delta_x = np.zeros(horizon + 1)
    delta_s[1:] = scale * np.convolve(gammas, s_kernel)[:horizon]
    delta_x[1:] = scale * schedule.alpha * np.convolve(gammas, x_kernel)[:horizon]
    return delta_s, delta_x


def sensitivity_recursion_oracle(
    horizon: int, schedule: Schedule, w_ii: float, c_grad: float, r: int
) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force sensitivities from the state-difference recursions.

    Each gradient swap at time t is propagated separately through
    Delta s_{k+1} = w Delta s_k + gamma_k Delta f_k and
    Delta x_{k+1} = w Delta x_k + alpha (1-w) Delta s_k - alpha gamma_k Delta f_k.
    The worst case picks the sign of every swap independently, so the
    absolute impulse responses add.
    """
    scale = 2.0 * math.sqrt(r) * c_grad
    alpha = schedule.alpha
    delta_s = np.zeros(horizon + 1)
    delta_x = np.zeros(horizon + 1)
    for t in range(horizon):
        gamma_t = float(gamma_at(schedule, t))
        ds, dx = 0.0, 0.0
        for k in range(t, horizon):
            impulse = gamma_t if k == t else 0.0
            ds, dx = w_ii * ds + impulse, w_ii * dx + alpha * (1 - w_ii) * ds - alpha * impulse
            delta_s[k + 1] += abs(ds)
            delta_x[k + 1] += abs(dx)
    return scale * delta_s, scale * delta_x


def _finite_coefficients(q: PrivacyQuery, w_ii: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-iteration noise-free budget terms Delta_k / beta_k for k = 1..K."""
    delta_s, delta_x = sensitivity_closed_form(q.horizon, q.schedule, w_ii, q.c_grad, q.r)
    betas = beta_at(q.schedule, np.arange(1, q.horizon + 1))
    return delta_s[1:] / betas, delta_x[1:] / betas


def finite_horizon_budget(q: PrivacyQuery) -> PrivacyReport:
    """Budget of K iterations: eps_i = sum_k (Delta s_k/b_eta + Delta x_k/b_xi)/beta_k."""
    if q.is_infinite:
        raise ValueError("finite_horizon_budget needs a finite horizon")
    b_eta, b_xi = q.require_scales()

    agents = []
    per_iteration = []
    for i, w_ii in enumerate(q.w_diag):
        s_terms, x_terms = _finite_coefficients(q, w_ii)
        s_terms, x_terms = s_terms / b_eta, x_terms / b_xi
        agents.append(AgentBudget(agent=i, s_channel=float(s_terms.sum()), x_channel=float(x_terms.sum())))
        per_iteration.append((s_terms, x_terms))

    report = PrivacyReport(agents=agents, horizon=q.horizon)
    s_terms, x_terms = per_iteration[report.worst_agent]
    report.s_per_iteration = s_terms.tolist()
    report.x_per_iteration = x_terms.tolist()
    return report


def budget_curve(q: PrivacyQuery) -> np.ndarray:
    """Worst-agent budget for every horizon 1..K in one pass."""
    if q.is_infinite:
        raise ValueError("budget_curve needs a finite horizon")
    b_eta, b_xi = q.require_scales()
    curves = []
    for w_ii in q.w_diag:
        s_terms, x_terms = _finite_coefficients(q, w_ii)
        curves.append(np.cumsum(s_terms / b_eta + x_terms / b_xi))
    return np.max(curves, axis=0)


def eulerian_numbers(order: int) -> list[int]:
    """Row ``order`` of the Eulerian triangle; row 0 is [1]."""
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    row = [1]
    for n in range(2, order + 1):
        prev = row + [0]
        row = [(j + 1) * prev[j] + (n - j) * (prev[j - 1] if j > 0 else 0) for j in range(n)]
    return row


def eulerian_polynomial(order: int, w: float) -> float:
    """P_n(w) = sum_j <n, j> w^j with P_0 = 1."""
    return float(sum(a * w**j for j, a in enumerate(eulerian_numbers(order))))


def staircase_sum(order: int, w: float, terms: int | None = None) -> float:
    """sum_{t>=1} t^n w^t, in closed form or truncated after ``terms`` terms."""
    if terms is None:
        return w * eulerian_polynomial(order, w) / (1 - w) ** (order + 1)
    t = np.arange(1, terms + 1, dtype=float)
    return float(np.sum(t**order * w**t))


def tail_start(m: float) -> tuple[int, bool]:
    """First index of the tail sums k > m, and whether m had to be rounded up."""
    if float(m).is_integer():
        return int(m) + 1, False
    return math.ceil(m) + 1, True


def _infinite_coefficients(q: PrivacyQuery, w_ii: float) -> tuple[float, float, int, bool]:
    sched = q.schedule
    p, qq, m = sched.p, sched.q, sched.m
    if p < 0 or qq >= p - 2:
        raise HypothesisViolated(
            f"Infinite-horizon budget needs p >= 0 and q < p - 2 (got p={p}, q={qq}); the tail sums diverge"
        )
    k0, rounded = tail_start(m)
    n = math.ceil(p)
    lead = q.l1_scale * sched.gamma * eulerian_polynomial(n, w_ii) / (m**p * (1 - w_ii) ** (n + 1))
    # Hurwitz zeta gives sum_{k >= k0} k^{-s} exactly
    s_tail = float(zeta(p - qq, k0))
    x_tail = float(zeta(p - qq - 1, k0))
    s_coef = lead * s_tail / w_ii**m
    x_coef = lead * sched.alpha * x_tail / w_ii ** (m + 1)
    return s_coef, x_coef, k0, rounded


def infinite_horizon_budget(q: PrivacyQuery) -> PrivacyReport:
    """Upper bound on the budget as the number of iterations grows without limit."""
    b_eta, b_xi = q.require_scales()
    agents = []
    k0, rounded = None, False
    for i, w_ii in enumerate(q.w_diag):
        s_coef, x_coef, k0, rounded = _infinite_coefficients(q, w_ii)
        agents.append(AgentBudget(agent=i, s_channel=s_coef / b_eta, x_channel=x_coef / b_xi))
    if rounded:
        logger.warning("Non-integer m=%s: tail sums start at k=%d", q.schedule.m, k0)
    return PrivacyReport(agents=agents, horizon=None, tail_start=k0, m_rounded=rounded)


def budget(q: PrivacyQuery) -> PrivacyReport:
    """Dispatch on the query horizon."""
    return infinite_horizon_budget(q) if q.is_infinite else finite_horizon_budget(q)


def channel_coefficients(q: PrivacyQuery) -> list[tuple[float, float]]:
    """Per-agent (S_i, X_i) with eps_i = S_i/b_eta + X_i/b_xi."""
    out = []
    for w_ii in q.w_diag:
        if q.is_infinite:
            s_coef, x_coef, _, _ = _infinite_coefficients(q, w_ii)
        else:
            s_terms, x_terms = _finite_coefficients(q, w_ii)
            s_coef, x_coef = float(s_terms.sum()), float(x_terms.sum())
        out.append((s_coef, x_coef))
    return out


def calibrate_noise(target_eps: float, split: float, q: PrivacyQuery) -> tuple[float, float]:
    """Laplace scales that spend exactly ``target_eps`` at the worst agent.

    The s-channel of the worst agent receives split * eps and the x-channel
    the rest. When no single agent is worst under its own split, scales are
    taken from the agent with the largest s-coefficient and rescaled so the
    maximum budget still equals the target.
    """
    if not target_eps > 0:
        raise ValueError(f"target epsilon must be positive, got {target_eps}")
    if not 0 < split < 1:
        raise ValueError(f"split must lie in (0, 1), got {split}")

    coefs = channel_coefficients(q)
    if any(s <= 0 or x <= 0 for s, x in coefs):
        raise HypothesisViolated("Zero sensitivity: a positive gradient bound C is required to calibrate noise")

    def scales_for(j: int) -> tuple[float, float]:
        s_j, x_j = coefs[j]
        return s_j / (split * target_eps), x_j / ((1 - split) * target_eps)

    def worst(b_eta: float, b_xi: float) -> float:
        return max(s / b_eta + x / b_xi for s, x in coefs)

    order = sorted(range(len(coefs)), key=lambda j: coefs[j][0] * split + coefs[j][1] * (1 - split), reverse=True)
    for j in order:
        b_eta, b_xi = scales_for(j)
        if worst(b_eta, b_xi) <= target_eps * (1 + 1e-12):
            logger.debug("Calibrated against agent %d: b_eta=%.6g, b_xi=%.6g", j, b_eta, b_xi)
            return b_eta, b_xi

    j = max(range(len(coefs)), key=lambda i: coefs[i][0])
    b_eta, b_xi = scales_for(j)
    factor = worst(b_eta, b_xi) / target_eps
    logger.info("No agent is worst under its own split; rescaling scales by %.6g", factor)
    return b_eta * factor, b_xi * factor
