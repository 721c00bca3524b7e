"""Objective construction for the rendezvous and ridge experiment families."""

import logging

import numpy as np

from dptrack.models.objective import ObjectiveSet, RendezvousObjectives, RidgeObjectives

logger = logging.getLogger(__name__)

RIDGE_BOX_HALFWIDTH = 20.0
RENDEZVOUS_INFLATION = 1.5
MIN_HALFWIDTH = 1.0


class ObjectiveError(Exception):
    """Invalid objective parameters."""

    pass


class EmptyTargetsError(ObjectiveError):
    """Rendezvous problem with no targets."""

    pass


class SingularSystemError(ObjectiveError):
    """Normal equations of the ridge problem cannot be solved."""

    pass


def _rendezvous_box(targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = targets.min(axis=0)
    hi = targets.max(axis=0)
    center = (lo + hi) / 2
    half = np.maximum((hi - lo) / 2, MIN_HALFWIDTH)
    return center - RENDEZVOUS_INFLATION * half, center + RENDEZVOUS_INFLATION * half


def make_rendezvous(targets, box: tuple | None = None) -> RendezvousObjectives:
    """f_i(x) = ||x - a_i||^2 for per-agent targets a_i.

    The domain defaults to the bounding box of the targets inflated by 50%
    (each half-width at least 1). C is the largest gradient norm over the
    box, attained at the corner farthest from some target.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.size == 0:
        raise EmptyTargetsError("Rendezvous problem needs at least one target")
    if targets.ndim == 1:
        targets = targets[:, None]
    if targets.ndim != 2:
        raise ObjectiveError(f"Targets must be an n x r array, got shape {targets.shape}")
    if targets.shape[0] < 2:
        raise ObjectiveError(f"Need at least 2 agents, got {targets.shape[0]}")

    if box is None:
        lo, hi = _rendezvous_box(targets)
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in box)

    far = np.maximum(np.abs(lo - targets), np.abs(hi - targets))
    c_bound = 2.0 * float(np.max(np.linalg.norm(far, axis=1)))

    return RendezvousObjectives(
        mu=2.0,
        ell=2.0,
        c_bound=c_bound,
        x_star=targets.mean(axis=0),
        box_lo=lo,
        box_hi=hi,
        targets=targets,
    )


def _solve_normal_equations(u: np.ndarray, rhs: np.ndarray, rho_pen: float) -> np.ndarray:
    n, r = u.shape
    system = u.T @ u + n * rho_pen * np.eye(r)
    try:
        return np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"Ridge normal equations are singular: {e}") from e


def ridge_from_data(
    u,
    x_tilde,
    zeta,
    rho_pen: float,
    seed: int | None = None,
    box: tuple | None = None,
) -> RidgeObjectives:
    """Build a ridge instance from explicit features, latent points and noise."""
    if rho_pen <= 0:
        raise ObjectiveError(f"rho_pen must be positive, got {rho_pen}")
    u = np.atleast_2d(np.asarray(u, dtype=float))
    n, r = u.shape
    x_tilde = np.asarray(x_tilde, dtype=float).reshape(n, r)
    zeta = np.asarray(zeta, dtype=float).reshape(n)

    v = np.sum(u * x_tilde, axis=1) + zeta
    x_star = _solve_normal_equations(u, u.T @ v, rho_pen)

    if box is None:
        lo = np.full(r, -RIDGE_BOX_HALFWIDTH)
        hi = np.full(r, RIDGE_BOX_HALFWIDTH)
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in box)

    u_sq = np.sum(u**2, axis=1)
    ell = 2.0 * (float(u_sq.max()) + rho_pen)
    # ||grad f_i(x)|| <= ell ||x|| + 2 |v_i| ||u_i||
    x_max = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))
    c_bound = float(np.max(2.0 * np.sqrt(u_sq) * np.abs(v))) + ell * x_max

    return RidgeObjectives(
        mu=2.0 * rho_pen,
        ell=ell,
        c_bound=c_bound,
        x_star=x_star,
        box_lo=lo,
        box_hi=hi,
        features=u,
        x_tilde=x_tilde,
        zeta=zeta,
        rho_pen=rho_pen,
        seed=seed,
    )


def make_ridge(n: int, r: int, rho_pen: float, seed: int) -> RidgeObjectives:
    """Random ridge instance: u_i ~ U[-1,1]^r, x_tilde_i ~ U[0,10]^r, zeta_i ~ N(0, 25^2)."""
    if n < 1 or r < 1:
        raise ObjectiveError(f"n and r must be positive, got n={n}, r={r}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=(n, r))
    x_tilde = rng.uniform(0.0, 10.0, size=(n, r))
    zeta = rng.normal(0.0, 25.0, size=n)
    return ridge_from_data(u, x_tilde, zeta, rho_pen, seed=seed)


def printed_ridge_optimum(u, x_tilde, rho_pen: float) -> np.ndarray:
    """(sum u_i u_i^T + n rho I)^-1 sum u_i u_i^T x_tilde_i.

    Minimizer of the noise-free ridge problem only.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    x_tilde = np.asarray(x_tilde, dtype=float).reshape(u.shape)
    rhs = u.T @ np.sum(u * x_tilde, axis=1)
    return _solve_normal_equations(u, rhs, rho_pen)


def clip_gradient(g, c_bound: float) -> np.ndarray:
    """Scale g onto the ball of radius c_bound if it lies outside."""
    g = np.asarray(g, dtype=float)
    norm = float(np.linalg.norm(g))
    if norm <= c_bound:
        return g
    return g * (c_bound / norm)


def clip_rows(g: np.ndarray, c_bound: float) -> tuple[np.ndarray, int]:
    """Row-wise clip_gradient. Returns the clipped matrix and the number of rows clipped."""
    norms = np.linalg.norm(g, axis=1)
    over = norms > c_bound
    if not over.any():
        return g, 0
    scale = np.where(over, c_bound / np.where(over, norms, 1.0), 1.0)
    return g * scale[:, None], int(over.sum())


def finite_difference_check(obj: ObjectiveSet, i: int, x, h: float = 1e-5) -> float:
    """Max component deviation between grad(i, x) and a central difference of value(i, .)."""
    if h <= 0:
        raise ObjectiveError(f"finite-difference step must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    fd = np.empty_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = h
        fd[j] = (obj.value(i, x + e) - obj.value(i, x - e)) / (2 * h)
    return float(np.max(np.abs(fd - obj.grad(i, x))))


def objectives_from_dict(data: dict) -> ObjectiveSet:
    """Rebuild an objective set from its ``to_dict`` output."""
    kind = data.get("kind")
    box = data.get("domain_box")
    if kind == "rendezvous":
        return make_rendezvous(data["targets"], box=box)
    if kind == "ridge":
        return ridge_from_data(
            data["features"],
            data["x_tilde"],
            data["zeta"],
            data["rho_pen"],
            seed=data.get("seed"),
            box=box,
        )
    raise ObjectiveError(f"Unknown objective kind: {kind!r}")
