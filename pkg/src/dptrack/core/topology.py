"""Coupling matrix construction, validation and spectral analysis."""

import logging

import networkx as nx
import numpy as np

from dptrack.models.weights import SpectralProfile, WeightMatrix

logger = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-12
EDGE_TOL = 1e-15


class TopologyError(Exception):
    """Coupling matrix violates the network assumption."""

    pass


class NotSymmetricError(TopologyError):
    """W is not symmetric."""

    pass


class NotDoublyStochasticError(TopologyError):
    """Row or column sums of W differ from one."""

    pass


class NonPositiveDiagonalError(TopologyError):
    """Some self-weight w_ii is not strictly positive."""

    pass


class NegativeEntryError(TopologyError):
    """W has a negative entry."""

    pass


class DisconnectedError(TopologyError):
    """The graph induced by the off-diagonal support is not connected."""

    pass


class OutOfRangeError(TopologyError):
    """Generator parameters outside their admissible range."""

    pass


def support_graph(w: np.ndarray) -> nx.Graph:
    """Undirected graph over agents with an edge wherever w_ij is nonzero (i != j)."""
    n = w.shape[0]
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    rows, cols = np.nonzero(np.abs(w) > EDGE_TOL)
    graph.add_edges_from((int(i), int(j)) for i, j in zip(rows, cols) if i < j)
    return graph


def validate_weights(w, tol: float = STOCHASTIC_TOL) -> WeightMatrix:
    """Validate a coupling matrix against the network assumption.

    W must be nonnegative, symmetric and doubly stochastic with a positive
    diagonal, and its off-diagonal support must form a connected graph.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise TopologyError(f"Weight matrix must be square, got shape {w.shape}")
    n = w.shape[0]
    if n < 2:
        raise TopologyError(f"Need at least 2 agents, got {n}")

    if np.any(w < 0):
        i, j = np.argwhere(w < 0)[0]
        raise NegativeEntryError(
            f"Network assumption requires nonnegative weights: w[{i},{j}] = {w[i, j]}"
        )
    if not np.allclose(w, w.T, rtol=0.0, atol=tol):
        raise NotSymmetricError(
            "Network assumption requires W = W^T: "
            f"max |w_ij - w_ji| = {np.max(np.abs(w - w.T)):.3e}"
        )
    row_err = np.max(np.abs(w.sum(axis=1) - 1.0))
    col_err = np.max(np.abs(w.sum(axis=0) - 1.0))
    if max(row_err, col_err) > tol:
        raise NotDoublyStochasticError(
            "Network assumption requires W1 = 1 and 1^T W = 1^T: "
            f"max row error {row_err:.3e}, max column error {col_err:.3e}"
        )
    diag = np.diag(w)
    if np.any(diag <= 0):
        i = int(np.argmin(diag))
        raise NonPositiveDiagonalError(
            f"Network assumption requires w_ii > 0: w[{i},{i}] = {diag[i]}"
        )

    # Breadth-first reachability over the off-diagonal support
    graph = support_graph(w)
    reached = set(nx.bfs_tree(graph, 0).nodes)
    if len(reached) != n:
        missing = sorted(set(range(n)) - reached)
        raise DisconnectedError(
            f"Network assumption requires a connected graph: agents {missing} "
            "are unreachable from agent 0"
        )

    return WeightMatrix(w=w)


def make_ring_weights(r: float, d: float) -> WeightMatrix:
    """Four agents on a ring with tunable spectra.

    For 0 < r <= 0.5 the off-diagonal spectral radius equals r; see
    ``ring_spectra`` for rho_w.
    """
    if not 0 < r <= 0.5:
        raise OutOfRangeError(f"ring parameter r must lie in (0, 0.5], got {r}")
    if not 0 < d < 1:
        raise OutOfRangeError(f"ring parameter d must lie in (0, 1), got {d}")

    a = 1 - r
    b = r * d
    c = r * (1 - d)
    w = np.array(
        [
            [a, b, 0.0, c],
            [b, a, c, 0.0],
            [0.0, c, a, b],
            [c, 0.0, b, a],
        ]
    )
    return validate_weights(w)


def ring_spectra(r: float, d: float) -> tuple[float, float]:
    """(rho_w, rho(W_o)) of the four-agent ring in closed form.

    W has eigenvalues 1, 1 - 2r, 1 - 2rd and 1 - 2r(1 - d), and W_o has
    +-r and +-r(2d - 1), so rho_w = 1 - 2r min(d, 1 - d) for r <= 0.5.
    """
    return 1.0 - 2.0 * r * min(d, 1.0 - d), r


def ring_for_spectra(rho_w: float, rho_wo: float) -> WeightMatrix:
    """The four-agent ring (with d >= 1/2) realizing the given spectral radii.

    Needs 1 - rho_wo <= rho_w < 1, the range the ring can reach at r = rho_wo.
    """
    if not 0 < rho_wo <= 0.5:
        raise OutOfRangeError(f"rho(W_o) must lie in (0, 0.5] for the ring, got {rho_wo}")
    if not 1 - rho_wo <= rho_w < 1:
        raise OutOfRangeError(
            f"ring with rho(W_o)={rho_wo} reaches rho_w in [{1 - rho_wo:g}, 1), got {rho_w}"
        )
    d = 1.0 - (1.0 - rho_w) / (2.0 * rho_wo)
    return make_ring_weights(rho_wo, min(d, 1.0 - 1e-12))


def averaging_weights(n: int) -> WeightMatrix:
    """W = 11^T/n, exact averaging in one round."""
    return validate_weights(np.full((n, n), 1.0 / n))


def random_weights(n: int, rng: np.random.Generator, edge_prob: float = 0.5) -> WeightMatrix:
    """Metropolis-Hastings weights on a random connected Erdos-Renyi graph."""
    seed = int(rng.integers(0, 2**31 - 1))
    while True:
        graph = nx.erdos_renyi_graph(n, edge_prob, seed=seed)
        if nx.is_connected(graph):
            break
        seed += 1

    degrees = dict(graph.degree())
    w = np.zeros((n, n))
    for i, j in graph.edges():
        weight = 1.0 / (1 + max(degrees[i], degrees[j]))
        w[i, j] = weight
        w[j, i] = weight
    w[np.diag_indices(n)] = 1.0 - w.sum(axis=1)
    return validate_weights(w)


def _symmetric_radius(matrix: np.ndarray) -> float:
    eigenvalues = np.linalg.eigvalsh(matrix)
    return float(np.max(np.abs(eigenvalues)))


def spectral_profile(wm: WeightMatrix) -> SpectralProfile:
    """Compute every spectral quantity the bound formulas use."""
    n = wm.n
    wo = wm.off_diagonal
    centered = wm.w - np.full((n, n), 1.0 / n)
    v = wo.T @ np.ones(n)
    return SpectralProfile(
        rho_w=_symmetric_radius(centered),
        rho_wo=_symmetric_radius(wo),
        d_i_sq=float(n - 1),
        norm_wo_sq=float(np.sum(wo**2)),
        norm_v_sq=float(v @ v),
    )


def norm_w_minus_i_sq(wm: WeightMatrix) -> float:
    """||W - I||^2 under the column-stacked (Frobenius) matrix norm."""
    return float(np.sum((wm.w - np.eye(wm.n)) ** 2))


def power_iteration_radius(
    matrix: np.ndarray, max_iter: int = 20000, tol: float = 1e-13, seed: int = 0
) -> float:
    """Spectral radius of a symmetric matrix by power iteration.

    Only used to cross-check the eigendecomposition. Iterates on M^2 so a
    dominant pair of opposite-sign eigenvalues does not stall convergence.
    """
    matrix = np.asarray(matrix, dtype=float)
    squared = matrix @ matrix
    rng = np.random.default_rng(seed)
    x = rng.normal(size=matrix.shape[0])
    x /= np.linalg.norm(x)

    lam = 0.0
    for _ in range(max_iter):
        y = squared @ x
        y_norm = np.linalg.norm(y)
        if y_norm == 0:
            return 0.0
        lam_new = float(x @ y)
        x = y / y_norm
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(max(lam, 0.0)))
