"""Per-agent objective data models."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ObjectiveSet(ABC):
    """n local objectives f_i on R^r with their analysis constants."""

    mu: float
    ell: float
    c_bound: float
    x_star: np.ndarray
    box_lo: np.ndarray
    box_hi: np.ndarray

    def __post_init__(self) -> None:
        for name in ("x_star", "box_lo", "box_hi"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    @abstractmethod
    def n(self) -> int: ...

    @property
    def r(self) -> int:
        return self.x_star.shape[0]

    @property
    def domain_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.box_lo, self.box_hi

    @abstractmethod
    def grad(self, i: int, x: np.ndarray) -> np.ndarray:
        """Gradient of f_i at x."""

    @abstractmethod
    def value(self, i: int, x: np.ndarray) -> float: ...

    def grad_all(self, x: np.ndarray) -> np.ndarray:
        """Stacked gradients: row i is grad f_i(x_i) for an n x r matrix x."""
        return np.vstack([self.grad(i, x[i]) for i in range(self.n)])

    def global_value(self, x: np.ndarray) -> float:
        """(1/n) sum_i f_i(x)."""
        return float(np.mean([self.value(i, x) for i in range(self.n)]))

    def global_grad(self, x: np.ndarray) -> np.ndarray:
        return self.grad_all(np.tile(x, (self.n, 1))).mean(axis=0)

    def gradient_heterogeneity(self) -> float:
        """sum_i ||grad f_i(x*)||^2."""
        g = self.grad_all(np.tile(self.x_star, (self.n, 1)))
        return float(np.sum(g**2))

    def _common_dict(self) -> dict:
        return {
            "mu": self.mu,
            "ell": self.ell,
            "c_bound": self.c_bound,
            "x_star": self.x_star.tolist(),
            "domain_box": [self.box_lo.tolist(), self.box_hi.tolist()],
        }

    @abstractmethod
    def to_dict(self) -> dict: ...


@dataclass(frozen=True, eq=False)
class RendezvousObjectives(ObjectiveSet):
    """f_i(x) = ||x - a_i||^2 with private per-agent targets a_i."""

    targets: np.ndarray = None

    kind = "rendezvous"

    def __post_init__(self) -> None:
        super().__post_init__()
        object.__setattr__(self, "targets", _frozen(self.targets))

    @property
    def n(self) -> int:
        return self.targets.shape[0]

    def grad(self, i: int, x: np.ndarray) -> np.ndarray:
        return 2.0 * (np.asarray(x, dtype=float) - self.targets[i])

    def value(self, i: int, x: np.ndarray) -> float:
        diff = np.asarray(x, dtype=float) - self.targets[i]
        return float(diff @ diff)

    def grad_all(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * (x - self.targets)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "targets": self.targets.tolist(), **self._common_dict()}


@dataclass(frozen=True, eq=False)
class RidgeObjectives(ObjectiveSet):
    """f_i(x) = (u_i^T x - v_i)^2 + rho_pen ||x||^2."""

    features: np.ndarray = None  # u_i as rows, n x r
    x_tilde: np.ndarray = None
    zeta: np.ndarray = None
    rho_pen: float = 0.0
    seed: int | None = None

    kind = "ridge"

    def __post_init__(self) -> None:
        super().__post_init__()
        for name in ("features", "x_tilde", "zeta"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @cached_property
    def responses(self) -> np.ndarray:
        """v_i = u_i^T x_tilde_i + zeta_i."""
        return np.sum(self.features * self.x_tilde, axis=1) + self.zeta

    def grad(self, i: int, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = self.features[i]
        residual = u @ x - self.responses[i]
        return 2.0 * residual * u + 2.0 * self.rho_pen * x

    def value(self, i: int, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        residual = self.features[i] @ x - self.responses[i]
        return float(residual**2 + self.rho_pen * (x @ x))

    def grad_all(self, x: np.ndarray) -> np.ndarray:
        residual = np.sum(self.features * x, axis=1) - self.responses
        return 2.0 * residual[:, None] * self.features + 2.0 * self.rho_pen * x

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "features": self.features.tolist(),
            "x_tilde": self.x_tilde.tolist(),
            "zeta": self.zeta.tolist(),
            "rho_pen": self.rho_pen,
            "seed": self.seed,
            **self._common_dict(),
        }
