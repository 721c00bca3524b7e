"""Coupling matrix data models."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """A validated coupling matrix W.

    Instances are only produced by ``topology.validate_weights``; the
    stored array is read-only so one matrix can be shared across workers.
    """

    w: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.w, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def off_diagonal(self) -> np.ndarray:
        """W_o: W with its diagonal zeroed."""
        wo = self.w - np.diag(np.diag(self.w))
        wo.setflags(write=False)
        return wo

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.w).copy()

    def to_dict(self) -> dict:
        """Convert to a row-major nested list for JSON/YAML output."""
        return {"matrix": self.w.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "WeightMatrix":
        return cls(w=np.asarray(data["matrix"], dtype=float))


@dataclass(frozen=True)
class SpectralProfile:
    """Spectral quantities of W consumed by the bound formulas."""

    rho_w: float  # rho(W - 11^T/n)
    rho_wo: float  # rho(W_o)
    d_i_sq: float  # ||I - 11^T/n||^2 in the Frobenius sense, = n - 1
    norm_wo_sq: float
    norm_v_sq: float  # ||W_o^T 1||_2^2

    def to_dict(self) -> dict:
        return {
            "rho_w": self.rho_w,
            "rho_wo": self.rho_wo,
            "d_i_sq": self.d_i_sq,
            "norm_wo_sq": self.norm_wo_sq,
            "norm_v_sq": self.norm_v_sq,
        }
