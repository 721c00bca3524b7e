"""Bound system data models."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from dptrack.models.objective import ObjectiveSet
from dptrack.models.run_config import NoiseParams
from dptrack.models.weights import SpectralProfile


@dataclass(frozen=True)
class ProblemConstants:
    """Every scalar the convergence bounds depend on."""

    mu: float
    ell: float
    n: int
    r: int
    rho_w: float
    rho_wo: float
    d_i_sq: float
    norm_wo_sq: float
    norm_v_sq: float
    sigma_eta_sq: float
    sigma_xi_sq: float
    c_star: float  # sum_i ||grad f_i(x*)||^2
    norm_w_minus_i_sq: float | None = None

    def __post_init__(self) -> None:
        if not 0 < self.mu <= self.ell:
            raise ValueError(f"need 0 < mu <= L, got mu={self.mu}, L={self.ell}")
        if not 0 <= self.rho_w < 1:
            raise ValueError(f"rho_w must lie in [0, 1), got {self.rho_w}")

    @property
    def t_w(self) -> float:
        """1 - rho_w^2."""
        return 1.0 - self.rho_w**2

    @property
    def d_i(self) -> float:
        return math.sqrt(self.d_i_sq)

    @classmethod
    def from_parts(
        cls,
        profile: SpectralProfile,
        obj: ObjectiveSet,
        noise: NoiseParams,
        norm_w_minus_i_sq: float | None = None,
    ) -> "ProblemConstants":
        return cls(
            mu=obj.mu,
            ell=obj.ell,
            n=obj.n,
            r=obj.r,
            rho_w=profile.rho_w,
            rho_wo=profile.rho_wo,
            d_i_sq=profile.d_i_sq,
            norm_wo_sq=profile.norm_wo_sq,
            norm_v_sq=profile.norm_v_sq,
            sigma_eta_sq=noise.sigma_eta_sq,
            sigma_xi_sq=noise.sigma_xi_sq,
            c_star=obj.gradient_heterogeneity(),
            norm_w_minus_i_sq=norm_w_minus_i_sq,
        )

    def with_spectra(self, rho_w: float, rho_wo: float) -> "ProblemConstants":
        """Same problem on a network with other spectral radii.

        The W_o norms take their worst case n rho(W_o)^2 and n^2 rho(W_o)^2.
        """
        return replace(
            self,
            rho_w=rho_w,
            rho_wo=rho_wo,
            norm_wo_sq=self.n * rho_wo**2,
            norm_v_sq=self.n**2 * rho_wo**2,
        )

    def with_noise(self, sigma_eta_sq: float, sigma_xi_sq: float) -> "ProblemConstants":
        return replace(self, sigma_eta_sq=sigma_eta_sq, sigma_xi_sq=sigma_xi_sq)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "ell": self.ell,
            "n": self.n,
            "r": self.r,
            "rho_w": self.rho_w,
            "rho_wo": self.rho_wo,
            "d_i_sq": self.d_i_sq,
            "norm_wo_sq": self.norm_wo_sq,
            "norm_v_sq": self.norm_v_sq,
            "sigma_eta_sq": self.sigma_eta_sq,
            "sigma_xi_sq": self.sigma_xi_sq,
            "c_star": self.c_star,
            "norm_w_minus_i_sq": self.norm_w_minus_i_sq,
        }


@dataclass(eq=False)
class BoundSystem:
    """Constant-stepsize bound recursion v_{k+1} <= A v_k + B, v = (U, X, Y)."""

    A: np.ndarray
    B: np.ndarray
    rho_A: float
    theta1: float | None = None
    theta2: float | None = None
    theta: float | None = None

    @property
    def contractive(self) -> bool:
        return self.rho_A < 1

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "rho_A": self.rho_A,
            "theta1": self.theta1,
            "theta2": self.theta2,
            "theta": self.theta,
        }


@dataclass(eq=False)
class BoundTrajectory:
    """Propagated bounds on the three expected errors for k = 0..K."""

    u: np.ndarray  # E||x_bar - x*||^2
    x: np.ndarray  # E||x - 1 x_bar||^2
    y: np.ndarray  # E||y - 1 y_bar||^2

    @property
    def diverged(self) -> bool:
        """Final bound above the initial one and still growing."""
        norms = np.sqrt(self.u**2 + self.x**2 + self.y**2)
        return bool(norms[-1] > norms[0] and norms[-1] > norms[-2])

    def channel(self, name: str) -> np.ndarray:
        return {"opt_err": self.u, "cons_err": self.x, "track_err": self.y}[name]


@dataclass
class Thm1Check:
    """Which decay regime a schedule falls in and whether its stepsize condition holds."""

    case: int
    satisfied: bool
    binding: str | None
    constraints: dict[str, float] = field(default_factory=dict)
    exponents: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "satisfied": self.satisfied,
            "binding": self.binding,
            "constraints": self.constraints,
            "exponents": self.exponents,
            "notes": self.notes,
        }


@dataclass
class SweepRow:
    rho_w: float
    rho_wo: float
    theta: float
    fd_sign_rhow: int
    fd_sign_rhowo: int
    admissible: bool


@dataclass
class SweepTable:
    """Steady-state error over a (rho_w, rho(W_o)) grid."""

    alpha: float
    rho_w_values: list[float]
    rho_wo_values: list[float]
    rows: list[SweepRow]

    def theta_grid(self) -> np.ndarray:
        """theta indexed [rho_w index, rho_wo index]."""
        return np.array([row.theta for row in self.rows]).reshape(len(self.rho_w_values), len(self.rho_wo_values))

    def strictly_increasing(self, axis: str) -> bool:
        """Successive differences of theta are positive along ``rho_w`` or ``rho_wo``."""
        grid = self.theta_grid()
        diffs = np.diff(grid, axis=0 if axis == "rho_w" else 1)
        return bool(np.all(diffs > 0))
