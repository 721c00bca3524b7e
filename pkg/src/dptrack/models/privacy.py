"""Privacy query and report data models."""

from dataclasses import dataclass, field, replace

import numpy as np

from dptrack.core.errors import HypothesisViolated
from dptrack.models.run_config import Schedule


@dataclass(frozen=True)
class PrivacyQuery:
    """Everything the budget formulas need.

    ``horizon=None`` asks for the infinite-horizon budget. The Laplace scales
    may be left unset when the query is only used for calibration.
    """

    schedule: Schedule
    c_grad: float
    r: int
    w_diag: tuple[float, ...]
    horizon: int | None = None
    b_eta: float | None = None
    b_xi: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "w_diag", tuple(float(w) for w in self.w_diag))
        for i, w in enumerate(self.w_diag):
            if not 0 < w < 1:
                raise HypothesisViolated(
                    f"Self-weights must satisfy 0 < w_ii < 1 on a connected network: w[{i},{i}] = {w}"
                )
        if self.horizon is not None and self.horizon < 1:
            raise ValueError(f"horizon must be at least 1, got {self.horizon}")
        if self.c_grad < 0:
            raise ValueError(f"gradient bound must be nonnegative, got {self.c_grad}")

    @property
    def is_infinite(self) -> bool:
        return self.horizon is None

    @property
    def l1_scale(self) -> float:
        """2 sqrt(r) C, the l1 bound on a swapped gradient difference."""
        return 2.0 * np.sqrt(self.r) * self.c_grad

    def with_scales(self, b_eta: float, b_xi: float) -> "PrivacyQuery":
        return replace(self, b_eta=b_eta, b_xi=b_xi)

    def require_scales(self) -> tuple[float, float]:
        if self.b_eta is None or self.b_xi is None or self.b_eta <= 0 or self.b_xi <= 0:
            raise ValueError("Budget evaluation needs positive Laplace scales b_eta and b_xi")
        return self.b_eta, self.b_xi

    def to_dict(self) -> dict:
        return {
            "horizon": "inf" if self.horizon is None else self.horizon,
            "schedule": self.schedule.to_dict(),
            "c_grad": self.c_grad,
            "r": self.r,
            "w_diag": list(self.w_diag),
            "b_eta": self.b_eta,
            "b_xi": self.b_xi,
        }


@dataclass
class AgentBudget:
    agent: int
    s_channel: float
    x_channel: float

    @property
    def epsilon(self) -> float:
        return self.s_channel + self.x_channel

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "epsilon": self.epsilon,
            "s_channel": self.s_channel,
            "x_channel": self.x_channel,
        }


@dataclass
class PrivacyReport:
    """Per-agent budgets and the worst case over agents."""

    agents: list[AgentBudget]
    horizon: int | None
    # Worst agent's contribution at each k = 1..K (finite horizon only)
    s_per_iteration: list[float] = field(default_factory=list)
    x_per_iteration: list[float] = field(default_factory=list)
    tail_start: int | None = None
    m_rounded: bool = False

    @property
    def worst_agent(self) -> int:
        return max(self.agents, key=lambda a: a.epsilon).agent

    @property
    def epsilon(self) -> float:
        return max(a.epsilon for a in self.agents)

    @property
    def epsilons(self) -> list[float]:
        return [a.epsilon for a in self.agents]

    def to_dict(self) -> dict:
        data = {
            "epsilon": self.epsilon,
            "worst_agent": self.worst_agent,
            "horizon": "inf" if self.horizon is None else self.horizon,
            "agents": [a.to_dict() for a in self.agents],
        }
        if self.horizon is None:
            data["tail_start"] = self.tail_start
            data["m_rounded"] = self.m_rounded
        else:
            data["per_iteration"] = {"s_channel": self.s_per_iteration, "x_channel": self.x_per_iteration}
        return data
