"""Data models for dptrack."""

from dptrack.models.bounds import BoundSystem, BoundTrajectory, ProblemConstants, SweepTable, Thm1Check
from dptrack.models.objective import ObjectiveSet, RendezvousObjectives, RidgeObjectives
from dptrack.models.privacy import AgentBudget, PrivacyQuery, PrivacyReport
from dptrack.models.run_config import NoiseParams, RunConfig, Schedule, VariantSpec
from dptrack.models.trajectory import AlgoState, MonteCarloResult, RateFit, Trajectory
from dptrack.models.weights import SpectralProfile, WeightMatrix

__all__ = [
    "AgentBudget",
    "AlgoState",
    "BoundSystem",
    "BoundTrajectory",
    "MonteCarloResult",
    "NoiseParams",
    "ObjectiveSet",
    "PrivacyQuery",
    "PrivacyReport",
    "ProblemConstants",
    "RateFit",
    "RendezvousObjectives",
    "RidgeObjectives",
    "RunConfig",
    "Schedule",
    "SpectralProfile",
    "SweepTable",
    "Thm1Check",
    "Trajectory",
    "VariantSpec",
    "WeightMatrix",
]
