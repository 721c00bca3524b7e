"""Builders shared by the dptrack tests."""

from dptrack.models.run_config import RunConfig, Schedule, VariantSpec

SQUARE_TARGETS = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]


def make_config(
    alpha: float = 0.05,
    gamma: float = 1.0,
    p: float = 0.0,
    q: float = 0.0,
    m: float = 1.0,
    horizon: int = 100,
    noise: VariantSpec | None = None,
    **kwargs,
) -> RunConfig:
    """A RunConfig for driving the engine directly with a weight matrix and objectives."""
    if noise is None:
        noise = VariantSpec("scale", {"b_eta": 0.0, "b_xi": 0.0})
    return RunConfig(
        schedule=Schedule(alpha=alpha, gamma=gamma, p=p, q=q, m=m),
        noise=noise,
        horizon=horizon,
        **kwargs,
    )


def variance_noise(sigma_sq: float) -> VariantSpec:
    return VariantSpec("variance", {"sigma_eta_sq": sigma_sq, "sigma_xi_sq": sigma_sq})
