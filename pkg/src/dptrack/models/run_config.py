"""Run configuration data models."""

import math
from dataclasses import dataclass, field

import numpy as np

from dptrack.core.errors import ConfigError


@dataclass(frozen=True)
class Schedule:
    """Stepsize and noise-decay schedule.

    gamma_k = gamma/(m+k)^p scales the gradient, beta_k = 1/(m+k)^q the noise.
    """

    alpha: float
    gamma: float
    p: float
    q: float
    m: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ConfigError("schedule.alpha", f"must be positive, got {self.alpha}")
        if not self.gamma > 0:
            raise ConfigError("schedule.gamma", f"must be positive, got {self.gamma}")
        if self.p < 0:
            raise ConfigError("schedule.p", f"must be nonnegative, got {self.p}")
        if self.q < 0:
            raise ConfigError("schedule.q", f"must be nonnegative, got {self.q}")
        if not self.m > 0:
            raise ConfigError("schedule.m", f"must be positive, got {self.m}")

    @property
    def alpha_gamma(self) -> float:
        return self.alpha * self.gamma

    @property
    def is_constant(self) -> bool:
        return self.p == 0 and self.q == 0

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "gamma": self.gamma, "p": self.p, "q": self.q, "m": self.m}

    @classmethod
    def from_dict(cls, data: dict) -> "Schedule":
        values = {}
        for key in ("alpha", "gamma", "p", "q", "m"):
            values[key] = _number(data, key, f"schedule.{key}")
        return cls(**values)


@dataclass(frozen=True)
class NoiseParams:
    """Laplace scales for the tracker (eta) and decision (xi) channels.

    A scale of zero switches the channel off.
    """

    b_eta: float
    b_xi: float
    n: int
    r: int

    def __post_init__(self) -> None:
        if self.b_eta < 0 or self.b_xi < 0:
            raise ConfigError("noise", f"Laplace scales must be nonnegative, got {self.b_eta}, {self.b_xi}")

    @property
    def sigma_eta_sq(self) -> float:
        """Expected ||eta_k||^2 for i.i.d. Lap(b_eta) entries."""
        return 2.0 * self.n * self.r * self.b_eta**2

    @property
    def sigma_xi_sq(self) -> float:
        return 2.0 * self.n * self.r * self.b_xi**2

    @property
    def is_zero(self) -> bool:
        return self.b_eta == 0 and self.b_xi == 0

    @classmethod
    def from_variance(cls, sigma_eta_sq: float, sigma_xi_sq: float, n: int, r: int) -> "NoiseParams":
        """Invert sigma^2 = 2 n r b^2 for each channel."""
        if sigma_eta_sq < 0 or sigma_xi_sq < 0:
            raise ConfigError("noise.variance", "variances must be nonnegative")
        return cls(
            b_eta=math.sqrt(sigma_eta_sq / (2 * n * r)),
            b_xi=math.sqrt(sigma_xi_sq / (2 * n * r)),
            n=n,
            r=r,
        )

    @classmethod
    def zero(cls, n: int, r: int) -> "NoiseParams":
        return cls(b_eta=0.0, b_xi=0.0, n=n, r=r)

    def to_dict(self) -> dict:
        return {
            "b_eta": self.b_eta,
            "b_xi": self.b_xi,
            "sigma_eta_sq": self.sigma_eta_sq,
            "sigma_xi_sq": self.sigma_xi_sq,
        }


PROBLEM_KINDS = ("rendezvous", "ridge")
TOPOLOGY_KINDS = ("ring", "matrix", "averaging", "random")
NOISE_KINDS = ("scale", "variance", "calibrate")
TOP_LEVEL_KEYS = ("problem", "topology", "schedule", "noise", "horizon", "trials", "seed", "clip", "output", "workers", "init")


@dataclass(frozen=True)
class VariantSpec:
    """A single-key mapping such as ``{ring: {r: 0.3, d: 0.5}}``."""

    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {self.kind: self.params}


def _variant(data: dict, section: str, kinds: tuple[str, ...]) -> VariantSpec:
    value = data.get(section)
    if value is None:
        raise ConfigError(section, "missing section")
    if not isinstance(value, dict) or len(value) != 1:
        raise ConfigError(section, f"must be a mapping with exactly one of {', '.join(kinds)}")
    ((kind, params),) = value.items()
    if kind not in kinds:
        raise ConfigError(section, f"unknown variant {kind!r}, expected one of {', '.join(kinds)}")
    return VariantSpec(kind=kind, params=params if params is not None else {})


def _number(data: dict, key: str, field_path: str) -> float:
    if not isinstance(data, dict) or key not in data:
        raise ConfigError(field_path, "required value is missing")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field_path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(field_path, f"must be finite, got {value}")
    return float(value)


def _integer(data: dict, key: str, field_path: str, minimum: int) -> int:
    value = data.get(key) if isinstance(data, dict) else None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field_path, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(field_path, f"must be at least {minimum}, got {value}")
    return value


def _check_problem(spec: VariantSpec) -> None:
    p = spec.params
    if spec.kind == "ridge":
        _integer(p, "n", "problem.ridge.n", 1)
        _integer(p, "r", "problem.ridge.r", 1)
        if _number(p, "rho_pen", "problem.ridge.rho_pen") <= 0:
            raise ConfigError("problem.ridge.rho_pen", "must be positive")
        _integer(p, "seed", "problem.ridge.seed", 0)
    else:
        targets = p.get("targets")
        if not targets:
            raise ConfigError("problem.rendezvous.targets", "at least two targets are required")


def _check_topology(spec: VariantSpec) -> None:
    p = spec.params
    if spec.kind == "ring":
        _number(p, "r", "topology.ring.r")
        _number(p, "d", "topology.ring.d")
    elif spec.kind in ("averaging", "random"):
        _integer(p, "n", f"topology.{spec.kind}.n", 2)
    elif spec.kind == "matrix" and not isinstance(p, list):
        raise ConfigError("topology.matrix", "expected a row-major nested list")


def _check_noise(spec: VariantSpec) -> None:
    p = spec.params
    keys = {
        "scale": ("b_eta", "b_xi"),
        "variance": ("sigma_eta_sq", "sigma_xi_sq"),
        "calibrate": ("eps", "split"),
    }[spec.kind]
    for key in keys:
        if _number(p, key, f"noise.{spec.kind}.{key}") < 0:
            raise ConfigError(f"noise.{spec.kind}.{key}", "must be nonnegative")
    if spec.kind == "calibrate":
        if not 0 < p["split"] < 1:
            raise ConfigError("noise.calibrate.split", "must lie in (0, 1)")
        if not p["eps"] > 0:
            raise ConfigError("noise.calibrate.eps", "must be positive")
        horizon = p.get("horizon")
        if horizon not in (None, "inf"):
            _integer(p, "horizon", "noise.calibrate.horizon", 1)


@dataclass(frozen=True)
class RunConfig:
    """One experiment: problem, topology, schedule, noise and run controls.

    ``problem`` and ``topology`` may be left out when a caller supplies the
    weight matrix and objectives directly.
    """

    schedule: Schedule
    noise: VariantSpec
    horizon: int
    problem: VariantSpec | None = None
    topology: VariantSpec | None = None
    trials: int = 1
    seed: int = 0
    clip: bool = False
    output: str | None = None
    workers: int = 1
    init: dict | None = None

    def resolve_noise(self, n: int, r: int) -> NoiseParams:
        """Laplace scales for explicit parameterizations.

        Calibrated noise depends on the privacy module and is resolved by
        ``experiment.build``.
        """
        p = self.noise.params
        if self.noise.kind == "scale":
            return NoiseParams(b_eta=float(p["b_eta"]), b_xi=float(p["b_xi"]), n=n, r=r)
        if self.noise.kind == "variance":
            return NoiseParams.from_variance(float(p["sigma_eta_sq"]), float(p["sigma_xi_sq"]), n, r)
        raise ConfigError("noise.calibrate", "calibrated noise must be resolved against a privacy query")

    def initial_state(self, n: int, r: int) -> tuple[np.ndarray | None, np.ndarray | None]:
        """Explicit x0 / s0 from the ``init`` section, or None for defaults."""
        if not self.init:
            return None, None
        out = []
        for key in ("x0", "s0"):
            value = self.init.get(key)
            if value is None:
                out.append(None)
                continue
            array = np.asarray(value, dtype=float)
            if array.shape != (n, r):
                raise ConfigError(f"init.{key}", f"expected shape {(n, r)}, got {array.shape}")
            out.append(array)
        return out[0], out[1]

    def to_dict(self) -> dict:
        data = {}
        if self.problem is not None:
            data["problem"] = self.problem.to_dict()
        if self.topology is not None:
            data["topology"] = self.topology.to_dict()
        data.update(
            {
                "schedule": self.schedule.to_dict(),
                "noise": self.noise.to_dict(),
                "horizon": self.horizon,
                "trials": self.trials,
                "seed": self.seed,
                "clip": self.clip,
                "output": self.output,
                "workers": self.workers,
            }
        )
        if self.init:
            data["init"] = self.init
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """Validate and build a run configuration; raises ConfigError naming the field."""
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a mapping")
        for key in data:
            if key not in TOP_LEVEL_KEYS:
                raise ConfigError(str(key), f"unknown key; expected one of {', '.join(TOP_LEVEL_KEYS)}")

        problem = _variant(data, "problem", PROBLEM_KINDS)
        _check_problem(problem)
        topology = _variant(data, "topology", TOPOLOGY_KINDS)
        _check_topology(topology)
        noise = _variant(data, "noise", NOISE_KINDS)
        _check_noise(noise)

        if not isinstance(data.get("schedule"), dict):
            raise ConfigError("schedule", "missing section")
        schedule = Schedule.from_dict(data["schedule"])

        clip = data.get("clip", False)
        if not isinstance(clip, bool):
            raise ConfigError("clip", f"expected true or false, got {clip!r}")
        output = data.get("output")
        if output is not None and not isinstance(output, str):
            raise ConfigError("output", f"expected a path, got {output!r}")
        init = data.get("init")
        if init is not None and not isinstance(init, dict):
            raise ConfigError("init", "expected a mapping with x0 and/or s0")

        return cls(
            schedule=schedule,
            noise=noise,
            horizon=_integer(data, "horizon", "horizon", 1),
            problem=problem,
            topology=topology,
            trials=_integer({"trials": data.get("trials", 1)}, "trials", "trials", 1),
            seed=_integer({"seed": data.get("seed", 0)}, "seed", "seed", 0),
            clip=clip,
            output=output,
            workers=_integer({"workers": data.get("workers", 1)}, "workers", "workers", 1),
            init=init,
        )

