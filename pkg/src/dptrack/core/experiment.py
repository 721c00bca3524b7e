"""Build weights, objectives and noise from a run configuration."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from dptrack.core import objectives, topology
from dptrack.core.errors import ConfigError
from dptrack.core.privacy import calibrate_noise
from dptrack.models.bounds import ProblemConstants
from dptrack.models.objective import ObjectiveSet
from dptrack.models.privacy import PrivacyQuery
from dptrack.models.run_config import NoiseParams, RunConfig, VariantSpec
from dptrack.models.weights import SpectralProfile, WeightMatrix

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Experiment:
    """A run configuration with every derived object resolved."""

    config: RunConfig
    weights: WeightMatrix
    objectives: ObjectiveSet
    noise: NoiseParams
    profile: SpectralProfile

    @property
    def calibrated(self) -> bool:
        return self.config.noise.kind == "calibrate"

    def privacy_query(self, horizon: int | None = None, with_scales: bool = True) -> PrivacyQuery:
        query = PrivacyQuery(
            schedule=self.config.schedule,
            c_grad=self.objectives.c_bound,
            r=self.objectives.r,
            w_diag=tuple(self.weights.diagonal),
            horizon=horizon,
        )
        if with_scales:
            query = query.with_scales(self.noise.b_eta, self.noise.b_xi)
        return query

    def constants(self) -> ProblemConstants:
        return ProblemConstants.from_parts(
            self.profile,
            self.objectives,
            self.noise,
            norm_w_minus_i_sq=topology.norm_w_minus_i_sq(self.weights),
        )


def build_topology(spec: VariantSpec, seed: int = 0) -> WeightMatrix:
    p = spec.params
    try:
        if spec.kind == "ring":
            return topology.make_ring_weights(float(p["r"]), float(p["d"]))
        if spec.kind == "averaging":
            return topology.averaging_weights(int(p["n"]))
        if spec.kind == "random":
            rng = np.random.default_rng(p.get("seed", seed))
            return topology.random_weights(int(p["n"]), rng, float(p.get("edge_prob", 0.5)))
        return topology.validate_weights(np.asarray(p, dtype=float))
    except topology.TopologyError as e:
        raise ConfigError(f"topology.{spec.kind}", str(e)) from e
    except ValueError as e:
        raise ConfigError(f"topology.{spec.kind}", f"not a numeric matrix: {e}") from e


def build_objectives(spec: VariantSpec) -> ObjectiveSet:
    p = spec.params
    try:
        if spec.kind == "ridge":
            return objectives.make_ridge(int(p["n"]), int(p["r"]), float(p["rho_pen"]), int(p["seed"]))
        return objectives.make_rendezvous(p["targets"], box=p.get("domain_box"))
    except objectives.ObjectiveError as e:
        raise ConfigError(f"problem.{spec.kind}", str(e)) from e


def _calibration_horizon(config: RunConfig) -> int | None:
    horizon = config.noise.params.get("horizon")
    if horizon == "inf":
        return None
    return config.horizon if horizon is None else int(horizon)


def build(config: RunConfig) -> Experiment:
    """Resolve topology, objectives and Laplace scales.

    Calibrated noise is solved against the worst-case agent's budget for
    the configured horizon.
    """
    if config.problem is None or config.topology is None:
        raise ConfigError("config", "problem and topology sections are required")
    wm = build_topology(config.topology, seed=config.seed)
    obj = build_objectives(config.problem)
    if wm.n != obj.n:
        raise ConfigError("topology", f"topology has {wm.n} agents but the problem has {obj.n}")

    profile = topology.spectral_profile(wm)
    if config.noise.kind == "calibrate":
        p = config.noise.params
        exp = Experiment(config, wm, obj, NoiseParams.zero(obj.n, obj.r), profile)
        query = exp.privacy_query(horizon=_calibration_horizon(config), with_scales=False)
        b_eta, b_xi = calibrate_noise(float(p["eps"]), float(p["split"]), query)
        if not config.clip:
            logger.warning("Calibrated noise assumes ||grad f_i|| <= C; enable clip to enforce it")
        exp.noise = NoiseParams(b_eta=b_eta, b_xi=b_xi, n=obj.n, r=obj.r)
        return exp

    return Experiment(config, wm, obj, config.resolve_noise(obj.n, obj.r), profile)


def load_config_data(path: Path) -> dict:
    """Raw configuration mapping; a meta.json yields its ``config`` echo."""
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError("config", f"{path} is not valid YAML: {e}") from e
    if isinstance(data, dict) and "problem" not in data and isinstance(data.get("config"), dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a mapping")
    return data


def apply_overrides(data: dict, **overrides) -> dict:
    """Copy of ``data`` with command-line values replacing config entries.

    ``ring_r``/``ring_d`` replace the topology with a ring; other keys are
    top-level fields. None means "not given".
    """
    data = dict(data)
    ring_r = overrides.pop("ring_r", None)
    ring_d = overrides.pop("ring_d", None)
    if ring_r is not None or ring_d is not None:
        current = data.get("topology", {}).get("ring", {}) if isinstance(data.get("topology"), dict) else {}
        ring = {"r": ring_r if ring_r is not None else current.get("r"), "d": ring_d if ring_d is not None else current.get("d")}
        data["topology"] = {"ring": ring}
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    return data


def load_run_config(path: Path, **overrides) -> RunConfig:
    return RunConfig.from_dict(apply_overrides(load_config_data(path), **overrides))
