"""Algorithm state and error trajectory data models."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

CSV_COLUMNS = ("k", "opt_err", "cons_err", "track_err", "gamma_k", "beta_k")
ERROR_CHANNELS = ("opt_err", "cons_err", "track_err")


@dataclass(eq=False)
class AlgoState:
    """Per-agent decisions x and trackers s at iteration k (both n x r)."""

    x: np.ndarray
    s: np.ndarray
    s_prev: np.ndarray | None = None
    k: int = 0

    @property
    def y(self) -> np.ndarray:
        """y_{k-1} = s_k - s_{k-1}."""
        if self.s_prev is None:
            raise ValueError("No previous tracker state at k = 0")
        return self.s - self.s_prev

    @property
    def x_bar(self) -> np.ndarray:
        return self.x.mean(axis=0)


@dataclass(eq=False)
class Trajectory:
    """Error sequences of one run (or a Monte Carlo mean), indexed k = 0..K."""

    k: np.ndarray
    opt_err: np.ndarray
    cons_err: np.ndarray
    track_err: np.ndarray
    gamma_k: np.ndarray
    beta_k: np.ndarray
    x_bar: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.k)

    @property
    def horizon(self) -> int:
        return int(self.k[-1])

    def channel(self, name: str) -> np.ndarray:
        if name not in ERROR_CHANNELS:
            raise KeyError(f"Unknown error channel {name!r}")
        return getattr(self, name)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({col: getattr(self, col) for col in CSV_COLUMNS})
        frame["k"] = frame["k"].astype(int)
        return frame

    def to_csv(self, path: Path) -> None:
        """Write k, errors and schedule values at 17 significant digits."""
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")

    @classmethod
    def from_csv(cls, path: Path) -> "Trajectory":
        try:
            frame = pd.read_csv(path, float_precision="round_trip")
        except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
            raise ValueError(f"{path} is not a trajectory CSV: {e}") from e
        missing = set(CSV_COLUMNS) - set(frame.columns)
        if missing:
            raise ValueError(f"{path} is missing columns: {', '.join(sorted(missing))}")
        columns = {col: frame[col].to_numpy(dtype=float) for col in CSV_COLUMNS}
        columns["k"] = frame["k"].to_numpy(dtype=int)
        return cls(**columns)

    @classmethod
    def mean(cls, trajectories: list["Trajectory"]) -> "Trajectory":
        """Element-wise mean over trials sharing the same schedule."""
        first = trajectories[0]
        x_bar = None
        if all(t.x_bar is not None for t in trajectories):
            x_bar = np.mean([t.x_bar for t in trajectories], axis=0)
        return cls(
            k=first.k.copy(),
            opt_err=np.mean([t.opt_err for t in trajectories], axis=0),
            cons_err=np.mean([t.cons_err for t in trajectories], axis=0),
            track_err=np.mean([t.track_err for t in trajectories], axis=0),
            gamma_k=first.gamma_k.copy(),
            beta_k=first.beta_k.copy(),
            x_bar=x_bar,
        )


@dataclass(eq=False)
class MonteCarloResult:
    """Per-trial trajectories in trial order and their element-wise mean."""

    mean: Trajectory
    trials: list[Trajectory]

    def std_error(self, channel: str) -> np.ndarray:
        """Standard error of the mean of one error channel, per iteration."""
        if len(self.trials) < 2:
            return np.zeros(len(self.mean))
        values = np.array([t.channel(channel) for t in self.trials])
        return values.std(axis=0, ddof=1) / np.sqrt(len(self.trials))

    def plateau(self, channel: str, fraction: float = 0.2) -> tuple[float, float]:
        """Mean of the last ``fraction`` of iterations, with its standard error over trials."""
        start = int(len(self.mean) * (1 - fraction))
        per_trial = np.array([t.channel(channel)[start:].mean() for t in self.trials])
        if len(per_trial) < 2:
            return float(per_trial.mean()), 0.0
        return float(per_trial.mean()), float(per_trial.std(ddof=1) / np.sqrt(len(per_trial)))


@dataclass
class RateFit:
    """Least-squares slope of log(error) against log(m+k) or k."""

    channel: str
    slope: float
    stderr: float
    r_squared: float
    samples: int

    def to_dict(self) -> dict:
        return {
            "channel": self.channel,
            "slope": self.slope,
            "stderr": self.stderr,
            "r_squared": self.r_squared,
            "samples": self.samples,
        }
