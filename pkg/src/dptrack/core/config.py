"""Application paths for dptrack."""

import os
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path


@dataclass
class DptrackConfig:
    """Where run outputs go when a configuration does not name a directory."""

    base_dir: Path

    @classmethod
    def default(cls) -> "DptrackConfig":
        """Create config from DPTRACK_HOME, falling back to ./runs."""
        return cls(base_dir=Path(os.environ.get("DPTRACK_HOME", "runs")))

    def run_dir(self, label: str) -> Path:
        """A fresh timestamped directory name under the base directory."""
        stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
        return self.base_dir / f"{label}-{stamp}"


# Global config instance
_config: DptrackConfig | None = None


def get_config() -> DptrackConfig:
    """Get the global configuration instance."""
    global _config
    if _config is None:
        _config = DptrackConfig.default()
    return _config


def set_config(config: DptrackConfig | None) -> None:
    """Set a custom configuration (useful for testing)."""
    global _config
    _config = config
