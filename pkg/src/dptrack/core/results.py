"""Run output directories: trajectories, JSON reports and metadata."""

import json
import logging
import shutil
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from dptrack import __version__
from dptrack.core.checksum import checksum_files
from dptrack.models.trajectory import Trajectory

logger = logging.getLogger(__name__)

META_VERSION = 1


class ResultsError(Exception):
    """Output directory cannot be written."""

    pass


class OutputDirectory:
    """Collects output files in a staging directory and publishes them at once.

    Use as a context manager: files appear at ``path`` only if the block
    completes, so a failed run leaves no partial output.
    """

    def __init__(self, path: Path, overwrite: bool = False):
        self.path = Path(path)
        self.overwrite = overwrite
        self._staging: Path | None = None
        self._files: list[str] = []

    def __enter__(self) -> "OutputDirectory":
        if self.path.exists() and not self.overwrite:
            if not self.path.is_dir() or any(self.path.iterdir()):
                raise ResultsError(f"{self.path} already exists; use --overwrite to replace it")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._staging = Path(tempfile.mkdtemp(prefix=f".{self.path.name}-", dir=self.path.parent))
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        staging, self._staging = self._staging, None
        if exc_type is not None:
            shutil.rmtree(staging, ignore_errors=True)
            return False
        if self.path.exists():
            shutil.rmtree(self.path)
        staging.replace(self.path)
        logger.debug("Published %d files to %s", len(self._files), self.path)
        return False

    @property
    def staging(self) -> Path:
        if self._staging is None:
            raise ResultsError("OutputDirectory must be used as a context manager")
        return self._staging

    @property
    def files(self) -> list[str]:
        return list(self._files)

    def write_trajectory(self, name: str, trajectory: Trajectory) -> None:
        trajectory.to_csv(self.staging / name)
        self._files.append(name)

    def write_text(self, name: str, text: str) -> None:
        (self.staging / name).write_text(text)
        self._files.append(name)

    def write_json(self, name: str, data: dict) -> None:
        self.write_text(name, json.dumps(data, indent=2) + "\n")

    def write_meta(self, config: dict, **extra) -> None:
        """meta.json: config echo, version, checksums of every file written so far."""
        data = {
            "version": META_VERSION,
            "dptrack_version": __version__,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "config": config,
            **extra,
            "checksums": checksum_files(self.staging, self._files),
        }
        self.write_json("meta.json", data)


def read_meta(directory: Path) -> dict | None:
    """meta.json of an output directory, or None if absent."""
    path = Path(directory) / "meta.json"
    if not path.exists():
        return None
    with open(path) as f:
        return json.load(f)
