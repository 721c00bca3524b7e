"""Checksums of run output files."""

import hashlib
import json
from pathlib import Path


class ChecksumError(Exception):
    """An output file does not match the checksum recorded in meta.json."""

    pass


def calculate_sha256(file_path: Path) -> str:
    """Calculate SHA256 hash of a file."""
    sha256 = hashlib.sha256()
    with open(file_path, "rb") as f:
        for chunk in iter(lambda: f.read(8192), b""):
            sha256.update(chunk)
    return sha256.hexdigest()


def checksum_files(directory: Path, names: list[str]) -> dict[str, str]:
    return {name: calculate_sha256(directory / name) for name in sorted(names)}


def verify_outputs(directory: Path) -> list[str]:
    """Recompute every checksum listed in ``directory/meta.json``.

    Returns the verified file names. Raises ChecksumError on a missing file
    or a mismatch.
    """
    meta_path = Path(directory) / "meta.json"
    if not meta_path.exists():
        raise ChecksumError(f"No meta.json in {directory}")
    with open(meta_path) as f:
        expected = json.load(f).get("checksums", {})

    for name, expected_hash in expected.items():
        path = Path(directory) / name
        if not path.exists():
            raise ChecksumError(f"{name} is listed in meta.json but missing")
        actual_hash = calculate_sha256(path)
        if actual_hash != expected_hash:
            raise ChecksumError(
                f"Checksum mismatch for {name}:\n"
                f"  Expected: {expected_hash}\n"
                f"  Got:      {actual_hash}"
            )
    return sorted(expected)
