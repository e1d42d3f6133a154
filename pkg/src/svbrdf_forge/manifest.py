"""Run manifests: one fixed-name JSON record per output directory.

Every pipeline command drops a ``run_manifest.json`` next to its outputs
recording what ran, the seed, a hash of the active configuration, and the
files read and written, so a results directory stays self-describing.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional

from .fileio import atomic_write_text

MANIFEST_NAME = "run_manifest.json"
MANIFEST_VERSION = 1


def config_digest(text: str) -> str:
    """Stable hex digest of a configuration serialization."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    command: str
    seed: Optional[int] = None
    config_hash: Optional[str] = None
    software_version: Optional[str] = None
    falloff: Optional[bool] = None
    encoding: Optional[Dict[str, int]] = None
    inputs: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    extra: Dict[str, object] = field(default_factory=dict)
    created: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )

    def to_json(self) -> str:
        data = {"version": MANIFEST_VERSION}
        data.update(
            {name: getattr(self, name) for name in self.__dataclass_fields__}
        )
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("manifest must be a JSON object")
        version = data.pop("version", None)
        if version != MANIFEST_VERSION:
            raise ValueError(f"unsupported manifest version: {version!r}")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown manifest fields: {unknown}")
        return cls(**data)


def manifest_path(directory) -> str:
    return os.path.join(os.fspath(directory), MANIFEST_NAME)


def write_run_manifest(directory, manifest: RunManifest) -> str:
    """Write the directory's manifest atomically; returns its path."""
    path = manifest_path(directory)
    atomic_write_text(path, manifest.to_json() + "\n")
    return path


def read_run_manifest(directory) -> RunManifest:
    with open(manifest_path(directory), "r", encoding="utf-8") as handle:
        return RunManifest.from_json(handle.read())
