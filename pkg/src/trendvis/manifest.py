"""Reproducibility record written next to every command's outputs."""

from __future__ import annotations

import hashlib
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

MANIFEST = "manifest.json"


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def run_timestamp() -> str:
    """UTC now, or ``SOURCE_DATE_EPOCH`` when set (for byte-identical reruns)."""
    sde = os.environ.get("SOURCE_DATE_EPOCH")
    now = datetime.fromtimestamp(int(sde), timezone.utc) if sde else datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class RunManifest:
    command: str
    parameters: dict
    inputs: list[dict] = field(default_factory=list)
    outputs: list[dict] = field(default_factory=list)
    timestamp: str = field(default_factory=run_timestamp)
    tool_version: str = ""
    backend: str = ""

    def add_input(self, path: str | os.PathLike) -> None:
        self.inputs.append({"path": os.fspath(path), "sha256": sha256_file(path)})

    def add_output(self, path: str | os.PathLike, base: str | os.PathLike | None = None) -> None:
        shown = os.path.relpath(path, base) if base is not None else os.fspath(path)
        self.outputs.append({"path": shown, "sha256": sha256_file(path)})

    def to_dict(self) -> dict:
        return asdict(self)


def verify(manifest: dict, base: str | os.PathLike) -> list[str]:
    """Paths whose current digest no longer matches the manifest."""
    bad = []
    for entry in manifest.get("inputs", []):
        if not Path(entry["path"]).exists() or sha256_file(entry["path"]) != entry["sha256"]:
            bad.append(entry["path"])
    for entry in manifest.get("outputs", []):
        p = Path(base) / entry["path"]
        if not p.exists() or sha256_file(p) != entry["sha256"]:
            bad.append(entry["path"])
    return bad
