"""Run manifests: the audit record written alongside every CLI output.

A manifest captures everything that determines the output bytes (inputs
with their digests, semantic parameters, seeds) plus digests of what was
written. It deliberately excludes wall-clock time and performance-only
knobs such as the thread count, so re-running the same command reproduces
the manifest byte for byte as well.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


def sha256_bytes(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    version: str
    subcommand: str
    seed: int | None = None
    config_sha256: str | None = None
    inputs: dict[str, dict[str, str]] = field(default_factory=dict)
    params: dict[str, object] = field(default_factory=dict)
    outputs: dict[str, dict[str, str]] = field(default_factory=dict)

    def add_input(self, name: str, path: str) -> None:
        self.inputs[name] = {"path": path, "sha256": sha256_file(path)}

    def add_output(self, name: str, path: str) -> None:
        self.outputs[name] = {"path": path, "sha256": sha256_file(path)}

    def to_json(self) -> str:
        payload = {
            "version": self.version,
            "subcommand": self.subcommand,
            "seed": self.seed,
            "config_sha256": self.config_sha256,
            "inputs": self.inputs,
            "params": self.params,
            "outputs": self.outputs,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(self.to_json())
