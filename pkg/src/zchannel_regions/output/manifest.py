"""Run manifests: resolved configuration, seeds and output digests."""

from __future__ import annotations

import logging
import os
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from zchannel_regions import __version__
from zchannel_regions.models import RunManifest
from zchannel_regions.output.writers import sha256_file, write_text

logger = logging.getLogger(__name__)


def _relative(output: Path, root: str | Path) -> str:
    return Path(os.path.relpath(output.resolve(), Path(root).resolve())).as_posix()


class ManifestRecorder:
    """Collects the outputs of one subcommand and writes its manifest."""

    def __init__(self, subcommand: str, config: dict[str, Any], seeds: Sequence[int] = ()) -> None:
        self.subcommand = subcommand
        self.config = config
        self.seeds = list(seeds)
        self.outputs: list[Path] = []
        self._started = time.perf_counter()

    def add(self, path: str | Path) -> None:
        self.outputs.append(Path(path))

    def build(self, root: str | Path = ".") -> RunManifest:
        """Manifest whose output names are POSIX paths relative to ``root``."""
        return RunManifest(
            tool_version=__version__,
            subcommand=self.subcommand,
            config=self.config,
            seeds=self.seeds,
            duration_seconds=time.perf_counter() - self._started,
            outputs={_relative(p, root): sha256_file(p) for p in self.outputs},
        )

    def write(self, path: str | Path) -> RunManifest:
        manifest = self.build(Path(path).parent)
        write_text(path, manifest.model_dump_json(indent=2) + "\n")
        logger.info("Manifest %s lists %d outputs", path, len(manifest.outputs))
        return manifest


def load_manifest(path: str | Path) -> RunManifest:
    return RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))


def verify_manifest(path: str | Path) -> list[str]:
    """Names of outputs whose digest no longer matches.

    Names are resolved against the manifest's directory and may point outside it.
    """
    manifest = load_manifest(path)
    root = Path(path).parent
    bad = []
    for name, digest in sorted(manifest.outputs.items()):
        target = root / name
        if not target.exists() or sha256_file(target) != digest:
            bad.append(name)
    return bad
