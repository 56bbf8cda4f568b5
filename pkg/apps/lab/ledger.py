"""
Run ledger + trained-model reuse.

Same idea as a seed sha256 guard: a model file is registered under a key
derived from the corpus hash and the training config, and reused only while
the file on disk still has the recorded hash.
"""

from __future__ import annotations

import hashlib
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Mapping

from django.db import DatabaseError
from django.utils import timezone

from .trainer import TrainConfig

logger = logging.getLogger(__name__)


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(1024 * 1024), b""):
            h.update(chunk)
    return h.hexdigest()


def config_key(corpus_sha256: str, config: TrainConfig) -> str:
    return hashlib.sha256(f"{corpus_sha256}\n{config.canonical_json()}".encode("utf-8")).hexdigest()


class RunHandle:
    """What a command sees while its run is open. `run` is None when the ledger is unavailable."""

    def __init__(self, run):
        self.run = run
        self.outputs: list[str] = []

    def add_output(self, path: str | Path) -> None:
        self.outputs.append(str(path))


@contextmanager
def record_run(command: str, options: Mapping[str, Any]) -> Iterator[RunHandle]:
    """
    ExperimentRun row for the duration of a command: RUNNING → OK / FAILED.
    A database problem never fails the experiment itself; it degrades to a warning.
    """
    from .models import ExperimentRun

    seed = options.get("seed")
    try:
        run = ExperimentRun.objects.create(
            command=command,
            options=dict(options),
            seed=seed if isinstance(seed, int) else None,
        )
    except DatabaseError as exc:
        logger.warning("run ledger unavailable (%s); continuing without it", exc)
        run = None

    handle = RunHandle(run)
    try:
        yield handle
    except BaseException as exc:
        _finish(handle, ExperimentRun.Status.FAILED, str(exc))
        raise
    else:
        _finish(handle, ExperimentRun.Status.OK, "")


def _finish(handle: RunHandle, status: str, message: str) -> None:
    if handle.run is None:
        return
    run = handle.run
    run.status = status
    run.message = message[:2000]
    run.outputs = handle.outputs
    run.finished_at = timezone.now()
    try:
        run.save(update_fields=["status", "message", "outputs", "finished_at"])
    except DatabaseError as exc:
        logger.warning("could not close run #%s: %s", run.pk, exc)


def find_artifact(corpus_sha256: str, config: TrainConfig):
    """Registered artifact for this corpus + config whose file is intact, else None."""
    from .models import ModelArtifact

    try:
        artifact = ModelArtifact.objects.filter(config_key=config_key(corpus_sha256, config)).first()
    except DatabaseError as exc:
        logger.warning("artifact lookup failed: %s", exc)
        return None
    if artifact is None:
        return None

    path = Path(artifact.path)
    if not path.is_file():
        logger.info("artifact %s: file %s is gone", artifact.config_key[:8], path)
        return None
    if sha256_file(path) != artifact.file_sha256:
        logger.warning("artifact %s: %s changed since it was registered", artifact.config_key[:8], path)
        return None
    return artifact


def register_artifact(
    corpus_sha256: str,
    config: TrainConfig,
    path: str | Path,
    *,
    vocab_size: int,
    total_tokens: int,
):
    from .models import ModelArtifact

    path = Path(path).resolve()
    try:
        artifact, _ = ModelArtifact.objects.update_or_create(
            config_key=config_key(corpus_sha256, config),
            defaults={
                "corpus_sha256": corpus_sha256,
                "algorithm": str(config.algorithm),
                "window": config.window,
                "dim": config.dim,
                "seed": config.seed,
                "config": {k: v for k, v in vars(config).items() if k != "workers"},
                "path": str(path),
                "file_sha256": sha256_file(path),
                "vocab_size": vocab_size,
                "total_tokens": total_tokens,
            },
        )
    except DatabaseError as exc:
        logger.warning("could not register artifact %s: %s", path, exc)
        return None
    return artifact
