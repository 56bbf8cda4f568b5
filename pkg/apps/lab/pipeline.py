"""
Training jobs for the CLI: corpus file → trained model file, optionally
skipped when the ledger already holds an intact model for the same corpus
and config. Independent jobs may run in a process pool; results come back
in submission order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Sequence

from .exceptions import CorpusError, FormatError, LabError
from .ledger import find_artifact, register_artifact, sha256_file
from .streams import open_output, open_text
from .trainer import TrainConfig, read_corpus, train
from .vecstore import Provenance, load_text_model, save_text_model

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainJob:
    config: TrainConfig
    out_path: Path


@dataclass(frozen=True)
class TrainOutcome:
    config: TrainConfig
    path: Path
    vocab_size: int
    total_tokens: int
    reused: bool = False
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def model_filename(config: TrainConfig) -> str:
    return f"{str(config.algorithm).lower()}_w{config.window}_d{config.dim}_s{config.seed}.txt"


def train_to_file(corpus_path: str, config: TrainConfig, out_path: str) -> tuple[int, int]:
    """Runs in a worker process: no ORM access here."""
    try:
        with open_text(corpus_path) as fh:
            sentences = read_corpus(fh, respect_lines=config.respect_lines)
    except FormatError as exc:
        raise CorpusError(f"{corpus_path}: {exc}") from exc
    model = train(sentences, config, corpus_id=Path(corpus_path).name)
    with open_output(out_path) as sink:
        save_text_model(model, sink)
    return len(model), model.provenance.total_tokens or 0


def run_training(
    corpus_path: str | Path,
    jobs: Sequence[TrainJob],
    *,
    max_workers: int = 1,
    reuse: bool = False,
    keep_going: bool = False,
) -> list[TrainOutcome]:
    """
    One outcome per job, in job order. With keep_going a failed job comes back
    as an outcome carrying its error instead of aborting the remaining jobs.
    """
    corpus_path = Path(corpus_path)
    corpus_sha = sha256_file(corpus_path)
    outcomes: dict[int, TrainOutcome] = {}
    pending: list[tuple[int, TrainJob]] = []

    for i, job in enumerate(jobs):
        artifact = find_artifact(corpus_sha, job.config) if reuse else None
        if artifact is not None:
            logger.info("reusing %s for %s w=%d", artifact.path, job.config.algorithm, job.config.window)
            outcomes[i] = TrainOutcome(
                job.config, Path(artifact.path), artifact.vocab_size, artifact.total_tokens, reused=True
            )
        else:
            pending.append((i, job))

    if max_workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = [
                (i, job, pool.submit(train_to_file, str(corpus_path), job.config, str(job.out_path)))
                for i, job in pending
            ]
            results = [(i, job, _collect(f.result, keep_going)) for i, job, f in futures]
    else:
        results = [
            (i, job, _collect(partial(train_to_file, str(corpus_path), job.config, str(job.out_path)), keep_going))
            for i, job in pending
        ]

    for i, job, result in results:
        if isinstance(result, Exception):
            logger.warning("training %s w=%d failed: %s", job.config.algorithm, job.config.window, result)
            outcomes[i] = TrainOutcome(job.config, job.out_path, 0, 0, error=str(result))
            continue
        vocab_size, total_tokens = result
        register_artifact(corpus_sha, job.config, job.out_path, vocab_size=vocab_size, total_tokens=total_tokens)
        outcomes[i] = TrainOutcome(job.config, job.out_path, vocab_size, total_tokens)

    return [outcomes[i] for i in range(len(jobs))]


def _collect(call, keep_going: bool):
    if not keep_going:
        return call()
    try:
        return call()
    except (LabError, OSError) as exc:
        return exc


def load_model_file(path: str | Path, *, algorithm: str = "", window: int | None = None):
    path = Path(path)
    with path.open("rb") as fh:
        return load_text_model(fh, provenance=Provenance(algorithm=algorithm, window=window, corpus=path.name))
