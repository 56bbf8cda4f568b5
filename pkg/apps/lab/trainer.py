"""
Word-level CBOW / SGNS trainer (negative sampling, dynamic window).

Single worker + fixed seed is bitwise reproducible. With workers > 1 the
corpus is sharded over threads that update the shared matrices without
locks (Hogwild style), which is not reproducible.
"""

from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import chain
from typing import Callable, Iterable, Sequence

import numpy as np
from django.core.exceptions import ValidationError
from django.db import models
from scipy.special import expit

from .exceptions import CorpusError, DivergenceError
from .streams import Source, iter_lines
from .vecstore import EmbeddingModel, Provenance

logger = logging.getLogger(__name__)

NEGATIVE_POWER = 0.75
MIN_LR_FRACTION = 1e-4

# (center position, context positions) → None; positions index the encoded sentence
PairHook = Callable[[int, np.ndarray], None]


class Algorithm(models.TextChoices):
    CBOW = "CBOW", "CBOW"
    SGNS = "SGNS", "SGNS"


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = Algorithm.SGNS
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.05
    min_count: int = 500
    subsample_threshold: float = 1e-4
    seed: int = 1
    workers: int = 1
    respect_lines: bool = False

    def clean(self) -> None:
        errors: dict[str, str] = {}
        if self.algorithm not in Algorithm.values:
            errors["algorithm"] = f"algorithm must be one of {', '.join(Algorithm.values)}"
        if self.dim < 1:
            errors["dim"] = "dim must be ≥ 1"
        if self.window < 1:
            errors["window"] = "window must be ≥ 1"
        if self.epochs < 1:
            errors["epochs"] = "epochs must be ≥ 1"
        if not self.learning_rate > 0:
            errors["learning_rate"] = "learning rate must be > 0"
        if self.min_count < 0:
            errors["min_count"] = "min-count must be ≥ 0"
        if self.subsample_threshold < 0:
            errors["subsample_threshold"] = "subsample threshold must be ≥ 0"
        if self.negatives < 0:
            errors["negatives"] = "negatives must be ≥ 0"
        elif self.algorithm == Algorithm.SGNS and self.negatives < 1:
            errors["negatives"] = "SGNS needs negatives ≥ 1"
        if self.workers < 1:
            errors["workers"] = "workers must be ≥ 1"
        if not (0 <= self.seed < 2**63):
            errors["seed"] = "seed must be in [0, 2^63)"
        if errors:
            raise ValidationError(errors)

    def canonical_json(self) -> str:
        """Stable serialization of everything that changes the trained vectors."""
        data = asdict(self)
        data.pop("workers")
        data["algorithm"] = str(self.algorithm)
        return json.dumps(data, sort_keys=True)


class Vocabulary:
    """Frequency-ordered vocabulary with the count^0.75 negative-sampling distribution."""

    def __init__(self, entries: Sequence[tuple[str, int]]):
        self.entries: tuple[tuple[str, int], ...] = tuple(entries)
        self.index: dict[str, int] = {w: i for i, (w, _) in enumerate(self.entries)}
        self.counts = np.array([c for _, c in self.entries], dtype=np.int64)
        self.total_tokens = int(self.counts.sum())

        weights = self.counts.astype(np.float64) ** NEGATIVE_POWER
        self.negative_table = weights / weights.sum()
        self._cumulative = np.cumsum(self.negative_table)
        self._cumulative[-1] = 1.0

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: object) -> bool:
        return word in self.index

    @property
    def words(self) -> list[str]:
        return [w for w, _ in self.entries]

    def count(self, word: str) -> int:
        return self.entries[self.index[word]][1]

    def sample_negatives(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.searchsorted(self._cumulative, rng.random(size), side="right").clip(max=len(self) - 1)

    def keep_probabilities(self, threshold: float) -> np.ndarray:
        """word2vec frequent-word subsampling: P(keep) = (sqrt(f/t) + 1) * t / f, f as a fraction."""
        if threshold <= 0:
            return np.ones(len(self), dtype=np.float64)
        freq = self.counts / self.total_tokens
        keep = (np.sqrt(freq / threshold) + 1.0) * threshold / freq
        return np.minimum(keep, 1.0)


# -------------------------
# Corpus
# -------------------------
_DIGIT_WORDS = {
    "0": " zero ", "1": " one ", "2": " two ", "3": " three ", "4": " four ",
    "5": " five ", "6": " six ", "7": " seven ", "8": " eight ", "9": " nine ",
}
_NON_ALNUM_RE = re.compile(r"[^a-z0-9]+")


def preprocess_text(line: str) -> str:
    """Lowercase, spell out digits, drop every other non-alphanumeric character."""
    text = _NON_ALNUM_RE.sub(" ", line.lower())
    text = "".join(_DIGIT_WORDS.get(ch, ch) for ch in text)
    return " ".join(text.split())


def read_corpus(source: Source, respect_lines: bool = False) -> list[list[str]]:
    """Whitespace-tokenized corpus. One sentence per line, or one big sentence."""
    sentences = [line.split() for line in iter_lines(source)]
    sentences = [s for s in sentences if s]
    if not respect_lines:
        return [list(chain.from_iterable(sentences))] if sentences else []
    return sentences


def build_vocabulary(corpus: Iterable[str], min_count: int) -> Vocabulary:
    counter = Counter(corpus)
    if not counter:
        raise CorpusError("empty corpus")
    kept = [(w, c) for w, c in counter.items() if c >= min_count]
    if not kept:
        raise CorpusError("empty vocabulary")
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    return Vocabulary(kept)


# -------------------------
# Per-example objectives
# -------------------------
def sgns_pair_loss_and_gradient(
    target_vec: np.ndarray, context_vec: np.ndarray, label: int
) -> tuple[float, np.ndarray, np.ndarray]:
    """
    loss = -log σ(t·c) for label 1, -log σ(-t·c) for label 0.
    Returns (loss, dloss/dtarget, dloss/dcontext).
    """
    dot = float(np.dot(target_vec, context_vec))
    sign = 1.0 if label else -1.0
    loss = float(np.logaddexp(0.0, -sign * dot))
    coeff = float(expit(dot)) - float(label)
    return loss, coeff * context_vec, coeff * target_vec


def cbow_example_loss_and_gradient(
    context_vecs: np.ndarray, target_vec: np.ndarray, label: int
) -> tuple[float, np.ndarray, np.ndarray]:
    """
    hidden = mean(context_vecs); loss as sgns on (hidden, target).
    Returns (loss, dloss/dcontext_vecs (C x dim), dloss/dtarget).
    """
    contexts = np.atleast_2d(context_vecs)
    hidden = contexts.mean(axis=0)
    loss, g_hidden, g_target = sgns_pair_loss_and_gradient(hidden, target_vec, label)
    g_contexts = np.tile(g_hidden / contexts.shape[0], (contexts.shape[0], 1))
    return loss, g_contexts, g_target


def _negative_step(
    w_out: np.ndarray,
    hidden: np.ndarray,
    outputs: np.ndarray,
    labels: np.ndarray,
    mask: np.ndarray,
    lr: float,
) -> tuple[float, np.ndarray]:
    """
    One SGD step on Σ sgns losses of (hidden, outputs[i], labels[i]) where mask
    is set. Updates w_out in place; returns (loss, step for hidden).
    """
    vecs = w_out[outputs]
    scores = vecs @ hidden
    coeff = (labels - expit(scores)) * mask          # = -dloss/dscore
    loss = float(np.sum(np.logaddexp(0.0, -(2.0 * labels - 1.0) * scores) * mask))
    step_hidden = lr * (coeff @ vecs)
    np.add.at(w_out, outputs, lr * coeff[:, None] * hidden[None, :])
    return loss, step_hidden


def _sgns_update(
    w_in: np.ndarray, w_out: np.ndarray, center: int, contexts: np.ndarray, negatives: np.ndarray, lr: float
) -> float:
    """negatives has shape (len(contexts), k)."""
    k = negatives.shape[1]
    outputs = np.concatenate([contexts[:, None], negatives], axis=1)
    labels = np.zeros(outputs.shape, dtype=np.float64)
    labels[:, 0] = 1.0
    mask = np.ones(outputs.shape, dtype=np.float64)
    if k:
        # a noise draw equal to the true context is skipped
        mask[:, 1:] = negatives != contexts[:, None]
    hidden = w_in[center].copy()
    loss, step = _negative_step(w_out, hidden, outputs.ravel(), labels.ravel(), mask.ravel(), lr)
    w_in[center] += step
    return loss


def _cbow_update(
    w_in: np.ndarray, w_out: np.ndarray, center: int, contexts: np.ndarray, negatives: np.ndarray, lr: float
) -> float:
    """negatives has shape (k,)."""
    outputs = np.concatenate([[center], negatives]).astype(np.int64)
    labels = np.zeros(outputs.size, dtype=np.float64)
    labels[0] = 1.0
    mask = np.ones(outputs.size, dtype=np.float64)
    mask[1:] = negatives != center
    hidden = w_in[contexts].mean(axis=0)
    loss, step = _negative_step(w_out, hidden, outputs, labels, mask, lr)
    np.add.at(w_in, contexts, step / contexts.size)
    return loss


# -------------------------
# Training loop
# -------------------------
class _Schedule:
    """Linear learning-rate decay to MIN_LR_FRACTION × initial over all epochs."""

    def __init__(self, lr: float, total_work: int):
        self.lr = lr
        self.total = max(1, total_work)

    def at(self, processed: int) -> float:
        progress = min(1.0, processed / self.total)
        return self.lr * (1.0 - progress * (1.0 - MIN_LR_FRACTION))


def _train_shard(
    shard: Sequence[np.ndarray],
    w_in: np.ndarray,
    w_out: np.ndarray,
    vocab: Vocabulary,
    keep_prob: np.ndarray,
    config: TrainConfig,
    schedule: _Schedule,
    rng: np.random.Generator,
    epoch: int,
    offset: int,
    work_scale: int,
    hook: PairHook | None,
) -> tuple[float, int]:
    sgns = config.algorithm == Algorithm.SGNS
    k = config.negatives
    loss_total = 0.0
    processed = 0

    for sentence in shard:
        if config.subsample_threshold > 0:
            sentence = sentence[rng.random(sentence.size) < keep_prob[sentence]]
        n = sentence.size
        spans = rng.integers(1, config.window + 1, size=n)
        for pos in range(n):
            b = int(spans[pos])
            ctx_pos = np.r_[max(0, pos - b):pos, pos + 1:min(n, pos + b + 1)]
            if hook is not None:
                hook(pos, ctx_pos)
            if ctx_pos.size == 0:
                continue
            lr = schedule.at(offset + processed * work_scale)
            center = int(sentence[pos])
            contexts = sentence[ctx_pos]
            if sgns:
                negatives = vocab.sample_negatives(rng, contexts.size * k).reshape(contexts.size, k)
                loss = _sgns_update(w_in, w_out, center, contexts, negatives, lr)
            else:
                negatives = vocab.sample_negatives(rng, k)
                loss = _cbow_update(w_in, w_out, center, contexts, negatives, lr)
            if not math.isfinite(loss):
                raise DivergenceError(epoch, offset + processed * work_scale + pos)
            loss_total += loss
        processed += n
    return loss_total, processed


def _shards(sentences: list[np.ndarray], workers: int) -> list[list[np.ndarray]]:
    if workers <= 1:
        return [sentences]
    if len(sentences) < workers:
        # 한 덩어리 corpus는 연속 구간으로 자른다 (경계에서 window가 끊김)
        pieces = list(chain.from_iterable(np.array_split(s, workers) for s in sentences))
    else:
        pieces = sentences
    return [pieces[i::workers] for i in range(workers)]


def train(
    corpus: Sequence[Sequence[str]],
    config: TrainConfig,
    *,
    hook: PairHook | None = None,
    corpus_id: str = "",
) -> EmbeddingModel:
    """
    Train over `corpus` (a list of sentences; see read_corpus). Input-side
    vectors, unit-normalized, are the returned model.
    """
    config.clean()
    vocab = build_vocabulary(chain.from_iterable(corpus), config.min_count)
    encoded = [
        np.array([vocab.index[t] for t in sentence if t in vocab.index], dtype=np.int64)
        for sentence in corpus
    ]
    if not config.respect_lines and len(encoded) > 1:
        encoded = [np.concatenate(encoded)]
    encoded = [s for s in encoded if s.size]

    rng = np.random.default_rng(config.seed)
    V, d = len(vocab), config.dim
    w_in = (rng.random((V, d)) - 0.5) / d
    w_out = np.zeros((V, d), dtype=np.float64)

    corpus_tokens = sum(s.size for s in encoded)
    schedule = _Schedule(config.learning_rate, corpus_tokens * config.epochs)
    keep_prob = vocab.keep_probabilities(config.subsample_threshold)
    shards = _shards(encoded, config.workers)
    logger.info(
        "training %s dim=%d window=%d: vocab=%d tokens=%d", config.algorithm, d, config.window, V, corpus_tokens
    )

    for epoch in range(1, config.epochs + 1):
        offset = (epoch - 1) * corpus_tokens
        if len(shards) == 1:
            loss, processed = _train_shard(
                shards[0], w_in, w_out, vocab, keep_prob, config, schedule, rng, epoch, offset, 1, hook
            )
        else:
            seeds = np.random.SeedSequence([config.seed, epoch]).spawn(len(shards))
            with ThreadPoolExecutor(max_workers=len(shards)) as pool:
                futures = [
                    pool.submit(
                        _train_shard, shard, w_in, w_out, vocab, keep_prob, config, schedule,
                        np.random.default_rng(seq), epoch, offset, len(shards), hook,
                    )
                    for shard, seq in zip(shards, seeds)
                ]
                results = [f.result() for f in futures]
            loss = sum(r[0] for r in results)
            processed = sum(r[1] for r in results)
        logger.info("epoch %d/%d: loss=%.4f tokens=%d", epoch, config.epochs, loss, processed)

    provenance = Provenance(
        algorithm=str(config.algorithm),
        window=config.window,
        corpus=corpus_id,
        dim=d,
        total_tokens=vocab.total_tokens,
    )
    return EmbeddingModel(vocab.words, w_in, provenance=provenance)
