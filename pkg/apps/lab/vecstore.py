"""
Embedding model container + exact cosine queries.

Rows are stored unit-normalized, so cosine similarity is a plain dot
product and k-nearest-neighbor search is a single matrix-vector product
over the whole vocabulary (no approximate index).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, AbstractSet, Iterable, NamedTuple, Sequence

import numpy as np

from .exceptions import FormatError, LabError, OOVError
from .streams import Source, iter_lines

logger = logging.getLogger(__name__)

REAL = np.float64
NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Provenance:
    algorithm: str = ""
    window: int | None = None
    corpus: str = ""
    dim: int | None = None
    total_tokens: int | None = None


@dataclass(frozen=True)
class LoadReport:
    duplicates: int = 0
    zero_vectors: int = 0
    skipped_words: tuple[str, ...] = field(default_factory=tuple)


class EmbeddingModel:
    """Immutable vocabulary + unit-normalized V x dim matrix."""

    def __init__(
        self,
        words: Sequence[str],
        vectors: np.ndarray,
        *,
        provenance: Provenance | None = None,
        load_report: LoadReport | None = None,
    ):
        matrix = np.array(vectors, dtype=REAL, copy=True)
        if matrix.ndim != 2:
            raise LabError(f"vectors must be a 2-d matrix (got shape {matrix.shape})")
        if matrix.shape[0] != len(words):
            raise LabError(f"vocabulary size {len(words)} != matrix rows {matrix.shape[0]}")
        if matrix.shape[0] == 0:
            raise LabError("empty model")
        if not np.all(np.isfinite(matrix)):
            raise LabError("model contains non-finite values")

        norms = np.linalg.norm(matrix, axis=1)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise LabError(f"zero vector for word {words[int(zero[0])]!r}")

        self.words: tuple[str, ...] = tuple(words)
        self.index: dict[str, int] = {}
        for i, w in enumerate(self.words):
            if w in self.index:
                raise LabError(f"duplicate word {w!r}")
            self.index[w] = i

        matrix /= norms[:, None]
        matrix.setflags(write=False)
        norms.setflags(write=False)
        self.vectors = matrix
        self.raw_norms = norms
        self.provenance = provenance or Provenance()
        self.load_report = load_report or LoadReport()

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self.index

    def index_of(self, word: str) -> int:
        try:
            return self.index[word]
        except KeyError:
            raise OOVError(word) from None

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.index_of(word)]

    def raw_norm(self, word: str) -> float:
        return float(self.raw_norms[self.index_of(word)])


class Neighbor(NamedTuple):
    word: str
    cosine: float
    index: int


@dataclass(frozen=True)
class NeighborList:
    pivot: str
    neighbors: tuple[Neighbor, ...]
    k_requested: int

    def words(self) -> list[str]:
        return [n.word for n in self.neighbors]

    def __len__(self) -> int:
        return len(self.neighbors)


# -------------------------
# Queries
# -------------------------
def cosine(model: EmbeddingModel, w1: str, w2: str) -> float:
    a = model.vectors[model.index_of(w1)]
    b = model.vectors[model.index_of(w2)]
    # elementwise product is commutative and summed in the same order → exact symmetry
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


def top_k_indices(scores: np.ndarray, k: int) -> np.ndarray:
    """
    Indices of the k largest scores, ordered by descending score then
    ascending index. Every candidate tied with the k-th score is considered
    before cutting, so the result is exact under the tie rule.
    """
    k = min(k, scores.size)
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    part = np.argpartition(-scores, k - 1)[:k]
    threshold = scores[part].min()
    candidates = np.flatnonzero(scores >= threshold)
    order = np.lexsort((candidates, -scores[candidates]))
    return candidates[order][:k]


def nearest_neighbors(
    model: EmbeddingModel,
    pivot: str,
    k: int,
    filter: AbstractSet[str] | None = None,
) -> NeighborList:
    """
    Exact top-k by cosine over the full vocabulary (pivot excluded), then
    restricted to `filter`. Filtering happens after retrieval, so fewer than
    k neighbors may survive.
    """
    idx = model.index_of(pivot)
    if k <= 0:
        return NeighborList(pivot=pivot, neighbors=(), k_requested=k)

    scores = model.vectors @ model.vectors[idx]
    scores[idx] = -np.inf
    k_eff = min(k, len(model) - 1)
    top = top_k_indices(scores, k_eff)

    neighbors = []
    for j in top:
        word = model.words[int(j)]
        if filter is not None and word not in filter:
            continue
        neighbors.append(Neighbor(word, float(np.clip(scores[j], -1.0, 1.0)), int(j)))
    return NeighborList(pivot=pivot, neighbors=tuple(neighbors), k_requested=k)


def batch_nearest_neighbors(
    model: EmbeddingModel,
    pivots: Sequence[str],
    k: int,
    filter: AbstractSet[str] | None = None,
    jobs: int = 1,
) -> list[NeighborList]:
    """nearest_neighbors over many pivots; results come back in input order."""
    if jobs <= 1 or len(pivots) < 2:
        return [nearest_neighbors(model, p, k, filter) for p in pivots]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda p: nearest_neighbors(model, p, k, filter), pivots))


# -------------------------
# word2vec text format
# -------------------------
def _parse_header(line: str) -> tuple[int, int] | None:
    parts = line.split()
    if len(parts) != 2:
        return None
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        return None


def load_text_model(
    source: Source,
    max_words: int | None = None,
    *,
    provenance: Provenance | None = None,
) -> EmbeddingModel:
    """
    Read word2vec text format. The header line ("<count> <dim>") is optional.
    Duplicate words keep their first row; zero vectors are skipped. Both are
    counted in model.load_report.
    """
    lines = iter_lines(source)
    header: tuple[int, int] | None = None
    dim: int | None = None
    words: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    present = 0
    duplicates = 0
    zero_words: list[str] = []
    truncated = False

    for lineno, line in enumerate(lines, start=1):
        if lineno == 1:
            header = _parse_header(line)
            if header is not None:
                dim = header[1]
                if dim < 1:
                    raise FormatError(f"invalid dimension in header: {dim}", 1)
                continue
        if not line.strip():
            continue
        if max_words is not None and present >= max_words:
            truncated = True
            break

        parts = line.split()
        word, values = parts[0], parts[1:]
        if dim is None:
            dim = len(values)
            if dim == 0:
                raise FormatError("row has no vector components", lineno)
        if len(values) != dim:
            raise FormatError(f"expected {dim} components, found {len(values)}", lineno)
        try:
            vec = np.array([float(v) for v in values], dtype=REAL)
        except ValueError:
            raise FormatError(f"non-numeric vector component for {word!r}", lineno) from None
        if not np.all(np.isfinite(vec)):
            raise FormatError(f"non-finite vector component for {word!r}", lineno)

        present += 1
        if word in seen:
            duplicates += 1
            continue
        seen.add(word)
        if not np.any(vec):
            zero_words.append(word)
            continue
        words.append(word)
        rows.append(vec)

    if header is not None and not truncated and present != header[0]:
        raise FormatError(f"header declares {header[0]} words but {present} are present")
    if not rows:
        raise FormatError("empty model")

    if duplicates:
        logger.warning("%d duplicate word(s) ignored (first occurrence kept)", duplicates)
    if zero_words:
        logger.warning("%d zero vector(s) skipped", len(zero_words))

    report = LoadReport(duplicates=duplicates, zero_vectors=len(zero_words), skipped_words=tuple(zero_words))
    return EmbeddingModel(words, np.vstack(rows), provenance=provenance, load_report=report)


def save_text_model(model: EmbeddingModel, sink: IO[str]) -> None:
    """Write the unit rows in word2vec text format (8 significant digits)."""
    sink.write(f"{len(model)} {model.dim}\n")
    for word, row in zip(model.words, model.vectors):
        sink.write(word)
        sink.write(" ")
        sink.write(" ".join(format(float(v), ".8g") for v in row))
        sink.write("\n")


def write_neighbor_dump(lists: Iterable[NeighborList], sink: IO[str]) -> int:
    """TSV pivot / rank / neighbor / cosine; returns the number of rows."""
    rows = 0
    sink.write("pivot\trank\tneighbor\tcosine\n")
    for nl in lists:
        for rank, n in enumerate(nl.neighbors, start=1):
            sink.write(f"{nl.pivot}\t{rank}\t{n.word}\t{n.cosine:.6f}\n")
            rows += 1
    return rows
