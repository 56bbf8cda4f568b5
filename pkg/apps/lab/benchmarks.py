"""
Word-similarity benchmarks: canonical TSV ingestion, Spearman evaluation
and the related / unrelated score bands.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple, Sequence

from .exceptions import BenchmarkError, FormatError, StatisticsError
from .reports import write_tsv
from .stats import spearman
from .streams import Source, iter_lines
from .vecstore import EmbeddingModel, cosine

logger = logging.getLogger(__name__)

LOW_FRACTION = 0.3
HIGH_FRACTION = 0.7
BAND_EPS = 1e-12

LAYOUTS = ("csv", "tsv-columns")


class ScoredPair(NamedTuple):
    word1: str
    word2: str
    score: float


@dataclass(frozen=True)
class Benchmark:
    name: str
    pairs: tuple[ScoredPair, ...]

    def __post_init__(self):
        if not self.pairs:
            raise BenchmarkError(f"benchmark {self.name!r} has no pairs")

    @property
    def score_min(self) -> float:
        return min(p.score for p in self.pairs)

    @property
    def score_max(self) -> float:
        return max(p.score for p in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class EvalResult:
    rho: float
    n_used: int
    n_oov_pairs: int


@dataclass(frozen=True)
class RelatednessBands:
    related: frozenset[int]
    unrelated: frozenset[int]
    ignored: frozenset[int]
    low: float
    high: float

    @property
    def thresholds(self) -> tuple[float, float]:
        return self.low, self.high


def _parse_score(raw: str, lineno: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise FormatError(f"unparseable score {raw.strip()!r}", lineno) from None
    if value != value or value in (float("inf"), float("-inf")):
        raise FormatError(f"non-finite score {raw.strip()!r}", lineno)
    return value


def load_benchmark(source: Source, name: str) -> Benchmark:
    """Canonical TSV word1<TAB>word2<TAB>score; '#' lines are comments."""
    pairs: list[ScoredPair] = []
    for lineno, line in enumerate(iter_lines(source), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(f"expected 3 tab-separated fields, found {len(fields)}", lineno)
        w1, w2, raw = fields
        if not w1.strip() or not w2.strip():
            raise FormatError("empty word", lineno)
        pairs.append(ScoredPair(w1.strip().lower(), w2.strip().lower(), _parse_score(raw, lineno)))
    if not pairs:
        raise BenchmarkError(f"benchmark {name!r} has no pairs")
    return Benchmark(name=name, pairs=tuple(pairs))


def evaluate(model: EmbeddingModel, benchmark: Benchmark) -> EvalResult:
    human: list[float] = []
    predicted: list[float] = []
    oov = 0
    for pair in benchmark.pairs:
        if pair.word1 not in model or pair.word2 not in model:
            oov += 1
            continue
        human.append(pair.score)
        predicted.append(cosine(model, pair.word1, pair.word2))

    if len(human) < 2:
        raise BenchmarkError(f"insufficient coverage: {len(human)} of {len(benchmark)} pairs in vocabulary")
    if oov:
        logger.info("%s: %d OOV pair(s) skipped", benchmark.name, oov)
    return EvalResult(rho=spearman(human, predicted), n_used=len(human), n_oov_pairs=oov)


def band_partition(benchmark: Benchmark) -> RelatednessBands:
    """
    Bottom 30% of the observed score range is unrelated, top 30% related,
    the middle is ignored. Boundaries belong to the outer bands. Membership
    is decided on the relative position in the range so it survives affine
    rescaling of the scores.
    """
    lo, hi = benchmark.score_min, benchmark.score_max
    span = hi - lo
    if not span > 0:
        raise BenchmarkError("degenerate score range")

    related, unrelated, ignored = set(), set(), set()
    for i, pair in enumerate(benchmark.pairs):
        t = (pair.score - lo) / span
        if t >= HIGH_FRACTION - BAND_EPS:
            related.add(i)
        elif t <= LOW_FRACTION + BAND_EPS:
            unrelated.add(i)
        else:
            ignored.add(i)
    return RelatednessBands(
        related=frozenset(related),
        unrelated=frozenset(unrelated),
        ignored=frozenset(ignored),
        low=lo + LOW_FRACTION * span,
        high=lo + HIGH_FRACTION * span,
    )


def delta_win(rho_w2: float, rho_w15: float) -> float:
    """Signed relative change of rho, in percent."""
    if rho_w2 == 0:
        raise BenchmarkError("undefined relative change: rho at the base window is 0")
    return 100.0 * (rho_w15 - rho_w2) / rho_w2


# -------------------------
# Import helpers
# -------------------------
def _is_number(raw: str) -> bool:
    try:
        float(raw)
    except ValueError:
        return False
    return True


def import_benchmark(source: Source, layout: str, score_column: int = 3) -> list[ScoredPair]:
    """
    Convert a known third-party layout to canonical rows.

      csv          word1,word2,score (a non-numeric first row is a header)
      tsv-columns  tab-separated; keep columns 1, 2 and `score_column` (1-based)
    """
    if layout not in LAYOUTS:
        raise BenchmarkError(f"unknown layout {layout!r} (expected one of: {', '.join(LAYOUTS)})")
    if layout == "csv":
        sep, col = ",", 3
    else:
        sep, col = "\t", score_column
    if col < 3:
        raise BenchmarkError("score column must be ≥ 3")

    rows: list[ScoredPair] = []
    first = True
    for lineno, line in enumerate(iter_lines(source), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in line.split(sep)]
        if len(fields) < col:
            raise FormatError(f"expected at least {col} fields, found {len(fields)}", lineno)
        if first:
            first = False
            if not _is_number(fields[col - 1]):
                continue
        rows.append(ScoredPair(fields[0].lower(), fields[1].lower(), _parse_score(fields[col - 1], lineno)))
    if not rows:
        raise BenchmarkError("no pairs found")
    return rows


def write_canonical(rows: Iterable[ScoredPair], sink: IO[str]) -> int:
    n = 0
    for r in rows:
        sink.write(f"{r.word1}\t{r.word2}\t{format(r.score, 'g')}\n")
        n += 1
    return n


# -------------------------
# Report
# -------------------------
EVAL_COLUMNS = ("benchmark", "algorithm", "window", "rho", "n_used", "n_oov")


class EvalRow(NamedTuple):
    benchmark: str
    algorithm: str
    window: int
    result: EvalResult | None      # None: insufficient coverage
    n_oov: int | None = None


def delta_rows(rows: Sequence[EvalRow], base: int = 2, target: int = 15) -> list[tuple]:
    """One Δwin row per (benchmark, algorithm) having results for both windows."""
    by_key: dict[tuple[str, str, int], EvalResult] = {}
    order: list[tuple[str, str]] = []
    for r in rows:
        if r.result is None:
            continue
        by_key[(r.benchmark, r.algorithm, r.window)] = r.result
        if (r.benchmark, r.algorithm) not in order:
            order.append((r.benchmark, r.algorithm))

    out = []
    for bench, algo in order:
        lo = by_key.get((bench, algo, base))
        hi = by_key.get((bench, algo, target))
        if lo is None or hi is None:
            continue
        try:
            pct = delta_win(lo.rho, hi.rho)
        except BenchmarkError:
            pct = None
        out.append((bench, algo, f"{base}->{target}", pct, "-", "-"))
    return out


def write_eval_report(rows: Sequence[EvalRow], sink: IO[str]) -> int:
    """Data rows in the given order, then Δwin rows (percent in the rho column)."""
    data = []
    for r in rows:
        if r.result is None:
            data.append((r.benchmark, r.algorithm, r.window, None, 0, r.n_oov))
        else:
            data.append((r.benchmark, r.algorithm, r.window, r.result.rho, r.result.n_used, r.result.n_oov_pairs))
    return write_tsv(sink, EVAL_COLUMNS, [*data, *delta_rows(rows)])


def safe_evaluate(model: EmbeddingModel, benchmark: Benchmark) -> EvalResult | None:
    """evaluate(), with too-few-pairs / constant-input cases reported as None."""
    try:
        return evaluate(model, benchmark)
    except (BenchmarkError, StatisticsError) as exc:
        logger.warning("%s: %s", benchmark.name, exc)
        return None


def count_oov_pairs(model: EmbeddingModel, benchmark: Benchmark) -> int:
    return sum(1 for p in benchmark.pairs if p.word1 not in model or p.word2 not in model)
