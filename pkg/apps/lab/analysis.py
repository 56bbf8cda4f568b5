"""
Interchangeability analysis.

  - enrichment: are same-POS pairs over-represented among the related
    pairs of a benchmark? (hypergeometric upper tail)
  - neighbor POS histograms: POS of the top neighbors of each pivot word,
    and how the same-POS ratio moves as a training hyper-parameter (the
    window, or the vector dimension) grows.
"""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence

from .benchmarks import Benchmark, RelatednessBands
from .exceptions import AnalysisError, FormatError, StatisticsError
from .lexicon import TAG_PRIORITY, PivotLists, PosLexicon, PosTag
from .reports import write_tsv
from .stats import ContingencyCounts, hypergeom_sf, pearson, pearson_pvalue_two_tailed
from .streams import Source, iter_lines
from .vecstore import EmbeddingModel, batch_nearest_neighbors

logger = logging.getLogger(__name__)

DEFAULT_K_SEARCH = 100
DEFAULT_K_KEEP = 10
MIN_SWEEP_POINTS = 3
SWEEP_PARAMETERS = ("window", "dim")


def same_pos(lex: PosLexicon, w1: str, w2: str) -> bool | None:
    """None when either word is missing from the lexicon."""
    t1, t2 = lex.tag(w1), lex.tag(w2)
    if t1 is None or t2 is None:
        return None
    return t1 == t2


# -------------------------
# Enrichment
# -------------------------
@dataclass(frozen=True)
class EnrichmentResult:
    benchmark_name: str
    n_related: int
    n_related_same_pos: int
    n_unrelated: int
    n_unrelated_same_pos: int
    p_value: float
    n_skipped: int = 0

    @property
    def counts(self) -> ContingencyCounts:
        return ContingencyCounts(
            population=self.n_related + self.n_unrelated,
            successes_in_population=self.n_related_same_pos + self.n_unrelated_same_pos,
            sample=self.n_related,
            successes_in_sample=self.n_related_same_pos,
        )


def enrichment_from_counts(
    name: str,
    n_related: int,
    n_related_same_pos: int,
    n_unrelated: int,
    n_unrelated_same_pos: int,
    n_skipped: int = 0,
) -> EnrichmentResult:
    if n_related == 0 or n_unrelated == 0:
        raise AnalysisError(f"empty band in {name!r} (related={n_related}, unrelated={n_unrelated})")
    if n_related_same_pos > n_related or n_unrelated_same_pos > n_unrelated:
        raise AnalysisError(f"same-POS count exceeds band size in {name!r}")
    counts = ContingencyCounts(
        population=n_related + n_unrelated,
        successes_in_population=n_related_same_pos + n_unrelated_same_pos,
        sample=n_related,
        successes_in_sample=n_related_same_pos,
    )
    return EnrichmentResult(
        benchmark_name=name,
        n_related=n_related,
        n_related_same_pos=n_related_same_pos,
        n_unrelated=n_unrelated,
        n_unrelated_same_pos=n_unrelated_same_pos,
        p_value=hypergeom_sf(counts),
        n_skipped=n_skipped,
    )


def enrichment(benchmark: Benchmark, bands: RelatednessBands, lex: PosLexicon) -> EnrichmentResult:
    """Ignored-band pairs never enter the test; pairs with an unknown word are skipped."""
    tallies = {"related": [0, 0], "unrelated": [0, 0]}   # [pairs, same-POS]
    skipped = 0
    for band, indices in (("related", bands.related), ("unrelated", bands.unrelated)):
        for i in sorted(indices):
            pair = benchmark.pairs[i]
            verdict = same_pos(lex, pair.word1, pair.word2)
            if verdict is None:
                skipped += 1
                continue
            tallies[band][0] += 1
            tallies[band][1] += int(verdict)

    (n_rel, rel_same), (n_unrel, unrel_same) = tallies["related"], tallies["unrelated"]
    return enrichment_from_counts(benchmark.name, n_rel, rel_same, n_unrel, unrel_same, skipped)


ENRICHMENT_COLUMNS = (
    "benchmark", "n_related", "related_same_pos", "n_unrelated", "unrelated_same_pos", "p_value", "n_skipped",
)


def write_enrichment_report(results: Iterable[EnrichmentResult], sink: IO[str]) -> int:
    return write_tsv(
        sink,
        ENRICHMENT_COLUMNS,
        (
            (r.benchmark_name, r.n_related, r.n_related_same_pos, r.n_unrelated,
             r.n_unrelated_same_pos, r.p_value, r.n_skipped)
            for r in results
        ),
    )


# -------------------------
# Neighbor POS histograms
# -------------------------
@dataclass(frozen=True)
class NeighborPosHistogram:
    pivot_pos: PosTag
    counts: Mapping[PosTag, int]
    n_pivots_used: int
    k_keep: int
    n_pivots_skipped: int = 0
    n_short: int = 0     # pivots with fewer than k_keep lexicon-known neighbors

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count(self, pos: PosTag) -> int:
        return self.counts.get(pos, 0)


def same_pos_ratio(h: NeighborPosHistogram) -> float:
    total = h.total
    if total == 0:
        raise AnalysisError(f"empty histogram for {h.pivot_pos}")
    return h.count(h.pivot_pos) / total


def neighbor_pos_histogram(
    model: EmbeddingModel,
    pivots: PivotLists,
    lex: PosLexicon,
    k_search: int = DEFAULT_K_SEARCH,
    k_keep: int = DEFAULT_K_KEEP,
    jobs: int = 1,
) -> dict[PosTag, NeighborPosHistogram]:
    """
    For each pivot in the model: k_search exact neighbors, drop those missing
    from the MFT lexicon, tally the tags of the first k_keep survivors.
    """
    if k_search < 1 or k_keep < 1:
        raise AnalysisError("k_search and k_keep must be ≥ 1")
    known = lex.words
    out: dict[PosTag, NeighborPosHistogram] = {}

    for pos, words in pivots.items():
        present = [w for w in words if w in model]
        skipped = len(words) - len(present)
        if not present:
            raise AnalysisError(f"no usable {pos} pivots in the model vocabulary")

        lists = batch_nearest_neighbors(model, present, k_search, filter=known, jobs=jobs)
        counts: Counter = Counter()
        short = 0
        for nl in lists:
            kept = nl.neighbors[:k_keep]
            if len(kept) < k_keep:
                short += 1
            counts.update(lex.mft_pos[n.word] for n in kept)

        if skipped:
            logger.info("%s: %d pivot(s) missing from the model", pos, skipped)
        out[pos] = NeighborPosHistogram(
            pivot_pos=pos,
            counts={t: counts.get(t, 0) for t in TAG_PRIORITY},
            n_pivots_used=len(present),
            k_keep=k_keep,
            n_pivots_skipped=skipped,
            n_short=short,
        )
    return out


# -------------------------
# Sweeps
# -------------------------
@dataclass(frozen=True)
class SweepSeries:
    algorithm: str
    pivot_pos: PosTag
    points: tuple[tuple[int, float], ...]    # (parameter value, same-POS ratio)
    pearson_r: float
    p_value: float

    @property
    def values(self) -> list[int]:
        return [v for v, _ in self.points]

    @property
    def ratios(self) -> list[float]:
        return [r for _, r in self.points]


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    series: tuple[SweepSeries, ...]
    # (algorithm, parameter value) → per-POS histogram
    histograms: Mapping[tuple[str, int], Mapping[PosTag, NeighborPosHistogram]] = field(default_factory=dict)

    def get(self, algorithm: str, pos: PosTag) -> SweepSeries:
        for s in self.series:
            if s.algorithm == algorithm and s.pivot_pos == pos:
                return s
        raise KeyError((algorithm, pos))

    @classmethod
    def combine(cls, results: Sequence["SweepResult"]) -> "SweepResult":
        if not results:
            raise AnalysisError("nothing to combine")
        parameters = {r.parameter for r in results}
        if len(parameters) != 1:
            raise AnalysisError(f"cannot combine sweeps over {sorted(parameters)}")
        histograms: dict = {}
        for r in results:
            histograms.update(r.histograms)
        return cls(
            parameter=results[0].parameter,
            series=tuple(s for r in results for s in r.series),
            histograms=histograms,
        )


def _shared(models: Mapping[int, EmbeddingModel], attr: str) -> set:
    return {getattr(m.provenance, attr) for m in models.values()} - {None, ""}


def _check_models(models: Mapping[int, EmbeddingModel], parameter: str) -> str:
    algorithms = _shared(models, "algorithm")
    if len(algorithms) > 1:
        raise AnalysisError(f"sweep mixes algorithms: {', '.join(sorted(algorithms))}")
    if parameter == "window":
        dims = {m.dim for m in models.values()}
        if len(dims) > 1:
            raise AnalysisError(f"sweep mixes dimensions: {sorted(dims)}")
    else:
        windows = _shared(models, "window")
        if len(windows) > 1:
            raise AnalysisError(f"sweep mixes windows: {sorted(windows)}")
    return algorithms.pop() if algorithms else ""


def parameter_sweep(
    models: Mapping[int, EmbeddingModel],
    pivots: PivotLists,
    lex: PosLexicon,
    parameter: str = "window",
    *,
    algorithm: str | None = None,
    k_search: int = DEFAULT_K_SEARCH,
    k_keep: int = DEFAULT_K_KEEP,
    jobs: int = 1,
) -> SweepResult:
    """
    Same-POS ratio per pivot POS as a function of one training
    hyper-parameter, with Pearson r against the parameter value and its
    two-tailed p-value (n = number of values).
    """
    if parameter not in SWEEP_PARAMETERS:
        raise AnalysisError(f"unknown sweep parameter {parameter!r}")
    if len(models) < MIN_SWEEP_POINTS:
        raise AnalysisError(f"sweep needs ≥ {MIN_SWEEP_POINTS} {parameter}s (got {len(models)})")
    values = list(models)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise AnalysisError(f"sweep {parameter}s must be strictly increasing: {values}")

    detected = _check_models(models, parameter)
    algo = algorithm if algorithm is not None else detected

    def run(value: int) -> dict[PosTag, NeighborPosHistogram]:
        try:
            return neighbor_pos_histogram(models[value], pivots, lex, k_search, k_keep)
        except AnalysisError as exc:
            raise AnalysisError(f"{parameter}={value}: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_value = dict(zip(values, pool.map(run, values)))
    else:
        per_value = {v: run(v) for v in values}

    series = []
    for pos, _ in pivots.items():
        ratios = [same_pos_ratio(per_value[v][pos]) for v in values]
        try:
            r = pearson(values, ratios)
        except StatisticsError as exc:
            raise AnalysisError(f"degenerate sweep for {algo or '?'} {pos}: {exc}") from None
        series.append(
            SweepSeries(
                algorithm=algo,
                pivot_pos=pos,
                points=tuple(zip(values, ratios)),
                pearson_r=r,
                p_value=pearson_pvalue_two_tailed(r, len(values)),
            )
        )
    return SweepResult(
        parameter=parameter,
        series=tuple(series),
        histograms={(algo, v): per_value[v] for v in values},
    )


def window_sweep(
    models: Mapping[int, EmbeddingModel],
    pivots: PivotLists,
    lex: PosLexicon,
    **kwargs,
) -> SweepResult:
    return parameter_sweep(models, pivots, lex, "window", **kwargs)


def histogram_columns(parameter: str) -> tuple[str, ...]:
    return ("algorithm", "pivot_pos", parameter, "neighbor_pos", "count", "same_pos_ratio")


SUMMARY_COLUMNS = (
    "algorithm", "pivot_pos", "first_value", "first_ratio", "last_value", "last_ratio",
    "pearson_r", "p_value", "n_points",
)


def write_histogram_report(result: SweepResult, sink: IO[str]) -> int:
    """
    Absolute neighbor counts per (algorithm, pivot POS, value, neighbor POS).
    Each series ends with a summary row: <value>="summary", neighbor_pos="r",
    count=pearson_r, same_pos_ratio=p_value.
    """
    rows = []
    for s in result.series:
        for value, ratio in s.points:
            h = result.histograms[(s.algorithm, value)][s.pivot_pos]
            for tag in TAG_PRIORITY:
                rows.append((s.algorithm, s.pivot_pos, value, tag, h.count(tag), ratio))
        rows.append((s.algorithm, s.pivot_pos, "summary", "r", s.pearson_r, s.p_value))
    return write_tsv(sink, histogram_columns(result.parameter), rows)


def write_summary_report(result: SweepResult, sink: IO[str]) -> int:
    return write_tsv(
        sink,
        SUMMARY_COLUMNS,
        (
            (s.algorithm, s.pivot_pos, s.points[0][0], s.points[0][1], s.points[-1][0], s.points[-1][1],
             s.pearson_r, s.p_value, len(s.points))
            for s in result.series
        ),
    )


def read_enrichment_counts(source: Source) -> list[EnrichmentResult]:
    """
    Precomputed counts, one benchmark per line:
    benchmark<TAB>n_related<TAB>related_same_pos<TAB>n_unrelated<TAB>unrelated_same_pos
    (a header row starting with "benchmark" and '#' lines are skipped).
    """
    out = []
    for lineno, line in enumerate(iter_lines(source), start=1):
        if not line.strip() or line.startswith("#") or line.startswith("benchmark\t"):
            continue
        fields = line.split("\t")
        if len(fields) < 5:
            raise FormatError(f"expected 5 tab-separated fields, found {len(fields)}", lineno)
        try:
            counts = [int(f) for f in fields[1:5]]
        except ValueError:
            raise FormatError("counts must be integers", lineno) from None
        out.append(enrichment_from_counts(fields[0], *counts))
    return out
