"""
Sweep spec: flat key=value file describing a whole (algorithm × value) grid.

    corpus=data/corpus.txt
    algorithms=CBOW,SGNS
    windows=1-15            (comma list; a-b ranges allowed)
    dim=300
    benchmarks=ws353.tsv,simlex.tsv
    mft_lexicon=mft.tsv
    wordnet_dir=dict/
    models.SGNS.5=runs/sgns_w5.txt   (preloaded model, skips training)

Relative paths are resolved against the spec file's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from django.core.exceptions import ValidationError

from .exceptions import FormatError
from .streams import Source, iter_lines
from .trainer import Algorithm, TrainConfig

INT_KEYS = ("dim", "min_count", "epochs", "seed", "negatives", "k_search", "k_keep")
FLOAT_KEYS = ("learning_rate", "subsample")
PATH_KEYS = ("corpus", "wordnet_dir", "mft_lexicon", "pivots", "output_dir")
KNOWN_KEYS = frozenset(
    (*INT_KEYS, *FLOAT_KEYS, *PATH_KEYS, "algorithms", "windows", "dims", "benchmarks", "respect_lines", "vary")
)


@dataclass(frozen=True)
class SweepSpec:
    corpus: Path | None
    algorithms: tuple[str, ...]
    windows: tuple[int, ...]
    mft_lexicon: Path | None
    output_dir: Path
    dim: int = 300
    dims: tuple[int, ...] = ()
    min_count: int = 500
    epochs: int = 5
    seed: int = 1
    negatives: int = 5
    learning_rate: float = 0.05
    subsample: float = 1e-4
    k_search: int = 100
    k_keep: int = 10
    respect_lines: bool = False
    vary: str = "window"
    benchmarks: tuple[Path, ...] = ()
    wordnet_dir: Path | None = None
    pivots: Path | None = None
    models: Mapping[tuple[str, int], Path] = field(default_factory=dict)

    @property
    def values(self) -> tuple[int, ...]:
        return self.windows if self.vary == "window" else self.dims

    def clean(self) -> None:
        errors: dict[str, str] = {}
        if self.vary not in ("window", "dim"):
            errors["vary"] = "vary must be window or dim"
        if not self.algorithms:
            errors["algorithms"] = "algorithms must not be empty"
        bad = [a for a in self.algorithms if a not in Algorithm.values]
        if bad:
            errors["algorithms"] = f"unknown algorithm(s): {', '.join(bad)}"
        for name, values in (("windows", self.windows), ("dims", self.dims)):
            if any(v < 1 for v in values):
                errors[name] = f"{name} must be ≥ 1"
            elif any(b <= a for a, b in zip(values, values[1:])):
                errors[name] = f"{name} must be strictly increasing"
        if not self.values:
            errors["vary"] = f"{self.vary}s must not be empty"
        if self.vary == "dim" and len(self.windows) != 1:
            errors["windows"] = "vary=dim needs exactly one window"
        if self.mft_lexicon is None:
            errors["mft_lexicon"] = "mft_lexicon is required"
        missing = [(a, v) for a in self.algorithms for v in self.values if (a, v) not in self.models]
        if missing and self.corpus is None:
            errors["corpus"] = "corpus is required unless every model is preloaded"
        if self.k_search < 1 or self.k_keep < 1:
            errors["k_search"] = "k_search and k_keep must be ≥ 1"
        if errors:
            raise ValidationError(errors)

        for config in self.train_configs():
            config.clean()

    def train_config(self, algorithm: str, value: int, workers: int = 1) -> TrainConfig:
        window, dim = (value, self.dim) if self.vary == "window" else (self.windows[0], value)
        return TrainConfig(
            algorithm=algorithm,
            dim=dim,
            window=window,
            negatives=self.negatives,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            min_count=self.min_count,
            subsample_threshold=self.subsample,
            seed=self.seed,
            workers=workers,
            respect_lines=self.respect_lines,
        )

    def train_configs(self) -> list[TrainConfig]:
        return [
            self.train_config(a, v)
            for a in self.algorithms
            for v in self.values
            if (a, v) not in self.models
        ]


def parse_int_list(raw: str) -> tuple[int, ...]:
    """'1,2,5-7' → (1, 2, 5, 6, 7)."""
    out: list[int] = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep:
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "y", "on"):
        return True
    if v in ("0", "false", "no", "n", "off", ""):
        return False
    raise ValueError(raw)


def parse_sweep_spec(source: Source, base_dir: str | Path = ".", defaults: Mapping[str, Any] | None = None) -> SweepSpec:
    """`defaults` fills numeric keys the file leaves out (dim, min_count, …)."""
    base = Path(base_dir)
    raw: dict[str, str] = {}
    models: dict[tuple[str, int], Path] = {}

    def path(value: str) -> Path:
        p = Path(value).expanduser()
        return p if p.is_absolute() else base / p

    for lineno, line in enumerate(iter_lines(source), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, value = text.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not sep:
            raise FormatError("expected key=value", lineno)
        if key.startswith("models."):
            parts = key.split(".")
            if len(parts) != 3:
                raise FormatError("expected models.<ALGO>.<value>=path", lineno)
            try:
                models[(parts[1].upper(), int(parts[2]))] = path(value)
            except ValueError:
                raise FormatError(f"model key needs an integer value: {key}", lineno) from None
            continue
        if key not in KNOWN_KEYS:
            raise FormatError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise FormatError(f"duplicate key {key!r}", lineno)
        raw[key] = value

    kwargs: dict[str, Any] = {k: v for k, v in (defaults or {}).items() if k in INT_KEYS + FLOAT_KEYS}
    try:
        for key in INT_KEYS:
            if key in raw:
                kwargs[key] = int(raw[key])
        for key in FLOAT_KEYS:
            if key in raw:
                kwargs[key] = float(raw[key])
        if "windows" in raw:
            kwargs["windows"] = parse_int_list(raw["windows"])
        if "dims" in raw:
            kwargs["dims"] = parse_int_list(raw["dims"])
        if "respect_lines" in raw:
            kwargs["respect_lines"] = _bool(raw["respect_lines"])
    except ValueError as exc:
        raise ValidationError(f"invalid sweep spec value: {exc}") from None

    return SweepSpec(
        corpus=path(raw["corpus"]) if raw.get("corpus") else None,
        algorithms=tuple(a.strip().upper() for a in raw.get("algorithms", "CBOW,SGNS").split(",") if a.strip()),
        windows=kwargs.pop("windows", ()),
        mft_lexicon=path(raw["mft_lexicon"]) if raw.get("mft_lexicon") else None,
        output_dir=path(raw.get("output_dir") or (defaults or {}).get("output_dir", "runs")),
        benchmarks=tuple(path(b.strip()) for b in raw.get("benchmarks", "").split(",") if b.strip()),
        wordnet_dir=path(raw["wordnet_dir"]) if raw.get("wordnet_dir") else None,
        pivots=path(raw["pivots"]) if raw.get("pivots") else None,
        vary=raw.get("vary", "window").lower(),
        models=models,
        **kwargs,
    )
