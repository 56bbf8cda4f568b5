"""
Synthetic corpora with a known POS-like class structure.

Sentences are drawn from weighted tag templates; every slot is filled with
a word of that class, Zipf-distributed within the class. The exact
word → class mapping is returned as a gold MFT lexicon.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from django.core.exceptions import ValidationError

from .exceptions import FormatError
from .lexicon import PosTag
from .streams import Source, iter_lines


@dataclass(frozen=True)
class WordClass:
    tag: PosTag
    vocabulary_size: int

    def words(self) -> list[str]:
        prefix = str(self.tag).lower()
        return [f"{prefix}{i}" for i in range(self.vocabulary_size)]


@dataclass(frozen=True)
class Template:
    weight: float
    tags: tuple[PosTag, ...]


@dataclass(frozen=True)
class SyntheticGrammar:
    classes: tuple[WordClass, ...]
    templates: tuple[Template, ...]
    sentence_count: int = 1000
    zipf_exponent: float = 1.0
    seed: int = 1

    def clean(self) -> None:
        errors = []
        if not self.classes:
            errors.append("grammar declares no classes")
        tags = [c.tag for c in self.classes]
        if len(set(tags)) != len(tags):
            errors.append("each tag may be declared as a class only once")
        for c in self.classes:
            if c.vocabulary_size < 1:
                errors.append(f"class {c.tag} needs vocabulary_size ≥ 1 (got {c.vocabulary_size})")
        if not self.templates:
            errors.append("grammar declares no templates")
        for t in self.templates:
            if not t.weight > 0:
                errors.append(f"template weight must be > 0 (got {t.weight})")
            if not t.tags:
                errors.append("empty template")
            missing = sorted({str(tag) for tag in t.tags} - {str(tag) for tag in tags})
            if missing:
                errors.append(f"template references undeclared class: {', '.join(missing)}")
        if self.sentence_count < 0:
            errors.append("sentence count must be ≥ 0")
        if self.zipf_exponent < 0:
            errors.append("zipf exponent must be ≥ 0")
        if not (0 <= self.seed < 2**63):
            errors.append("seed must be in [0, 2^63)")
        if errors:
            raise ValidationError(errors)


def zipf_probabilities(size: int, exponent: float) -> np.ndarray:
    ranks = np.arange(1, size + 1, dtype=np.float64)
    weights = ranks ** -exponent
    return weights / weights.sum()


def generate(grammar: SyntheticGrammar) -> tuple[list[list[str]], dict[str, PosTag]]:
    """Returns (sentences, gold lexicon). Deterministic under grammar.seed."""
    grammar.clean()
    rng = np.random.default_rng(grammar.seed)

    weights = np.array([t.weight for t in grammar.templates], dtype=np.float64)
    chosen = rng.choice(len(grammar.templates), size=grammar.sentence_count, p=weights / weights.sum())

    # all draws for one class happen at once, consumed in sentence order
    slots: dict[PosTag, int] = {c.tag: 0 for c in grammar.classes}
    for i in chosen:
        for tag in grammar.templates[i].tags:
            slots[tag] += 1
    vocab = {c.tag: c.words() for c in grammar.classes}
    draws = {
        c.tag: iter(rng.choice(c.vocabulary_size, size=slots[c.tag], p=zipf_probabilities(c.vocabulary_size, grammar.zipf_exponent)))
        for c in grammar.classes
    }

    sentences = [
        [vocab[tag][int(next(draws[tag]))] for tag in grammar.templates[i].tags]
        for i in chosen
    ]
    gold = {word: c.tag for c in grammar.classes for word in vocab[c.tag]}
    return sentences, gold


# -------------------------
# Grammar file
# -------------------------
def _int(raw: str, lineno: int, what: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise FormatError(f"{what} must be an integer, got {raw!r}", lineno) from None


def _float(raw: str, lineno: int, what: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise FormatError(f"{what} must be a number, got {raw!r}", lineno) from None


def _tag(raw: str, lineno: int) -> PosTag:
    try:
        return PosTag(raw.strip().upper())
    except ValueError:
        raise FormatError(f"unknown tag {raw.strip()!r}", lineno) from None


def parse_grammar(source: Source) -> SyntheticGrammar:
    """
    key=value lines:
        seed=7
        sentences=20000
        zipf=1.0
        class=NOUN,200              (repeatable)
        template=3,ADJ NOUN VERB    (repeatable; weight, then tags)
    """
    options: dict[str, object] = {}
    classes: list[WordClass] = []
    templates: list[Template] = []

    for lineno, line in enumerate(iter_lines(source), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, value = text.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not sep:
            raise FormatError("expected key=value", lineno)

        if key == "class":
            tag, _, size = value.partition(",")
            classes.append(WordClass(_tag(tag, lineno), _int(size.strip(), lineno, "class size")))
        elif key == "template":
            weight, _, body = value.partition(",")
            templates.append(
                Template(_float(weight.strip(), lineno, "template weight"), tuple(_tag(t, lineno) for t in body.split()))
            )
        elif key == "seed":
            options["seed"] = _int(value, lineno, "seed")
        elif key == "sentences":
            options["sentence_count"] = _int(value, lineno, "sentences")
        elif key == "zipf":
            options["zipf_exponent"] = _float(value, lineno, "zipf")
        else:
            raise FormatError(f"unknown key {key!r}", lineno)

    return SyntheticGrammar(classes=tuple(classes), templates=tuple(templates), **options)


def write_corpus(sentences: Sequence[Sequence[str]], sink: IO[str]) -> int:
    tokens = 0
    for sentence in sentences:
        sink.write(" ".join(sentence))
        sink.write("\n")
        tokens += len(sentence)
    return tokens
