"""
POS ground truth: lexical-database index files, most-frequent-tag lexicon,
and the purified per-POS pivot lists.
"""

from __future__ import annotations

import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

from django.db import models

from .exceptions import FormatError, LexiconError
from .streams import Source, iter_lines, open_text

logger = logging.getLogger(__name__)


class PosTag(models.TextChoices):
    NOUN = "NOUN", "Noun"
    VERB = "VERB", "Verb"
    ADJ = "ADJ", "Adjective"
    ADV = "ADV", "Adverb"
    OTHER = "OTHER", "Other"


PIVOT_TAGS: tuple[PosTag, ...] = (PosTag.NOUN, PosTag.ADJ, PosTag.VERB)

# tie-break order when deriving a most-frequent-tag lexicon
TAG_PRIORITY: tuple[PosTag, ...] = (PosTag.NOUN, PosTag.VERB, PosTag.ADJ, PosTag.ADV, PosTag.OTHER)

INDEX_FILES: dict[PosTag, str] = {
    PosTag.NOUN: "index.noun",
    PosTag.VERB: "index.verb",
    PosTag.ADJ: "index.adj",
    PosTag.ADV: "index.adv",
}

_VALID_WORD_RE = re.compile(r"^[^\s_]+$")

# fine-grained tag → coarse tag
_UNIVERSAL = {"PROPN": PosTag.NOUN, "AUX": PosTag.VERB}
_PENN_PREFIXES = (("NN", PosTag.NOUN), ("VB", PosTag.VERB), ("JJ", PosTag.ADJ), ("RB", PosTag.ADV))


@dataclass(frozen=True)
class PosLexicon:
    wordnet_pos: Mapping[str, frozenset[PosTag]] = field(default_factory=dict)
    mft_pos: Mapping[str, PosTag] = field(default_factory=dict)

    @classmethod
    def from_gold(cls, mapping: Mapping[str, str]) -> "PosLexicon":
        """A synthetic gold lexicon doubles as singleton lexical-database sets."""
        mft = {w.lower(): PosTag(t) for w, t in mapping.items()}
        return cls(wordnet_pos={w: frozenset({t}) for w, t in mft.items()}, mft_pos=mft)

    @property
    def words(self) -> frozenset[str]:
        return frozenset(self.mft_pos)

    def tag(self, word: str) -> PosTag | None:
        return self.mft_pos.get(word)


@dataclass(frozen=True)
class PivotLists:
    lists: Mapping[PosTag, tuple[str, ...]]

    def __getitem__(self, pos: PosTag) -> tuple[str, ...]:
        return self.lists[pos]

    def items(self):
        return [(pos, self.lists[pos]) for pos in PIVOT_TAGS if pos in self.lists]

    def counts(self) -> dict[str, int]:
        return {str(pos): len(words) for pos, words in self.items()}


@dataclass(frozen=True)
class MftLoad:
    mapping: dict[str, PosTag]
    duplicates: int


def _parse_tag(raw: str, lineno: int) -> PosTag:
    try:
        return PosTag(raw.strip().upper())
    except ValueError:
        raise FormatError(f"unknown tag {raw.strip()!r}", lineno) from None


# -------------------------
# Lexical-database index files
# -------------------------
def parse_index(source: Source, pos: PosTag) -> set[str]:
    """Lemmas of one index file. Header lines start with two spaces; multiword lemmas are skipped."""
    words: set[str] = set()
    entries = 0
    for line in iter_lines(source):
        if not line.strip() or line.startswith("  "):
            continue
        entries += 1
        lemma = line.split(" ", 1)[0].lower()
        if "_" in lemma:
            continue
        words.add(lemma)
    if entries == 0:
        raise LexiconError(f"no entries in {pos.label.lower()} index")
    return words


def load_wordnet_dir(path: str | Path) -> dict[str, frozenset[PosTag]]:
    root = Path(path)
    membership: dict[str, set[PosTag]] = defaultdict(set)
    for pos, filename in INDEX_FILES.items():
        index_path = root / filename
        if not index_path.is_file():
            raise LexiconError(f"missing index file: {index_path}")
        with open_text(index_path) as fh:
            for word in parse_index(fh, pos):
                membership[word].add(pos)
    return {w: frozenset(tags) for w, tags in membership.items()}


# -------------------------
# Most-frequent-tag lexicon
# -------------------------
def load_mft_lexicon(source: Source) -> MftLoad:
    """TSV word<TAB>TAG. Later lines override earlier ones (counted as duplicates)."""
    mapping: dict[str, PosTag] = {}
    duplicates = 0
    for lineno, line in enumerate(iter_lines(source), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise FormatError("expected word<TAB>TAG", lineno)
        word = parts[0].strip().lower()
        tag = _parse_tag(parts[1], lineno)
        if not _VALID_WORD_RE.match(word):
            raise FormatError(f"not a single-token word: {parts[0]!r}", lineno)
        if word in mapping:
            duplicates += 1
        mapping[word] = tag
    if duplicates:
        logger.warning("%d duplicate lexicon entr%s (last one wins)", duplicates, "y" if duplicates == 1 else "ies")
    return MftLoad(mapping=mapping, duplicates=duplicates)


def coarse_tag(tag: str) -> PosTag:
    """Penn / Universal tag → coarse tag."""
    t = tag.strip().upper()
    if t in PosTag.values:
        return PosTag(t)
    if t in _UNIVERSAL:
        return _UNIVERSAL[t]
    for prefix, pos in _PENN_PREFIXES:
        if t.startswith(prefix):
            return pos
    return PosTag.OTHER


def _tagged_tokens(source: Source) -> Iterable[tuple[str, str]]:
    for lineno, line in enumerate(iter_lines(source), start=1):
        if not line.strip():
            continue
        if "\t" in line:
            word, _, tag = line.partition("\t")
            yield word, tag
            continue
        for token in line.split():
            word, sep, tag = token.rpartition("/")
            if not sep or not word:
                raise FormatError(f"expected word/TAG token, got {token!r}", lineno)
            yield word, tag


def derive_mft_lexicon(source: Source) -> dict[str, PosTag]:
    """Most frequent coarse tag per word over a tagged corpus ("word/TAG" tokens or word<TAB>TAG lines)."""
    counts: dict[str, Counter] = defaultdict(Counter)
    for word, tag in _tagged_tokens(source):
        w = word.lower()
        if not _VALID_WORD_RE.match(w):
            continue
        counts[w][coarse_tag(tag)] += 1

    rank = {t: i for i, t in enumerate(TAG_PRIORITY)}
    return {
        w: min(c, key=lambda t: (-c[t], rank[t]))
        for w, c in sorted(counts.items())
    }


def write_mft_lexicon(mapping: Mapping[str, PosTag], sink: IO[str]) -> int:
    for word in sorted(mapping):
        sink.write(f"{word}\t{mapping[word]}\n")
    return len(mapping)


# -------------------------
# Pivot lists
# -------------------------
def build_pivots(lex: PosLexicon) -> PivotLists:
    """Words belonging to exactly one lexical-database POS, confirmed by the MFT lexicon."""
    lists: dict[PosTag, list[str]] = {pos: [] for pos in PIVOT_TAGS}
    for word, tags in lex.wordnet_pos.items():
        if len(tags) != 1:
            continue
        (pos,) = tags
        if pos in lists and lex.mft_pos.get(word) == pos:
            lists[pos].append(word)

    for pos in PIVOT_TAGS:
        if not lists[pos]:
            raise LexiconError(f"empty pivot list for {pos}")
    return PivotLists({pos: tuple(sorted(words)) for pos, words in lists.items()})


def write_pivots(pivots: PivotLists, sink: IO[str]) -> int:
    rows = 0
    for pos, words in pivots.items():
        for word in words:
            sink.write(f"{word}\t{pos}\n")
            rows += 1
    return rows


def read_pivots(source: Source) -> PivotLists:
    lists: dict[PosTag, list[str]] = {pos: [] for pos in PIVOT_TAGS}
    for lineno, line in enumerate(iter_lines(source), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        word, _, raw = line.partition("\t")
        pos = _parse_tag(raw, lineno)
        if pos not in lists:
            raise FormatError(f"pivot tag must be one of {', '.join(PIVOT_TAGS)}", lineno)
        lists[pos].append(word.strip().lower())
    return PivotLists({pos: tuple(sorted(set(words))) for pos, words in lists.items()})
