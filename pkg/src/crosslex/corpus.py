"""Corpus ingestion: cleaning, vocabularies, statistics, bilingual lexicons.

A sentence is a plain list of lowercased tokens. Corpus files are UTF-8
text with one sentence per line; lexicon files hold one "src<TAB>tgt"
pair per line (a single space is accepted as separator when no tab is
present).
"""

from __future__ import annotations

import logging
import random
import string
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DataFormatError

log = logging.getLogger(__name__)

Sentence = list[str]

# ASCII punctuation plus the unicode quotes/dashes/ellipsis that news text
# tends to carry. Mapped to spaces so that stripping cannot glue words.
_PUNCT_CHARS = string.punctuation + "‘’‚“”„‹›«»–—―‒…·′″"
_PUNCT_TABLE = str.maketrans({c: " " for c in _PUNCT_CHARS})


@dataclass(frozen=True)
class CleaningRules:
    """Knobs for clean_corpus. Defaults match the pipeline defaults."""

    lowercase: bool = True
    strip_punctuation: bool = True
    dedup: bool = True  # global duplicate-sentence removal


@dataclass(frozen=True)
class CorpusStats:
    n_sentences: int
    n_tokens: int
    n_unique_words: int


class Vocabulary:
    """Ordered word<->index map with per-word occurrence counts."""

    __slots__ = ("words", "counts", "min_count", "_index")

    def __init__(self, words: list[str], counts: list[int], min_count: int = 1):
        if len(words) != len(counts):
            raise ValueError("words and counts must have equal length")
        if min_count < 1:
            raise ValueError("min_count must be >= 1")
        self.words = list(words)
        self.counts = list(counts)
        self.min_count = min_count
        self._index = {w: i for i, w in enumerate(self.words)}
        if len(self._index) != len(self.words):
            raise ValueError("vocabulary words must be unique")
        for w, c in zip(self.words, self.counts):
            if c < min_count:
                raise ValueError(f"count {c} of {w!r} below min_count {min_count}")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __iter__(self):
        return iter(self.words)

    def index(self, word: str) -> int:
        return self._index[word]

    def word(self, idx: int) -> str:
        return self.words[idx]

    def count(self, word: str) -> int:
        return self.counts[self._index[word]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (
            self.words == other.words
            and self.counts == other.counts
            and self.min_count == other.min_count
        )

    def __repr__(self) -> str:
        return f"Vocabulary({len(self)} words, min_count={self.min_count})"


class BilingualLexicon:
    """List of (source word, target word) pairs, exact duplicates removed.

    A source word may map to several targets.
    """

    __slots__ = ("pairs",)

    def __init__(self, pairs: Iterable[tuple[str, str]]):
        seen: set[tuple[str, str]] = set()
        kept: list[tuple[str, str]] = []
        for p in pairs:
            ps = (str(p[0]), str(p[1]))
            if ps not in seen:
                seen.add(ps)
                kept.append(ps)
        self.pairs = kept

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(self.pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BilingualLexicon):
            return NotImplemented
        return self.pairs == other.pairs

    def source_words(self) -> list[str]:
        """Distinct source words in order of first occurrence."""
        seen: set[str] = set()
        out: list[str] = []
        for s, _ in self.pairs:
            if s not in seen:
                seen.add(s)
                out.append(s)
        return out

    def grouped(self) -> dict[str, list[str]]:
        """Map each source word to its list of targets (pair order kept)."""
        out: dict[str, list[str]] = {}
        for s, t in self.pairs:
            out.setdefault(s, []).append(t)
        return out

    def target_set(self) -> list[str]:
        """Distinct target words in order of first occurrence."""
        seen: set[str] = set()
        out: list[str] = []
        for _, t in self.pairs:
            if t not in seen:
                seen.add(t)
                out.append(t)
        return out

    def __repr__(self) -> str:
        return f"BilingualLexicon({len(self)} pairs)"


def _decode_line(line: str | bytes, lineno: int) -> str:
    if isinstance(line, bytes):
        try:
            return line.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DataFormatError(f"line {lineno}: invalid UTF-8 byte sequence ({e})") from e
    return line


def tokenize(line: str, rules: CleaningRules = CleaningRules()) -> Sentence:
    """Lowercase, strip punctuation to spaces, split on whitespace."""
    if rules.lowercase:
        line = line.lower()
    if rules.strip_punctuation:
        line = line.translate(_PUNCT_TABLE)
    return line.split()


def clean_corpus(
    raw_lines: Iterable[str | bytes], rules: CleaningRules = CleaningRules()
) -> Iterator[Sentence]:
    """Clean a raw one-sentence-per-line stream into token lists.

    Empty results are dropped. With rules.dedup, every repeat of an
    already-seen cleaned sentence is dropped (global hash set). Bytes
    input is decoded as UTF-8; a bad byte sequence raises
    DataFormatError naming the line number.
    """
    seen: set[tuple[str, ...]] = set()
    for lineno, raw in enumerate(raw_lines, start=1):
        tokens = tokenize(_decode_line(raw, lineno), rules)
        if not tokens:
            continue
        if rules.dedup:
            key = tuple(tokens)
            if key in seen:
                continue
            seen.add(key)
        yield tokens


def build_vocabulary(sentences: Iterable[Sentence], min_count: int = 1) -> Vocabulary:
    """Count words and keep those with frequency >= min_count.

    Ordering is frequency-descending with ascending lexicographic
    tie-break, so indices are deterministic across runs.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: Counter[str] = Counter()
    for sent in sentences:
        counts.update(sent)
    items = [(w, c) for w, c in counts.items() if c >= min_count]
    items.sort(key=lambda wc: (-wc[1], wc[0]))
    return Vocabulary([w for w, _ in items], [c for _, c in items], min_count=min_count)


def corpus_stats(sentences: Iterable[Sentence]) -> CorpusStats:
    """One-pass sentence/token/unique-word counts."""
    n_sentences = 0
    n_tokens = 0
    unique: set[str] = set()
    for sent in sentences:
        n_sentences += 1
        n_tokens += len(sent)
        unique.update(sent)
    return CorpusStats(n_sentences, n_tokens, len(unique))


def load_lexicon(source: Iterable[str | bytes]) -> BilingualLexicon:
    """Parse "src<TAB or space>tgt" lines into a lexicon.

    Pairs are lowercased; exact duplicates are removed, order otherwise
    preserved. Blank lines are skipped. A line that does not split into
    exactly two fields raises DataFormatError naming the line.
    """
    pairs: list[tuple[str, str]] = []
    for lineno, raw in enumerate(source, start=1):
        line = _decode_line(raw, lineno).strip()
        if not line:
            continue
        fields = line.split("\t") if "\t" in line else line.split()
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise DataFormatError(
                f"line {lineno}: expected 'src<TAB>tgt', got {line!r}"
            )
        pairs.append((fields[0].lower(), fields[1].lower()))
    return BilingualLexicon(pairs)


def filter_lexicon(
    lex: BilingualLexicon, src_vocab: Vocabulary, tgt_vocab: Vocabulary
) -> tuple[BilingualLexicon, int]:
    """Keep pairs whose source is in src_vocab and target in tgt_vocab.

    Returns (filtered lexicon, number of dropped pairs).
    """
    kept = [(s, t) for s, t in lex if s in src_vocab and t in tgt_vocab]
    dropped = len(lex) - len(kept)
    if dropped:
        log.info("filter_lexicon: dropped %d of %d pairs not covered by both vocabularies",
                 dropped, len(lex))
    return BilingualLexicon(kept), dropped


def split_lexicon(
    lex: BilingualLexicon, n_val: int, seed: int
) -> tuple[BilingualLexicon, BilingualLexicon]:
    """Split into (train, val) with no source word on both sides.

    All pairs sharing a source word travel together, so val covers
    approximately n_val pairs (exactly n_val when source words are
    unique). Deterministic for a fixed seed.
    """
    if not 0 < n_val < len(lex):
        raise ValueError(f"n_val must be in (0, {len(lex)}), got {n_val}")
    groups = lex.grouped()
    sources = sorted(groups)
    random.Random(seed).shuffle(sources)
    val_sources: set[str] = set()
    n_taken = 0
    for s in sources:
        if n_taken >= n_val:
            break
        val_sources.add(s)
        n_taken += len(groups[s])
    train = [(s, t) for s, t in lex if s not in val_sources]
    val = [(s, t) for s, t in lex if s in val_sources]
    return BilingualLexicon(train), BilingualLexicon(val)
