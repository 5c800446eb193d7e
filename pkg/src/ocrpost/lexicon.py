"""Ranked word-frequency tables and Zipf word costs."""

from __future__ import annotations

import gzip
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

__all__ = [
    "LexiconError",
    "Lexicon",
    "load_lexicon",
    "parse_lexicon",
    "default_lexicon",
    "default_lexicon_path",
    "LEXICON_ENV",
]

LEXICON_ENV = "OCRPOST_LEXICON"
_DEFAULT_RESOURCE = "words_en.txt.gz"


class LexiconError(ValueError):
    """Raised for empty or malformed frequency lists."""


@dataclass(frozen=True)
class _Entry:
    count: int
    rank: int


class Lexicon:
    """Immutable word -> (count, rank) table.

    Ranks run 1..N by descending count, ties broken lexicographically. Lookups
    are case-insensitive. ``N`` is the number of distinct words, and at least
    two are required so that ``ln N > 0``.
    """

    def __init__(self, counts: Mapping[str, int]):
        merged: dict[str, int] = {}
        for word, count in counts.items():
            if count < 0:
                raise LexiconError(f"negative count for {word!r}")
            key = word.lower()
            merged[key] = merged.get(key, 0) + count
        if len(merged) < 2:
            raise LexiconError(f"a lexicon needs at least 2 distinct words, got {len(merged)}")
        ordered = sorted(merged.items(), key=lambda kv: (-kv[1], kv[0]))
        self._entries = {w: _Entry(c, i) for i, (w, c) in enumerate(ordered, 1)}
        self._words = tuple(w for w, _ in ordered)
        self.max_word_len = max(len(w) for w in self._words)
        self._log_n = math.log(len(self._words))

    @classmethod
    def from_ranked(cls, words: Iterable[str]) -> "Lexicon":
        """Build from a most-frequent-first word list (first occurrence wins).

        Counts are synthesised as ``N - rank + 1`` so count order equals list order.
        """
        seen: dict[str, None] = {}
        for w in words:
            seen.setdefault(w.lower(), None)
        n = len(seen)
        return cls({w: n - i for i, w in enumerate(seen)})

    @property
    def total_words(self) -> int:
        return len(self._words)

    def __len__(self):
        return len(self._words)

    def __contains__(self, word: object) -> bool:
        return isinstance(word, str) and word.lower() in self._entries

    def __iter__(self):
        return iter(self._words)

    @property
    def words(self) -> tuple[str, ...]:
        """Words in rank order."""
        return self._words

    def rank(self, word: str) -> int | None:
        e = self._entries.get(word.lower())
        return e.rank if e else None

    def count(self, word: str) -> int:
        e = self._entries.get(word.lower())
        return e.count if e else 0

    def word_cost(self, word: str) -> float | None:
        """``ln(rank * ln N)``, or ``None`` for unknown words."""
        e = self._entries.get(word.lower())
        if e is None:
            return None
        return math.log(e.rank * self._log_n)

    def oov_base_cost(self) -> float:
        """``ln(N * ln N)``: the cost of the least frequent known word."""
        return math.log(len(self._words) * self._log_n)

    def top(self, n: int) -> "Lexicon":
        """Sub-lexicon of the ``n`` most frequent words, counts preserved."""
        return Lexicon({w: self._entries[w].count for w in self._words[:n]})

    def __repr__(self):
        return f"Lexicon(N={len(self._words)}, max_word_len={self.max_word_len})"


def parse_lexicon(lines: Iterable[str], source: str = "<lexicon>") -> Lexicon:
    """Parse a frequency list: ``word`` per line (rank order) or ``word<TAB>count``.

    The first non-blank line decides the format; every later line must follow it.
    """
    ranked: list[str] = []
    counts: dict[str, int] = {}
    counted: bool | None = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        has_tab = "\t" in line
        if counted is None:
            counted = has_tab
        if counted != has_tab:
            kind = "word<TAB>count" if counted else "bare word"
            raise LexiconError(f"{source}:{lineno}: expected a {kind} line, got {line!r}")
        if counted:
            word, _, count_s = line.partition("\t")
            word = word.strip()
            try:
                count = int(count_s.strip())
            except ValueError:
                raise LexiconError(f"{source}:{lineno}: malformed count {count_s!r}") from None
            if not word or count < 0:
                raise LexiconError(f"{source}:{lineno}: malformed entry {line!r}")
            key = word.lower()
            counts[key] = counts.get(key, 0) + count
        else:
            ranked.append(line.strip())
    if counted is None:
        raise LexiconError(f"{source}: empty lexicon")
    return Lexicon(counts) if counted else Lexicon.from_ranked(ranked)


def load_lexicon(path: str | os.PathLike) -> Lexicon:
    """Load a UTF-8 frequency list; ``.gz`` files are decompressed transparently."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rt", encoding="utf-8") as fh:
            return parse_lexicon(fh, source=str(path))
    except OSError as exc:
        raise LexiconError(f"cannot read lexicon {path}: {exc}") from exc


def default_lexicon_path() -> Path:
    """``$OCRPOST_LEXICON`` if set, else the bundled English rank list."""
    env = os.environ.get(LEXICON_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("ocrpost") / "data" / _DEFAULT_RESOURCE))


@lru_cache(maxsize=4)
def _cached(path: str) -> Lexicon:
    return load_lexicon(path)


def default_lexicon() -> Lexicon:
    return _cached(str(default_lexicon_path()))
