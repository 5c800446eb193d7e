"""Token spelling correction: Norvig edit tiers and a symmetric-delete index."""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

from .lexicon import Lexicon
from .metrics import osa_distance

__all__ = [
    "ALPHABET",
    "edits1",
    "edits2",
    "norvig_correct",
    "Suggestion",
    "DeleteIndex",
    "delete_variants",
    "build_delete_index",
    "symspell_lookup",
    "symspell_correct",
    "apply_case",
    "correct_sentence",
]

ALPHABET = string.ascii_lowercase
_ASCII_WORD = re.compile(r"[a-z]+")


# --- Norvig ------------------------------------------------------------------

def edits1(word: str) -> set[str]:
    """All strings one delete, adjacent transpose, replace or insert away."""
    splits = [(word[:i], word[i:]) for i in range(len(word) + 1)]
    deletes = [a + b[1:] for a, b in splits if b]
    transposes = [a + b[1] + b[0] + b[2:] for a, b in splits if len(b) > 1]
    replaces = [a + c + b[1:] for a, b in splits if b for c in ALPHABET]
    inserts = [a + c + b for a, b in splits for c in ALPHABET]
    return set(deletes + transposes + replaces + inserts)


def edits2(word: str) -> Iterable[str]:
    return (e2 for e1 in edits1(word) for e2 in edits1(e1))


def _best(cands: Iterable[str], lex: Lexicon) -> str | None:
    known = {w for w in cands if w in lex}
    if not known:
        return None
    return min(known, key=lambda w: (-lex.count(w), w))


def norvig_correct(word: str, lex: Lexicon) -> str:
    """Most frequent known word in the first non-empty tier: the word, edits1, edits2.

    Works on the lowercased word; non a-z words are returned unchanged unless
    already known.
    """
    w = word.lower()
    if w in lex:
        return w
    if not _ASCII_WORD.fullmatch(w):
        return word
    return _best(edits1(w), lex) or _best(edits2(w), lex) or word


# --- symmetric delete --------------------------------------------------------

class Suggestion(NamedTuple):
    word: str
    distance: int
    count: int


def delete_variants(word: str, max_distance: int, prefix_length: int) -> set[str]:
    """``word[:prefix_length]`` and every string reached by up to ``max_distance`` deletions from it."""
    key = word[:prefix_length]
    out = {key}
    frontier = {key}
    for _ in range(max_distance):
        nxt = set()
        for s in frontier:
            for i in range(len(s)):
                d = s[:i] + s[i + 1 :]
                if d not in out:
                    nxt.add(d)
        out |= nxt
        frontier = nxt
        if not frontier:
            break
    return out


@dataclass(frozen=True)
class DeleteIndex:
    max_edit_distance: int
    prefix_length: int
    map: dict[str, tuple[str, ...]]
    source: Lexicon

    def __len__(self):
        return len(self.map)


def build_delete_index(
    lex: Lexicon, max_edit_distance: int = 2, prefix_length: int = 7
) -> DeleteIndex:
    if not 1 <= max_edit_distance <= 3:
        raise ValueError(f"max_edit_distance must be in 1..3, got {max_edit_distance}")
    if prefix_length < max_edit_distance + 1:
        raise ValueError("prefix_length must exceed max_edit_distance")
    buckets: dict[str, list[str]] = {}
    for word in lex.words:
        for v in delete_variants(word, max_edit_distance, prefix_length):
            bucket = buckets.get(v)
            if bucket is None:
                buckets[v] = [word]
            else:
                bucket.append(word)
    return DeleteIndex(
        max_edit_distance,
        prefix_length,
        {k: tuple(v) for k, v in buckets.items()},
        lex,
    )


def symspell_lookup(idx: DeleteIndex, word: str) -> list[Suggestion]:
    """Every indexed word within ``max_edit_distance`` (OSA) of ``word``.

    Sorted by distance, then descending count, then alphabetically.
    """
    w = word.lower()
    d = idx.max_edit_distance
    lex = idx.source
    seen: set[str] = set()
    out: list[Suggestion] = []
    for v in delete_variants(w, d, idx.prefix_length):
        for cand in idx.map.get(v, ()):
            if cand in seen:
                continue
            seen.add(cand)
            if abs(len(cand) - len(w)) > d:
                continue
            dist = 0 if cand == w else osa_distance(w, cand, d)
            if dist <= d:
                out.append(Suggestion(cand, dist, lex.count(cand)))
    out.sort(key=lambda s: (s.distance, -s.count, s.word))
    return out


def symspell_correct(word: str, idx: DeleteIndex) -> str:
    hits = symspell_lookup(idx, word)
    return hits[0].word if hits else word


# --- sentence level ----------------------------------------------------------

def apply_case(template: str, word: str) -> str:
    """Copy the casing pattern of ``template`` onto ``word``."""
    letters = [ch for ch in template if ch.isalpha()]
    if letters and all(ch.isupper() for ch in letters):
        return word.upper()
    if letters and letters[0].isupper() and template[:1].isupper():
        return word[:1].upper() + word[1:].lower()
    return word.lower()


def _split_punct(tok: str) -> tuple[str, str, str]:
    i, j = 0, len(tok)
    while i < j and not tok[i].isalnum():
        i += 1
    while j > i and not tok[j - 1].isalnum():
        j -= 1
    return tok[:i], tok[i:j], tok[j:]


def correct_sentence(text: str, corrector: Callable[[str], str]) -> str:
    """Apply a single-word corrector to every token, keeping layout and casing.

    Punctuation at either end of a token is detached before correction and put
    back afterwards. Tokens containing digits are left alone, and a core the
    corrector returns unchanged keeps its original casing.
    """

    def fix(m: re.Match) -> str:
        tok = m.group(0)
        if any(ch.isdigit() for ch in tok):
            return tok
        lead, core, trail = _split_punct(tok)
        if not core:
            return tok
        fixed = corrector(core.lower())
        if fixed == core.lower():
            return tok
        return lead + apply_case(core, fixed) + trail

    return re.sub(r"\S+", fix, text)
