"""Edit distances and character/word error rates."""

from __future__ import annotations

import unicodedata
from dataclasses import asdict, dataclass, field
from typing import Hashable, Iterable, Sequence

__all__ = [
    "Transcript",
    "ItemScore",
    "EvalReport",
    "levenshtein",
    "osa_distance",
    "cer",
    "wer",
    "evaluate_corpus",
]


def levenshtein(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Unit-cost insert/delete/substitute distance between two sequences.

    Works on strings (characters) and on token lists alike. Memory is one row
    over the shorter input.
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def osa_distance(a: str, b: str, max_distance: int | None = None) -> int:
    """Optimal string alignment (restricted Damerau-Levenshtein) distance.

    An adjacent transposition counts as one edit; a transposed pair is never
    edited again. With ``max_distance`` set, returns ``max_distance + 1`` as
    soon as the distance is known to exceed it.
    """
    la, lb = len(a), len(b)
    if max_distance is not None and abs(la - lb) > max_distance:
        return max_distance + 1
    if not la or not lb:
        return max(la, lb)
    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        ai = a[i - 1]
        for j in range(1, lb + 1):
            bj = b[j - 1]
            d = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ai != bj))
            if i > 1 and j > 1 and ai == b[j - 2] and a[i - 2] == bj and ai != bj:
                d = min(d, prev2[j - 2] + 1)
            cur[j] = d
        if max_distance is not None and min(cur) > max_distance:
            return max_distance + 1
        prev2, prev = prev, cur
    d = prev[lb]
    return max_distance + 1 if max_distance is not None and d > max_distance else d


def _normalize(text: str, case_fold: bool) -> str:
    text = unicodedata.normalize("NFC", text)
    return text.casefold() if case_fold else text


@dataclass(frozen=True)
class Transcript:
    """A hypothesis (OCR / corrected output) paired with its ground truth."""

    hypothesis: str
    reference: str
    id: str = ""

    def char_counts(self, case_fold: bool = False) -> tuple[int, int]:
        """(edit distance, reference length) over NFC characters, spaces included."""
        ref = _normalize(self.reference, case_fold)
        if not ref:
            raise ValueError(f"empty reference{f' for {self.id!r}' if self.id else ''}")
        hyp = _normalize(self.hypothesis, case_fold)
        return levenshtein(hyp, ref), len(ref)

    def word_counts(self, case_fold: bool = False) -> tuple[int, int]:
        """(edit distance, reference length) over whitespace tokens."""
        ref = _normalize(self.reference, case_fold).split()
        if not ref:
            raise ValueError(
                f"reference has no tokens{f' for {self.id!r}' if self.id else ''}"
            )
        hyp = _normalize(self.hypothesis, case_fold).split()
        return levenshtein(hyp, ref), len(ref)


def cer(t: Transcript, case_fold: bool = False) -> float:
    dist, n = t.char_counts(case_fold)
    return dist / n


def wer(t: Transcript, case_fold: bool = False) -> float:
    dist, n = t.word_counts(case_fold)
    return dist / n


@dataclass(frozen=True)
class ItemScore:
    id: str
    cer: float
    wer: float
    char_errors: int
    char_total: int
    word_errors: int
    word_total: int


@dataclass
class EvalReport:
    per_item: list[ItemScore] = field(default_factory=list)
    aggregate_cer: float = 0.0
    aggregate_wer: float = 0.0
    averaging: str = "micro"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            per_item=[ItemScore(**item) for item in data["per_item"]],
            aggregate_cer=data["aggregate_cer"],
            aggregate_wer=data["aggregate_wer"],
            averaging=data.get("averaging", "micro"),
        )


def evaluate_corpus(
    pairs: Iterable[Transcript], case_fold: bool = False, averaging: str = "micro"
) -> EvalReport:
    """Score each pair and aggregate.

    ``micro`` (default) divides total edits by total reference units; ``macro``
    takes the plain mean of the per-item rates.
    """
    if averaging not in ("micro", "macro"):
        raise ValueError(f"averaging must be 'micro' or 'macro', not {averaging!r}")
    items: list[ItemScore] = []
    for i, t in enumerate(pairs):
        cd, cn = t.char_counts(case_fold)
        wd, wn = t.word_counts(case_fold)
        items.append(ItemScore(t.id or str(i), cd / cn, wd / wn, cd, cn, wd, wn))
    if not items:
        raise ValueError("cannot evaluate an empty corpus")
    if averaging == "micro":
        agg_cer = sum(s.char_errors for s in items) / sum(s.char_total for s in items)
        agg_wer = sum(s.word_errors for s in items) / sum(s.word_total for s in items)
    else:
        agg_cer = sum(s.cer for s in items) / len(items)
        agg_wer = sum(s.wer for s in items) / len(items)
    return EvalReport(items, agg_cer, agg_wer, averaging)
