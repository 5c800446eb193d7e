"""Insert missing spaces by minimising summed Zipf word costs."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .lexicon import Lexicon

__all__ = [
    "SegmentationResult",
    "RespaceOptions",
    "token_cost",
    "boundary_allowed",
    "segment_run",
    "respace",
    "respace_text",
    "despace",
]

MAX_CANDIDATE_LEN = 24
DEFAULT_OOV_CHAR_COST = 8.0

_WS = re.compile(r"\s+")
_RUN = re.compile(r"\S+")


@dataclass(frozen=True)
class RespaceOptions:
    oov_char_cost: float = DEFAULT_OOV_CHAR_COST
    max_candidate_len: int = MAX_CANDIDATE_LEN


@dataclass
class SegmentationResult:
    tokens: list[str] = field(default_factory=list)
    total_cost: float = 0.0
    # (start, end) offsets of each token in the whitespace-free input
    input_span_map: list[tuple[int, int]] = field(default_factory=list)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def despace(text: str) -> str:
    return _WS.sub("", text)


def _strip_punct(tok: str) -> str:
    i, j = 0, len(tok)
    while i < j and not tok[i].isalnum():
        i += 1
    while j > i and not tok[j - 1].isalnum():
        j -= 1
    return tok[i:j]


def token_cost(tok: str, lex: Lexicon, oov_char_cost: float = DEFAULT_OOV_CHAR_COST) -> float:
    """Cost of emitting ``tok`` as one word.

    Known words cost ``ln(rank * ln N)``. Leading/trailing punctuation is free
    when what remains is a known word, so "ones." costs the same as "ones".
    Anything else is out of vocabulary: ``ln(N ln N) + oov_char_cost * len``.
    """
    c = lex.word_cost(tok)
    if c is not None:
        return c
    core = _strip_punct(tok)
    if core and core != tok:
        c = lex.word_cost(core)
        if c is not None:
            return c
    return lex.oov_base_cost() + oov_char_cost * len(tok)


def boundary_allowed(run: str, i: int) -> bool:
    """Whether a space may be inserted before ``run[i]``.

    Digits stay glued to adjacent letters and digits so numbers and codes
    like "B17" are never split.
    """
    a, b = run[i - 1], run[i]
    if a.isdigit() and b.isalnum():
        return False
    if b.isdigit() and a.isalnum():
        return False
    return True


def segment_run(run: str, lex: Lexicon, opts: RespaceOptions = RespaceOptions()) -> SegmentationResult:
    """Optimal segmentation of a single whitespace-free run.

    ``best[i]`` holds ``(cost, tokens, -last_len)`` for the prefix ``run[:i]``;
    comparing these tuples breaks cost ties toward fewer tokens and then a
    longer final token.

    Candidates up to ``min(len(run), max_word_len, max_candidate_len)`` are
    scored in full. Anything longer can only be out of vocabulary, and its cost
    is linear in length, so the best such candidate ending at ``i`` comes from
    a running minimum of ``best[j].cost - oov_char_cost * j``.
    """
    n = len(run)
    if n == 0:
        return SegmentationResult()
    cap = min(n, lex.max_word_len, opts.max_candidate_len)
    per_char = opts.oov_char_cost
    base = lex.oov_base_cost()
    cost_of = {}

    def tc(s: str) -> float:
        c = cost_of.get(s)
        if c is None:
            c = cost_of[s] = token_cost(s, lex, per_char)
        return c

    cut_ok = [True] + [boundary_allowed(run, i) for i in range(1, n)] + [True]
    inf = (math.inf, 0, 0)
    best: list[tuple[float, int, int]] = [(0.0, 0, 0)] + [inf] * n
    back = [0] * (n + 1)
    # running minimum over start points j <= i - cap - 1, keyed so that the
    # tuple order matches the order of the resulting candidates
    far: tuple[float, int, int] | None = None
    for i in range(1, n + 1):
        j = i - cap - 1
        if j >= 0 and cut_ok[j] and best[j][0] != math.inf:
            key = (best[j][0] - per_char * j, best[j][1], j)
            if far is None or key < far:
                far = key
        if not cut_ok[i]:
            continue
        cand = inf
        klen = 0
        for k in range(1, min(i, cap) + 1):
            j = i - k
            if not cut_ok[j] or best[j][0] == math.inf:
                continue
            prev = best[j]
            t = (prev[0] + tc(run[j:i]), prev[1] + 1, -k)
            if t < cand:
                cand, klen = t, k
        if far is not None:
            j = far[2]
            t = (best[j][0] + base + per_char * (i - j), far[1] + 1, j - i)
            if t < cand:
                cand, klen = t, i - j
        best[i], back[i] = cand, klen

    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    i = n
    while i > 0:
        k = back[i]
        tokens.append(run[i - k : i])
        spans.append((i - k, i))
        i -= k
    tokens.reverse()
    spans.reverse()
    return SegmentationResult(tokens, best[n][0], spans)


def respace(text: str, lex: Lexicon, opts: RespaceOptions = RespaceOptions()) -> SegmentationResult:
    """Segment ``text``, keeping its existing spaces as hard boundaries.

    Characters keep their original case; spans index into ``despace(text)``.
    """
    out = SegmentationResult()
    offset = 0
    for m in _RUN.finditer(text):
        part = segment_run(m.group(0), lex, opts)
        out.tokens.extend(part.tokens)
        out.total_cost += part.total_cost
        out.input_span_map.extend((s + offset, e + offset) for s, e in part.input_span_map)
        offset += len(m.group(0))
    return out


def respace_text(text: str, lex: Lexicon, opts: RespaceOptions = RespaceOptions()) -> str:
    """Like :func:`respace` but returns a string, preserving the original separators."""
    return _RUN.sub(lambda m: segment_run(m.group(0), lex, opts).text, text)
