"""Latency comparison of symmetric-delete lookup against Norvig edits2 correction."""

from __future__ import annotations

import statistics
import time

from .lexicon import Lexicon
from .noisegen import Rng
from .spellfix import ALPHABET, build_delete_index, norvig_correct, symspell_lookup


def make_queries(lex: Lexicon, n: int, length: int = 8, seed: int = 0) -> list[str]:
    """Misspellings of ``length``-letter lexicon words with no known word one edit away.

    Two random substitutions per word; candidates with a distance-1 neighbour
    are rejected so Norvig correction always has to enumerate edits2.
    """
    rng = Rng(seed)
    pool = [w for w in lex.words[:20000] if len(w) == length and w.isascii() and w.isalpha()]
    if not pool:
        raise ValueError(f"lexicon has no {length}-letter words")
    near = build_delete_index(lex, 1, 7)
    queries: list[str] = []
    attempts = 0
    while len(queries) < n:
        attempts += 1
        if attempts > 1000 * n:
            raise RuntimeError("could not generate enough edits2-only queries")
        chars = list(pool[rng.below(len(pool))])
        for pos in (rng.below(length), rng.below(length)):
            chars[pos] = ALPHABET[rng.below(26)]
        q = "".join(chars)
        if q in lex or symspell_lookup(near, q):
            continue
        queries.append(q)
    return queries


def _median_latency(fn, queries: list[str]) -> tuple[float, list[float]]:
    samples = []
    for q in queries:
        t = time.perf_counter()
        fn(q)
        samples.append(time.perf_counter() - t)
    return statistics.median(samples), samples


def bench_spellfix(
    lex: Lexicon,
    *,
    size: int = 80000,
    runs: int = 30,
    query_length: int = 8,
    max_edit_distance: int = 2,
    seed: int = 0,
) -> dict:
    """Median per-query latency of both methods over ``runs`` queries (≥ 30 recommended)."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    lex = lex.top(size) if size and size < len(lex) else lex
    queries = make_queries(lex, runs, query_length, seed)

    t = time.perf_counter()
    idx = build_delete_index(lex, max_edit_distance, 7)
    build_s = time.perf_counter() - t

    sym_med, _ = _median_latency(lambda q: symspell_lookup(idx, q), queries)
    nor_med, _ = _median_latency(lambda q: norvig_correct(q, lex), queries)
    speedup = nor_med / sym_med if sym_med > 0 else float("inf")
    return {
        "lexicon_size": len(lex),
        "query_length": query_length,
        "runs": runs,
        "max_edit_distance": max_edit_distance,
        "index_keys": len(idx),
        "index_build_s": build_s,
        "symspell_median_s": sym_med,
        "norvig_median_s": nor_med,
        "speedup": speedup,
        "meets_6x": speedup >= 6.0,
    }
