"""Seeded OCR-style character confusion noise.

Random draws come from SplitMix64 and are consumed in a fixed order so that a
seed reproduces the same corpus bit-for-bit in any language:

* per token: one uniform for selection; if selected, per mappable character
  one uniform for the flip decision, followed (only on a flip) by one uniform
  choosing the replacement; if nothing flipped, one uniform picking the
  mappable position and one picking its replacement;
* with space dropping enabled, one uniform per inter-token separator, drawn
  right after the token that precedes it.

A uniform is ``(next() >> 11) * 2**-53``; a choice among ``n`` options is
``floor(uniform * n)``.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, NamedTuple

__all__ = [
    "MASK64",
    "Rng",
    "DEFAULT_CONFUSIONS",
    "NoiseConfig",
    "TokenOutcome",
    "degrade_word",
    "degrade_tokens",
    "degrade_text",
    "load_confusions",
]

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class Rng:
    """SplitMix64 generator."""

    __slots__ = ("state",)

    def __init__(self, seed: int = 0):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        return int(self.uniform() * n)


# Classic single-character OCR confusions; multi-character ones (rn -> m) are excluded.
DEFAULT_CONFUSIONS: dict[str, tuple[str, ...]] = {
    "o": ("0",),
    "0": ("o",),
    "O": ("0",),
    "l": ("1",),
    "1": ("l",),
    "I": ("1", "l"),
    "i": ("1", "l"),
    "s": ("5",),
    "S": ("5",),
    "5": ("s",),
    "b": ("6", "8"),
    "B": ("8",),
    "g": ("9",),
    "z": ("2",),
    "Z": ("2",),
    "e": ("c",),
    "a": ("o",),
}


@dataclass(frozen=True)
class NoiseConfig:
    word_aug_probability: float = 0.8
    char_aug_probability: float = 0.7
    confusion_table: Mapping[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_CONFUSIONS)
    )
    seed: int = 0
    drop_space_probability: float = 0.0

    def __post_init__(self):
        for name in ("word_aug_probability", "char_aug_probability", "drop_space_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        table = {}
        for ch, reps in self.confusion_table.items():
            reps = tuple(reps)
            if len(ch) != 1:
                raise ValueError(f"confusion keys must be single characters, got {ch!r}")
            if not reps:
                raise ValueError(f"empty replacement list for {ch!r}")
            if ch in reps:
                raise ValueError(f"{ch!r} maps to itself")
            table[ch] = reps
        object.__setattr__(self, "confusion_table", table)
        object.__setattr__(self, "seed", self.seed & MASK64)


def degrade_word(w: str, cfg: NoiseConfig, rng: Rng) -> str:
    """Flip each mappable character with ``char_aug_probability``; at least one flips."""
    table = cfg.confusion_table
    chars = list(w)
    mappable = [i for i, ch in enumerate(chars) if ch in table]
    if not mappable:
        return w
    flipped = False
    for i in mappable:
        if rng.uniform() < cfg.char_aug_probability:
            reps = table[w[i]]
            chars[i] = reps[rng.below(len(reps))]
            flipped = True
    if not flipped:
        i = mappable[rng.below(len(mappable))]
        reps = table[w[i]]
        chars[i] = reps[rng.below(len(reps))]
    return "".join(chars)


class TokenOutcome(NamedTuple):
    index: int
    original: str
    degraded: str
    selected: bool


_TOKEN = re.compile(r"\S+")


def _split(text: str) -> tuple[list[str], list[str]]:
    """Tokens and the separators around them: ``seps[0] tok0 seps[1] ... tokN-1 seps[N]``."""
    toks: list[str] = []
    seps: list[str] = []
    pos = 0
    for m in _TOKEN.finditer(text):
        seps.append(text[pos : m.start()])
        toks.append(m.group(0))
        pos = m.end()
    seps.append(text[pos:])
    return toks, seps


def degrade_tokens(text: str, cfg: NoiseConfig, rng: Rng | None = None) -> Iterator[TokenOutcome]:
    """Per-token outcomes, in order, without space dropping."""
    rng = rng or Rng(cfg.seed)
    toks, _ = _split(text)
    for i, tok in enumerate(toks):
        if rng.uniform() < cfg.word_aug_probability:
            yield TokenOutcome(i, tok, degrade_word(tok, cfg, rng), True)
        else:
            yield TokenOutcome(i, tok, tok, False)


def degrade_text(text: str, cfg: NoiseConfig) -> tuple[str, list[tuple[int, str, str]]]:
    """Degrade ``text`` and return it with a log of ``(token index, original, degraded)``.

    Whitespace is kept exactly unless ``drop_space_probability`` removes an
    inter-token separator (dropped separators are not logged).
    """
    rng = Rng(cfg.seed)
    toks, seps = _split(text)
    out = [seps[0]]
    log: list[tuple[int, str, str]] = []
    for i, tok in enumerate(toks):
        new = degrade_word(tok, cfg, rng) if rng.uniform() < cfg.word_aug_probability else tok
        if new != tok:
            log.append((i, tok, new))
        out.append(new)
        sep = seps[i + 1]
        if cfg.drop_space_probability > 0 and i < len(toks) - 1:
            if rng.uniform() < cfg.drop_space_probability:
                sep = ""
        out.append(sep)
    return "".join(out), log


def load_confusions(path: str | os.PathLike) -> dict[str, tuple[str, ...]]:
    """Read a two-column TSV: character, then a string of its replacements."""
    table: dict[str, tuple[str, ...]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        ch, sep, reps = line.partition("\t")
        if not sep or len(ch) != 1 or not reps:
            raise ValueError(f"{path}:{lineno}: expected 'char<TAB>replacements', got {line!r}")
        table[ch] = tuple(reps)
    return table
