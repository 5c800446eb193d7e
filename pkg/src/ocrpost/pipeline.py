"""Segment -> classify -> OCR -> post-process -> assemble, with pluggable backends.

Neural models are not part of this package: the line classifier and the OCR
engine are reached through subprocess commands (or a transcript file), so any
recogniser that can be invoked from a shell can be plugged in.
"""

from __future__ import annotations

import json
import logging
import shlex
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .imagecore import INK, GrayImage, binarize, load_image, save_pgm
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .linesegment import SegmentationOutput, segment_document
from .metrics import EvalReport, Transcript, evaluate_corpus
from .respace import RespaceOptions, respace_text
from .spellfix import DeleteIndex, build_delete_index, correct_sentence, norvig_correct, symspell_correct

log = logging.getLogger(__name__)

__all__ = [
    "SCHEMA_VERSION",
    "BackendError",
    "PipelineConfig",
    "LineRecord",
    "RunReport",
    "Resources",
    "classify_line",
    "run_ocr",
    "postprocess",
    "chunk_words",
    "run_document",
    "normalize_chain",
]

SCHEMA_VERSION = 1
LABELS = ("handwritten", "printed", "unknown")
STAGES = ("respace", "spellfix-norvig", "spellfix-symspell")
_STAGE_ALIASES = {
    "respace": "respace",
    "norvig": "spellfix-norvig",
    "spellfix-norvig": "spellfix-norvig",
    "symspell": "spellfix-symspell",
    "spellfix-symspell": "spellfix-symspell",
}
DEFAULT_CHAIN = ("respace", "spellfix-symspell")


class BackendError(RuntimeError):
    """An external classifier or OCR command failed or produced unusable output."""


def normalize_chain(chain: str | Sequence[str]) -> tuple[str, ...]:
    """Map stage names and aliases (``symspell``, ``norvig``) to canonical stage ids."""
    if isinstance(chain, str):
        chain = [s for s in (p.strip() for p in chain.split(",")) if s]
    out = []
    for stage in chain:
        try:
            out.append(_STAGE_ALIASES[stage])
        except KeyError:
            raise ValueError(f"unknown post-processing stage {stage!r}; choose from {STAGES}") from None
    return tuple(out)


@dataclass
class PipelineConfig:
    """How a document is processed.

    ``ocr_command`` is a template such as ``"my-ocr {path} --kind {label}"``;
    ``transcript_path`` instead supplies one pre-recognised line per crop.
    ``classifier`` is ``"heuristic"``, ``"fixed:<label>"`` or ``"cmd:<template>"``.
    """

    ocr_command: str | None = None
    transcript_path: str | None = None
    classifier: str = "fixed:unknown"
    postprocess_chain: tuple[str, ...] = DEFAULT_CHAIN
    lexicon_path: str | None = None
    chunk_size: int = 128
    timeout: float = 120.0
    workers: int = 1
    max_edit_distance: int = 2
    prefix_length: int = 7
    oov_char_cost: float = 8.0
    heuristic_threshold: float = 4.0

    def __post_init__(self):
        self.postprocess_chain = normalize_chain(self.postprocess_chain)
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


class Resources:
    """Lazily loaded lexicon and delete index shared by all line workers (read-only once built)."""

    def __init__(self, cfg: PipelineConfig, lexicon: Lexicon | None = None):
        self.cfg = cfg
        self._lexicon = lexicon
        self._index: DeleteIndex | None = None

    @property
    def lexicon(self) -> Lexicon:
        if self._lexicon is None:
            path = self.cfg.lexicon_path
            self._lexicon = load_lexicon(path) if path else default_lexicon()
        return self._lexicon

    @property
    def index(self) -> DeleteIndex:
        if self._index is None:
            self._index = build_delete_index(
                self.lexicon, self.cfg.max_edit_distance, self.cfg.prefix_length
            )
        return self._index

    def warm(self) -> None:
        chain = self.cfg.postprocess_chain
        if chain:
            self.lexicon
        if "spellfix-symspell" in chain:
            self.index


# --- classification ----------------------------------------------------------

def ink_run_variance(crop: GrayImage) -> float | None:
    """Variance of horizontal ink run lengths across all rows (None if no ink)."""
    ink = binarize(crop).pixels == INK
    runs: list[int] = []
    for row in ink:
        if not row.any():
            continue
        padded = np.concatenate(([False], row, [False])).astype(np.int8)
        edges = np.flatnonzero(np.diff(padded))
        runs.extend((edges[1::2] - edges[0::2]).tolist())
    if not runs:
        return None
    return float(np.var(runs))


def _run_command(argv: list[str], timeout: float) -> str:
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except FileNotFoundError as exc:
        raise BackendError(f"command not found: {argv[0]}") from exc
    except subprocess.TimeoutExpired as exc:
        raise BackendError(f"command timed out after {timeout:g}s: {shlex.join(argv)}") from exc
    if proc.returncode != 0:
        raise BackendError(
            f"command exited with status {proc.returncode}: {shlex.join(argv)}\n{proc.stderr.strip()}"
        )
    return proc.stdout


def _expand(template: str, **values: str) -> list[str]:
    return [part.format(**values) for part in shlex.split(template)]


def classify_line(
    crop: GrayImage, cfg: PipelineConfig, crop_path: str | None = None
) -> tuple[str, float]:
    """Label a line crop ``handwritten``/``printed``/``unknown`` with a confidence.

    The heuristic mode thresholds the variance of ink run lengths: machine
    print has regular stroke widths, handwriting does not.
    """
    mode, _, arg = cfg.classifier.partition(":")
    if mode == "fixed":
        label = arg or "unknown"
        if label not in LABELS:
            raise ValueError(f"unknown class label {label!r}")
        return label, 1.0
    if mode == "heuristic":
        var = ink_run_variance(crop)
        if var is None:
            return "unknown", 0.0
        thr = cfg.heuristic_threshold
        conf = 0.5 + 0.5 * abs(var - thr) / (var + thr)
        return ("printed" if var < thr else "handwritten"), conf
    if mode == "cmd":
        if crop_path is None:
            raise ValueError("external classifier needs the crop written to disk")
        out = _run_command(_expand(arg, path=crop_path), cfg.timeout).strip()
        label, sep, conf_s = out.partition("\t")
        try:
            conf = float(conf_s)
        except ValueError:
            conf = -1.0
        if not sep or label not in LABELS or not 0.0 <= conf <= 1.0:
            raise BackendError(f"classifier output must be 'label<TAB>confidence', got {out!r}")
        return label, conf
    raise ValueError(f"unknown classifier mode {cfg.classifier!r}")


# --- OCR ---------------------------------------------------------------------

def _read_transcript(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def run_ocr(
    crop_path: str,
    class_label: str,
    cfg: PipelineConfig,
    index: int = 0,
    transcript: Sequence[str] | None = None,
) -> str:
    """Recognise one line, via the command template or the transcript.

    Raises :class:`BackendError` on command failure, timeout or a missing
    transcript line; :func:`run_document` turns that into a flagged empty line.
    """
    if cfg.ocr_command:
        out = _run_command(_expand(cfg.ocr_command, path=crop_path, label=class_label), cfg.timeout)
        return out.rstrip("\r\n")
    if transcript is None:
        if cfg.transcript_path is None:
            raise ValueError("configure either ocr_command or transcript_path")
        transcript = _read_transcript(cfg.transcript_path)
    if not 0 <= index < len(transcript):
        raise BackendError(f"transcript has no line {index}")
    return transcript[index]


# --- post-processing ---------------------------------------------------------

def _stage_fn(stage: str, res: Resources) -> Callable[[str], str]:
    if stage == "respace":
        opts = RespaceOptions(oov_char_cost=res.cfg.oov_char_cost)
        lex = res.lexicon
        return lambda t: respace_text(t, lex, opts)
    if stage == "spellfix-norvig":
        lex = res.lexicon
        return lambda t: correct_sentence(t, lambda w: norvig_correct(w, lex))
    if stage == "spellfix-symspell":
        idx = res.index
        return lambda t: correct_sentence(t, lambda w: symspell_correct(w, idx))
    raise ValueError(f"unknown post-processing stage {stage!r}")


def postprocess(text: str, cfg: PipelineConfig, res: Resources | None = None) -> str:
    """Run ``text`` through the configured chain, in order."""
    if not cfg.postprocess_chain:
        return text
    res = res or Resources(cfg)
    for stage in cfg.postprocess_chain:
        text = _stage_fn(stage, res)(text)
    return text


def chunk_words(text: str, chunk_size: int = 128) -> list[str]:
    """Group whitespace tokens into consecutive chunks of ``chunk_size`` words."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    toks = text.split()
    return [" ".join(toks[i : i + chunk_size]) for i in range(0, len(toks), chunk_size)]


# --- reports -----------------------------------------------------------------

@dataclass
class LineRecord:
    index: int
    crop_path: str
    class_label: str
    confidence: float
    ocr_text: str
    corrected_text: str
    error: str | None = None

    @property
    def flagged(self) -> bool:
        return self.error is not None


@dataclass
class RunReport:
    lines: list[LineRecord] = field(default_factory=list)
    document_text: str = ""
    metrics: EvalReport | None = None
    timings: dict[str, float] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        d = asdict(self)
        d["metrics"] = self.metrics.to_dict() if self.metrics else None
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema_version {version!r}")
        return cls(
            lines=[LineRecord(**ln) for ln in data["lines"]],
            document_text=data["document_text"],
            metrics=EvalReport.from_dict(data["metrics"]) if data.get("metrics") else None,
            timings=dict(data.get("timings", {})),
            schema_version=version,
        )

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def run_document(
    image_path: str,
    cfg: PipelineConfig,
    reference_path: str | None = None,
    *,
    crop_dir: str | None = None,
    resources: Resources | None = None,
) -> RunReport:
    """Process one page image end to end.

    Crops are written as ``line_NNN.pgm`` to ``crop_dir`` (a temporary
    directory that is kept for the report's ``crop_path`` entries if none is
    given). Per-line backend failures are recorded on the line and leave its
    text empty; segmentation failures propagate.
    """
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    img = load_image(image_path)
    seg: SegmentationOutput = segment_document(img)
    timings["segment"] = time.perf_counter() - t0

    if crop_dir is None:
        crop_dir = tempfile.mkdtemp(prefix="ocrpost-")
    out_dir = Path(crop_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, crop in enumerate(seg.crops):
        p = out_dir / f"line_{i:03d}.pgm"
        save_pgm(crop, p)
        paths.append(str(p))

    transcript = _read_transcript(cfg.transcript_path) if cfg.transcript_path and not cfg.ocr_command else None
    res = resources or Resources(cfg)
    t0 = time.perf_counter()
    res.warm()
    timings["load_resources"] = time.perf_counter() - t0

    def work(i: int) -> tuple[LineRecord, tuple[float, float, float]]:
        err = None
        t = time.perf_counter()
        try:
            label, conf = classify_line(seg.crops[i], cfg, paths[i])
        except BackendError as exc:
            label, conf, err = "unknown", 0.0, f"classifier: {exc}"
        t1 = time.perf_counter()
        try:
            text = run_ocr(paths[i], label, cfg, i, transcript)
        except BackendError as exc:
            log.warning("line %d: OCR failed: %s", i, exc)
            text, err = "", f"ocr: {exc}"
        t2 = time.perf_counter()
        fixed = postprocess(text, cfg, res) if text else text
        t3 = time.perf_counter()
        return LineRecord(i, paths[i], label, conf, text, fixed, err), (t1 - t, t2 - t1, t3 - t2)

    if cfg.workers > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(work, range(len(paths))))
    else:
        results = [work(i) for i in range(len(paths))]
    lines = [rec for rec, _ in results]
    for k, name in enumerate(("classify", "ocr", "postprocess")):
        timings[name] = sum(t[k] for _, t in results)

    report = RunReport(lines=lines, document_text="\n".join(ln.corrected_text for ln in lines))
    if reference_path is not None and lines:
        t0 = time.perf_counter()
        refs = _read_transcript(reference_path)
        pairs = [
            Transcript(ln.corrected_text, refs[ln.index] if ln.index < len(refs) else "", f"line_{ln.index:03d}")
            for ln in lines
        ]
        report.metrics = evaluate_corpus(pairs)
        timings["evaluate"] = time.perf_counter() - t0
    report.timings = timings
    return report
