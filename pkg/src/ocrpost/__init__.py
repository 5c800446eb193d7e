"""Document line segmentation, pluggable OCR routing and classical OCR post-correction."""

__version__ = "0.1.0"

from .imagecore import EdgeImage, GrayImage, binarize, load_image, sobel
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .linesegment import LineBand, SeamPath, detect_bands, hpp, seam_between, segment_document
from .metrics import EvalReport, Transcript, cer, evaluate_corpus, levenshtein, osa_distance, wer
from .noisegen import NoiseConfig, Rng, degrade_text, degrade_word
from .respace import SegmentationResult, despace, respace, respace_text
from .spellfix import (
    DeleteIndex,
    Suggestion,
    build_delete_index,
    correct_sentence,
    norvig_correct,
    symspell_lookup,
)

__all__ = [
    "EdgeImage", "GrayImage", "binarize", "load_image", "sobel",
    "Lexicon", "default_lexicon", "load_lexicon",
    "LineBand", "SeamPath", "detect_bands", "hpp", "seam_between", "segment_document",
    "EvalReport", "Transcript", "cer", "evaluate_corpus", "levenshtein", "osa_distance", "wer",
    "NoiseConfig", "Rng", "degrade_text", "degrade_word",
    "SegmentationResult", "despace", "respace", "respace_text",
    "DeleteIndex", "Suggestion", "build_delete_index", "correct_sentence", "norvig_correct",
    "symspell_lookup",
]
