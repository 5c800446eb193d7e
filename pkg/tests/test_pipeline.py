import json
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocrpost.imagecore import GrayImage, save_pgm
from ocrpost.lexicon import Lexicon
from ocrpost.pipeline import (
    BackendError,
    LineRecord,
    PipelineConfig,
    Resources,
    RunReport,
    chunk_words,
    classify_line,
    normalize_chain,
    postprocess,
    run_document,
    run_ocr,
)

from synth import bars_page

PY = sys.executable


@pytest.fixture
def bars_file(tmp_path):
    p = tmp_path / "page.pgm"
    save_pgm(bars_page(3), p)
    return p


@pytest.fixture
def transcript(tmp_path):
    p = tmp_path / "lines.txt"
    p.write_text("first line\nsecond line\nthird line\n", encoding="utf-8")
    return p


def script(tmp_path, name, body):
    p = tmp_path / name
    p.write_text(body, encoding="utf-8")
    return f"{PY} {p}"


class TestClassify:
    crop = GrayImage(np.where(np.arange(40) % 6 < 3, 0, 255).astype(np.uint8).reshape(1, 40).repeat(5, axis=0))

    def test_fixed(self):
        assert classify_line(self.crop, PipelineConfig(classifier="fixed:handwritten")) == ("handwritten", 1.0)

    def test_fixed_bad_label(self):
        with pytest.raises(ValueError):
            classify_line(self.crop, PipelineConfig(classifier="fixed:cursive"))

    def test_heuristic_uniform_bars_printed(self):
        label, conf = classify_line(self.crop, PipelineConfig(classifier="heuristic"))
        # every ink run is 3 px wide: variance 0, below any positive threshold
        assert label == "printed" and conf == 1.0

    def test_heuristic_irregular_handwritten(self):
        row = np.full(60, 255, dtype=np.uint8)
        for start, w in ((0, 1), (5, 12), (20, 2), (30, 20)):
            row[start : start + w] = 0
        label, conf = classify_line(GrayImage(np.tile(row, (4, 1))), PipelineConfig(classifier="heuristic"))
        assert label == "handwritten" and 0.5 <= conf <= 1.0

    def test_heuristic_blank(self):
        blank = GrayImage(np.full((3, 3), 255, dtype=np.uint8))
        assert classify_line(blank, PipelineConfig(classifier="heuristic")) == ("unknown", 0.0)

    def test_external(self, tmp_path):
        cmd = script(tmp_path, "cls.py", "print('printed\\t0.91')\n")
        cfg = PipelineConfig(classifier=f"cmd:{cmd} {{path}}")
        assert classify_line(self.crop, cfg, "x.pgm") == ("printed", 0.91)

    def test_external_garbage(self, tmp_path):
        cmd = script(tmp_path, "cls.py", "print('banana')\n")
        with pytest.raises(BackendError):
            classify_line(self.crop, PipelineConfig(classifier=f"cmd:{cmd}"), "x.pgm")


class TestOcr:
    def test_echo(self):
        assert run_ocr("x.pgm", "printed", PipelineConfig(ocr_command="echo STUB")) == "STUB"

    def test_template_expansion(self):
        cfg = PipelineConfig(ocr_command="echo {label} {path}")
        assert run_ocr("/tmp/a b.pgm", "printed", cfg) == "printed /tmp/a b.pgm"

    def test_transcript(self, tmp_path):
        p = tmp_path / "t.txt"
        p.write_text("a\nb\nc\nhello\n", encoding="utf-8")
        assert run_ocr("x", "unknown", PipelineConfig(transcript_path=str(p)), index=3) == "hello"

    def test_missing_index(self, transcript):
        with pytest.raises(BackendError):
            run_ocr("x", "unknown", PipelineConfig(transcript_path=str(transcript)), index=9)

    def test_nonzero_exit(self, tmp_path):
        cmd = script(tmp_path, "bad.py", "import sys; sys.stderr.write('boom'); sys.exit(4)\n")
        with pytest.raises(BackendError, match="boom"):
            run_ocr("x", "unknown", PipelineConfig(ocr_command=cmd))

    def test_timeout(self, tmp_path):
        cmd = script(tmp_path, "slow.py", "import time; time.sleep(5)\n")
        with pytest.raises(BackendError, match="timed out"):
            run_ocr("x", "unknown", PipelineConfig(ocr_command=cmd, timeout=0.3))


class TestPostprocess:
    curated = Lexicon({"machine": 90, "learning": 80, "is": 300, "an": 250, "idea": 60})

    def test_empty_chain_identity(self):
        assert postprocess("anyTHING goes", PipelineConfig(postprocess_chain=())) == "anyTHING goes"

    def test_respace_joined_headline(self):
        out = postprocess("THESE ARE THETIMES FORREALCHOICES", PipelineConfig(postprocess_chain=("respace",)))
        assert out == "THESE ARE THE TIMES FOR REAL CHOICES"

    def test_symspell_curated(self):
        cfg = PipelineConfig(postprocess_chain=("symspell",))
        res = Resources(cfg, self.curated)
        # "on" and "ideo" are each one substitution from "an" and "idea"
        assert postprocess("Mochint Leorning is on ideo", cfg, res) == "Machine Learning is an idea"

    def test_order_respected(self):
        assert normalize_chain("respace, symspell") == ("respace", "spellfix-symspell")
        assert normalize_chain(["norvig", "respace"]) == ("spellfix-norvig", "respace")
        with pytest.raises(ValueError):
            normalize_chain("spellcheck")


class TestChunks:
    def test_sizes(self):
        chunks = chunk_words(" ".join(f"w{i}" for i in range(300)), 128)
        assert [len(c.split()) for c in chunks] == [128, 128, 44]

    def test_small_and_empty(self):
        assert chunk_words("a b c d e") == ["a b c d e"]
        assert chunk_words("   ") == []

    @given(st.text(alphabet="ab \n\t", max_size=60), st.integers(1, 7))
    def test_round_trip(self, text, size):
        assert " ".join(chunk_words(text, size)).split() == text.split()

    def test_bad_size(self):
        with pytest.raises(ValueError):
            chunk_words("a", 0)


class TestRunDocument:
    def test_transcript_identity(self, bars_file, transcript, tmp_path):
        cfg = PipelineConfig(transcript_path=str(transcript), postprocess_chain=())
        rep = run_document(str(bars_file), cfg, crop_dir=str(tmp_path / "crops"))
        assert [ln.index for ln in rep.lines] == [0, 1, 2]
        assert rep.document_text == transcript.read_text(encoding="utf-8").rstrip()
        assert all((tmp_path / "crops" / f"line_{i:03d}.pgm").exists() for i in range(3))
        assert rep.metrics is None

    def test_blank_page(self, tmp_path, transcript):
        p = tmp_path / "blank.pgm"
        save_pgm(GrayImage(np.full((30, 30), 255, dtype=np.uint8)), p)
        rep = run_document(str(p), PipelineConfig(transcript_path=str(transcript)))
        assert rep.lines == [] and rep.document_text == ""

    def test_failure_is_flagged(self, bars_file, tmp_path):
        short = tmp_path / "short.txt"
        short.write_text("only one\n", encoding="utf-8")
        rep = run_document(str(bars_file), PipelineConfig(transcript_path=str(short), postprocess_chain=()))
        assert [ln.flagged for ln in rep.lines] == [False, True, True]
        assert rep.lines[1].ocr_text == "" and "ocr" in rep.lines[1].error

    def test_metrics_and_workers(self, bars_file, transcript, tmp_path):
        ref = tmp_path / "ref.txt"
        ref.write_text("first line\nsecond lines\nthird line\n", encoding="utf-8")
        cfg = PipelineConfig(transcript_path=str(transcript), postprocess_chain=(), workers=3)
        rep = run_document(str(bars_file), cfg, str(ref))
        assert rep.metrics.aggregate_wer == pytest.approx(1 / 6)
        assert set(rep.timings) >= {"segment", "classify", "ocr", "postprocess", "evaluate"}

    def test_ocr_command_sees_crops(self, bars_file, tmp_path):
        cmd = script(tmp_path, "ocr.py", "import sys, os; print(os.path.basename(sys.argv[1]))\n")
        rep = run_document(str(bars_file), PipelineConfig(ocr_command=f"{cmd} {{path}}", postprocess_chain=()))
        assert rep.document_text.split("\n") == ["line_000.pgm", "line_001.pgm", "line_002.pgm"]


class TestReport:
    def test_json_round_trip(self, bars_file, transcript, tmp_path):
        ref = tmp_path / "ref.txt"
        ref.write_text("first line\nsecond line\nthird line\n", encoding="utf-8")
        rep = run_document(str(bars_file), PipelineConfig(transcript_path=str(transcript), postprocess_chain=()), str(ref))
        text = rep.to_json()
        assert json.loads(text)["schema_version"] == 1
        assert RunReport.from_json(text) == rep

    def test_version_checked(self):
        d = RunReport(lines=[LineRecord(0, "p", "unknown", 1.0, "a", "a")]).to_dict()
        d["schema_version"] = 99
        with pytest.raises(ValueError):
            RunReport.from_dict(d)
