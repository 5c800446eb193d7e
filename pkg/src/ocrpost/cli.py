"""Command-line entry point: ``ocrpost <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 input error, 3 backend error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .imagecore import ImageError, load_image, save_pgm
from .lexicon import LexiconError, default_lexicon, load_lexicon
from .linesegment import SeamCosts, segment_document
from .metrics import Transcript, evaluate_corpus
from .noisegen import DEFAULT_CONFUSIONS, NoiseConfig, degrade_text, load_confusions
from .pipeline import BackendError, PipelineConfig, Resources, normalize_chain, run_document
from .respace import RespaceOptions, respace_text
from .spellfix import build_delete_index, correct_sentence, norvig_correct, symspell_correct

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_BACKEND = 0, 1, 2, 3

log = logging.getLogger("ocrpost")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _lexicon(path: str | None):
    return load_lexicon(path) if path else default_lexicon()


def _stdin_lines():
    for line in sys.stdin:
        yield line.rstrip("\n")


# --- subcommands -------------------------------------------------------------

def cmd_segment(args) -> int:
    img = load_image(args.input)
    seg = segment_document(
        img,
        threshold=args.threshold,
        smoothing=args.smooth,
        costs=SeamCosts(args.ink_penalty, args.deviation_weight),
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, crop in enumerate(seg.crops):
        save_pgm(crop, out / f"line_{i:03d}.pgm")
    (out / "seams.json").write_text(json.dumps([s.to_list() for s in seg.seams]))
    print(f"{len(seg.crops)} line(s) written to {out}", file=sys.stderr)
    return EXIT_OK


def _read_pairs(hyp: str, ref: str | None) -> list[Transcript]:
    hp = Path(hyp)
    if ref is None:
        if hp.is_dir():
            raise UsageError("--ref is required unless --hyp is a TSV file")
        pairs = []
        for lineno, line in enumerate(hp.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ValueError(f"{hp}:{lineno}: expected id<TAB>hypothesis<TAB>reference")
            if lineno == 1 and cols == ["id", "hypothesis", "reference"]:
                continue
            pairs.append(Transcript(cols[1], cols[2], cols[0]))
        return pairs
    rp = Path(ref)
    if hp.is_dir() != rp.is_dir():
        raise UsageError("--hyp and --ref must both be files or both be directories")
    if hp.is_dir():
        pairs = []
        for r in sorted(p for p in rp.iterdir() if p.is_file()):
            h = hp / r.name
            if not h.is_file():
                raise FileNotFoundError(f"no hypothesis file for {r.name} in {hp}")
            pairs.append(
                Transcript(
                    h.read_text(encoding="utf-8").rstrip("\n"),
                    r.read_text(encoding="utf-8").rstrip("\n"),
                    r.name,
                )
            )
        return pairs
    hyps = hp.read_text(encoding="utf-8").splitlines()
    refs = rp.read_text(encoding="utf-8").splitlines()
    if len(hyps) != len(refs):
        raise ValueError(f"line count mismatch: {len(hyps)} hypotheses vs {len(refs)} references")
    return [Transcript(h, r, str(i)) for i, (h, r) in enumerate(zip(hyps, refs), 1)]


def cmd_eval(args) -> int:
    pairs = _read_pairs(args.hyp, args.ref)
    report = evaluate_corpus(pairs, case_fold=args.case_fold, averaging="macro" if args.macro else "micro")
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def cmd_respace(args) -> int:
    lex = _lexicon(args.lexicon)
    opts = RespaceOptions(oov_char_cost=args.oov_char_cost)
    for line in _stdin_lines():
        print(respace_text(line, lex, opts))
    return EXIT_OK


def cmd_spellfix(args) -> int:
    lex = _lexicon(args.lexicon)
    if args.method == "norvig":
        fix = lambda w: norvig_correct(w, lex)  # noqa: E731
    else:
        idx = build_delete_index(lex, args.max_edit)
        fix = lambda w: symspell_correct(w, idx)  # noqa: E731
    for line in _stdin_lines():
        print(correct_sentence(line, fix))
    return EXIT_OK


def cmd_noisegen(args) -> int:
    table = load_confusions(args.confusions) if args.confusions else DEFAULT_CONFUSIONS
    logrows = []
    for n, line in enumerate(_stdin_lines()):
        # per-line derived seed keeps lines independent of each other
        cfg = NoiseConfig(args.word_p, args.char_p, table, args.seed ^ n, args.drop_spaces)
        out, changes = degrade_text(line, cfg)
        print(out)
        logrows.extend((n, i, a, b) for i, a, b in changes)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write("line\ttoken\toriginal\tdegraded\n")
            for row in logrows:
                fh.write("\t".join(map(str, row)) + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import bench_spellfix

    report = bench_spellfix(
        _lexicon(args.lexicon),
        size=args.size,
        runs=args.runs,
        query_length=args.length,
        seed=args.seed,
    )
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        chain = normalize_chain(args.chain)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = PipelineConfig(
        ocr_command=args.ocr_cmd,
        transcript_path=args.transcript,
        classifier=args.classifier,
        postprocess_chain=chain,
        lexicon_path=args.lexicon,
        timeout=args.timeout,
        workers=args.workers,
    )
    report = run_document(args.image, cfg, args.ref, crop_dir=args.crop_dir, resources=Resources(cfg))
    Path(args.report).write_text(report.to_json(indent=2), encoding="utf-8")
    flagged = sum(1 for ln in report.lines if ln.flagged)
    ocr_failed = sum(1 for ln in report.lines if ln.error and ln.error.startswith("ocr"))
    if report.lines and ocr_failed == len(report.lines):
        raise BackendError(f"OCR failed on all {ocr_failed} line(s); first error: {report.lines[0].error}")
    if flagged:
        print(f"warning: {flagged} line(s) flagged with backend errors", file=sys.stderr)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ocrpost", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    env_lex = os.environ.get("OCRPOST_LEXICON")

    s = sub.add_parser("segment", help="split a page image into line crops")
    s.add_argument("input")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--threshold", type=int, default=None, help="ink threshold (default: Otsu)")
    s.add_argument("--smooth", type=int, default=1, help="odd HPP moving-average window")
    s.add_argument("--ink-penalty", type=float, default=900.0)
    s.add_argument("--deviation-weight", type=float, default=0.05)
    s.set_defaults(fn=cmd_segment)

    s = sub.add_parser("eval", help="CER/WER report as JSON")
    s.add_argument("--hyp", required=True, help="file, directory, or id/hypothesis/reference TSV")
    s.add_argument("--ref", help="file or directory paired with --hyp")
    s.add_argument("--case-fold", action="store_true")
    s.add_argument("--macro", action="store_true", help="mean of per-item rates instead of micro average")
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("respace", help="insert missing spaces (stdin -> stdout)")
    s.add_argument("--lexicon", default=env_lex)
    s.add_argument("--oov-char-cost", type=float, default=8.0)
    s.set_defaults(fn=cmd_respace)

    s = sub.add_parser("spellfix", help="token spelling correction (stdin -> stdout)")
    s.add_argument("--method", choices=("norvig", "symspell"), default="symspell")
    s.add_argument("--lexicon", default=env_lex)
    s.add_argument("--max-edit", type=int, default=2, choices=(1, 2, 3))
    s.set_defaults(fn=cmd_spellfix)

    s = sub.add_parser("noisegen", help="synthetic OCR noise (stdin -> stdout)")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--word-p", type=float, default=0.8)
    s.add_argument("--char-p", type=float, default=0.7)
    s.add_argument("--confusions", help="TSV of char<TAB>replacements")
    s.add_argument("--drop-spaces", type=float, default=0.0, metavar="P")
    s.add_argument("--log", help="write the change log as TSV")
    s.set_defaults(fn=cmd_noisegen)

    s = sub.add_parser("bench-spellfix", help="SymSpell vs Norvig latency report (JSON)")
    s.add_argument("--lexicon", default=env_lex)
    s.add_argument("--size", type=int, default=80000)
    s.add_argument("--runs", type=int, default=30)
    s.add_argument("--length", type=int, default=8)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_bench)

    s = sub.add_parser("run", help="full pipeline on one page image")
    s.add_argument("image")
    backend = s.add_mutually_exclusive_group(required=True)
    backend.add_argument("--ocr-cmd", help="command template; {path} and {label} are substituted")
    backend.add_argument("--transcript", help="file with one OCR line per detected line")
    s.add_argument("--classifier", default="fixed:unknown", help="heuristic | fixed:<label> | cmd:<template>")
    s.add_argument("--chain", default="respace,symspell", help="comma-separated stages; empty for none")
    s.add_argument("--lexicon", default=env_lex)
    s.add_argument("--ref", help="reference text, one line per detected line")
    s.add_argument("--report", required=True)
    s.add_argument("--crop-dir")
    s.add_argument("--timeout", type=float, default=120.0)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(fn=cmd_run)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"ocrpost: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendError as exc:
        print(f"ocrpost: backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (OSError, ImageError, LexiconError, ValueError) as exc:
        print(f"ocrpost: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
