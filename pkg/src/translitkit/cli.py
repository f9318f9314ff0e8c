"""Command-line interface: ``translitkit <subcommand> ...``.

Each subcommand is a thin wrapper over one library operation chain.  All
randomness comes from ``--seed``; ``--jobs`` only changes speed, never
output.  Runs that write files also write ``<output>.config.json`` echoing
the full configuration (or to ``--config-out`` when given).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import __version__
from .align import format_pairs, read_lexicon, write_lexicon
from .corpus import (
    FilterThresholds,
    filter_corpus,
    read_pages,
    sample_lexicon_words,
    split_lexicon,
    split_sizes,
    stem_heuristic,
)
from .metrics import char_eval, passthrough_eval, wer, whitespace_eval
from .ngram import bits_per_character, count_ngrams, read_arpa, train_katz, train_witten_bell, write_arpa
from .scriptdata import load_profile, normalize
from .sentence import decode_sentence, simulate_parallel_corpus
from .simulate import SimulationConfig, rare_char_replace, rare_chars, romanize_corpus
from .translit import PairDecoder, UnknownSymbolError, train_pair_model

log = logging.getLogger("translitkit")

_DEFAULTS = FilterThresholds()


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def _write_lines(path: str | None, lines: Sequence[str]) -> None:
    text = "".join(f"{x}\n" for x in lines)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _echo_config(args: argparse.Namespace, output: str | None) -> None:
    target = args.config_out or (f"{output}.config.json" if output and output != "-" else None)
    if target is None:
        return
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config_out")}
    cfg["version"] = __version__
    Path(target).write_text(json.dumps(cfg, ensure_ascii=False, indent=2, default=str) + "\n", encoding="utf-8")


def _profile(args, lexicon_path: str | None = None):
    words = None
    if lexicon_path:
        words = [e.native for e in read_lexicon(lexicon_path)]
    return load_profile(args.profile, lexicon_words=words)


def _decoder(path: str, direction: str, args) -> PairDecoder:
    return PairDecoder(
        read_arpa(path), direction, max_consec_insertions=args.max_insertions, beam_width=args.beam
    )


# --- subcommands -------------------------------------------------------------


def cmd_filter_corpus(args) -> int:
    p = _profile(args)
    t = FilterThresholds(
        args.section_outside_max, args.sent_outside_max, args.sent_native_min, args.sent_word_native_min
    )
    res = filter_corpus(read_pages(args.input), p, t, jobs=args.jobs)
    _write_lines(args.output, [s.text for s in res.sentences])
    if args.meta:
        meta = res.summary()
        meta["sentences"] = [
            {"page_id": s.page_id, "section": s.section_index, "title": s.section_title, "index": s.sentence_index}
            for s in res.sentences
        ]
        Path(args.meta).write_text(json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    _echo_config(args, args.output)
    return 0


def cmd_sample_lexicon(args) -> int:
    p = _profile(args)
    t = FilterThresholds(word_min_freq=args.min_freq)
    words = sample_lexicon_words(_read_lines(args.input), p, t)
    _write_lines(args.output, [f"{w}\t{c}" for w, c in words])
    _echo_config(args, args.output)
    return 0


def _read_stems(path: str) -> dict[str, set[str]]:
    stems = {}
    for line in _read_lines(path):
        if line.strip():
            word, *rest = line.split("\t")
            stems[normalize(word)] = set(" ".join(rest).split()) or {normalize(word)}
    return stems


def cmd_split_lexicon(args) -> int:
    entries = read_lexicon(args.input)
    stems = _read_stems(args.stems) if args.stems else None
    if stems is not None:
        for e in entries:
            stems.setdefault(e.native, stem_heuristic(e.native))
    sizes = tuple(args.sizes) if args.sizes else split_sizes(args.language)
    split = split_lexicon(entries, stems, sizes, seed=args.seed)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("train", "dev", "test"):
        write_lexicon(getattr(split, name), out / f"{name}.tsv")
    _echo_config(args, str(out / "split"))
    return 0


def cmd_train_pair(args) -> int:
    entries = read_lexicon(args.lexicon)
    lm, align_model, alignments = train_pair_model(entries, order=args.order, max_iter=args.max_iter, tol=args.tol)
    write_arpa(lm, args.output)
    if args.alignments:
        _write_lines(args.alignments, [f"{e.native}\t{e.latin}\t{format_pairs(a)}" for e, a in zip(entries, alignments)])
    log.info("EM log-likelihood trace: %s", align_model.loglik_trace)
    _echo_config(args, args.output)
    return 0


def cmd_translit(args) -> int:
    d = _decoder(args.model, args.direction, args)
    words = list(args.words)
    if args.input:
        words += [w for line in _read_lines(args.input) for w in line.split()]
    lines, failed = [], 0
    for w in words:
        w = normalize(w if args.direction.startswith("native") else w.lower())
        try:
            kb = d.transliterate(w, args.k)
        except UnknownSymbolError as exc:
            print(f"warning: {exc}", file=sys.stderr)
            failed += 1
            continue
        if args.k == 1:
            lines.append(f"{w}\t{kb.best.output}" if args.input or len(words) > 1 else kb.best.output)
        else:
            lines += [f"{w}\t{r}\t{h.output}\t{h.log2_score:.6f}" for r, h in enumerate(kb, 1)]
    _write_lines(args.output, lines)
    _echo_config(args, args.output)
    return 1 if failed and failed == len(words) else 0


def cmd_train_lm(args) -> int:
    lines = _read_lines(args.input)
    if args.unit == "char":
        seqs = [list(normalize(x)) for x in lines]
    else:
        seqs = [normalize(x).split() for x in lines]
    counts = count_ngrams(seqs, args.order)
    lm = train_katz(counts, gt_max=args.gt_max) if args.smoothing == "katz" else train_witten_bell(counts)
    lm.meta["unit"] = args.unit
    write_arpa(lm, args.output)
    _echo_config(args, args.output)
    return 0


_WORKER: dict = {}


def _init_decode_worker(pair_model, lm_path, max_ins, beam, k, lm_weight):
    _WORKER["d"] = PairDecoder(read_arpa(pair_model), "latin_to_native", max_ins, beam)
    _WORKER["lm"] = read_arpa(lm_path)
    _WORKER["k"] = k
    _WORKER["w"] = lm_weight


def _decode_one(line: str):
    res = decode_sentence(line, _WORKER["d"], _WORKER["lm"], _WORKER["k"], _WORKER["w"])
    return res.text, res.fallbacks


def cmd_decode_sentences(args) -> int:
    lines = _read_lines(args.input)
    init = (args.pair_model, args.lm, args.max_insertions, args.beam, args.k, args.lm_weight)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs, initializer=_init_decode_worker, initargs=init) as ex:
            results = list(ex.map(_decode_one, lines, chunksize=16))
    else:
        _init_decode_worker(*init)
        results = [_decode_one(x) for x in lines]
    _write_lines(args.output, [r[0] for r in results])
    n_fb = sum(len(r[1]) for r in results)
    if n_fb:
        print(f"warning: {n_fb} words had no candidates and were copied through", file=sys.stderr)
    if args.report:
        report = {"sentences": len(lines), "fallbacks": [{"line": i, "words": r[1]} for i, r in enumerate(results) if r[1]]}
        Path(args.report).write_text(json.dumps(report, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    _echo_config(args, args.output)
    return 0


def cmd_simulate(args) -> int:
    p = _profile(args, args.lexicon)
    d = _decoder(args.pair_model, "native_to_latin", args)
    lines = _read_lines(args.input)
    if args.parallel:
        res = simulate_parallel_corpus(lines, d, p, mode=args.parallel, k=args.k, seed=args.seed)
        out = [f"{r.replace(chr(9), ' ')}\t{n.replace(chr(9), ' ')}" for r, n in res.pairs]
        summary = {"input_lines": len(lines), "output_lines": len(out), "skipped": res.skipped}
    else:
        cfg = SimulationConfig(args.mode, args.copies, args.k, args.min_char_count, args.seed)
        res = romanize_corpus(lines, d, cfg, p)
        out = res.lines
        if args.eval_input:
            res.replaced_chars = rare_chars(out, cfg.min_char_count)
            out, ev = rare_char_replace(out, _read_lines(args.eval_input), cfg.min_char_count)
            _write_lines(args.eval_output, ev)
        summary = res.summary()
    _write_lines(args.output, out)
    if args.summary:
        Path(args.summary).write_text(json.dumps(summary, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _echo_config(args, args.output)
    return 0


def cmd_eval(args) -> int:
    refs, hyps = _read_lines(args.ref), _read_lines(args.hyp)
    if args.protocol == "bpc":
        lm = read_arpa(args.lm)
        denom = _read_lines(args.denominator) if args.denominator else None
        bpc, bpnc = bits_per_character(lm, hyps, denom)
        print(f"{bpc:.4f}\t{bpnc:.4f}")
        if args.json:
            Path(args.json).write_text(json.dumps({"bpc": bpc, "bpnc": bpnc}) + "\n", encoding="utf-8")
        _echo_config(args, args.json)
        return 0
    if args.protocol == "cer":
        report = char_eval(refs, hyps)
    elif args.protocol == "wer":
        report = wer(refs, hyps, case_sensitive=not args.ignore_case)
    elif args.protocol == "whitespace":
        if not args.lexicon:
            raise ValueError("--protocol whitespace needs --lexicon to define the covered character set")
        report = whitespace_eval(refs, hyps, _profile(args, args.lexicon))
    else:
        report = passthrough_eval(refs, hyps, case_sensitive=not args.ignore_case)
    print(f"{report.rounded():.1f}")
    if args.json:
        Path(args.json).write_text(report.to_json(indent=2) + "\n", encoding="utf-8")
    _echo_config(args, args.json)
    return 0


# --- parser ------------------------------------------------------------------


def _add_decoder_flags(sp, k_default: int):
    sp.add_argument("--k", type=int, default=k_default, help="size of k-best lists")
    sp.add_argument("--beam", type=int, default=None, help="states kept per search layer (default: exact search)")
    sp.add_argument("--max-insertions", type=int, default=3, help="max consecutive empty-input pairs")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    ap = argparse.ArgumentParser(prog="translitkit", description=__doc__.splitlines()[0], formatter_class=fmt)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    common.add_argument("--jobs", type=int, default=1, help="worker processes; does not affect output")
    common.add_argument("--config-out", default=None, help="where to write the config echo")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, parents=[common], formatter_class=fmt)
        sp.set_defaults(func=func)
        return sp

    sp = add("filter-corpus", cmd_filter_corpus, "filter JSONL page records into sentences")
    sp.add_argument("--profile", required=True, help="language tag or profile file")
    sp.add_argument("--input", required=True, help="JSONL page records")
    sp.add_argument("--output", required=True, help="kept sentences, one per line")
    sp.add_argument("--meta", default=None, help="JSON with provenance and omission counts")
    sp.add_argument("--section-outside-max", type=float, default=_DEFAULTS.section_outside_max)
    sp.add_argument("--sent-outside-max", type=float, default=_DEFAULTS.sent_outside_max)
    sp.add_argument("--sent-native-min", type=float, default=_DEFAULTS.sent_native_min)
    sp.add_argument("--sent-word-native-min", type=float, default=_DEFAULTS.sent_word_native_min)

    sp = add("sample-lexicon", cmd_sample_lexicon, "list frequent native word types")
    sp.add_argument("--profile", required=True)
    sp.add_argument("--input", required=True, help="sentences, one per line")
    sp.add_argument("--output", required=True, help="word<TAB>count lines")
    sp.add_argument("--min-freq", type=int, default=_DEFAULTS.word_min_freq)

    sp = add("split-lexicon", cmd_split_lexicon, "lemma-disjoint train/dev/test split")
    sp.add_argument("--input", required=True, help="native<TAB>latin[<TAB>count] lexicon")
    sp.add_argument("--stems", default=None, help="word<TAB>stem stem ... (default: prefix heuristic)")
    sp.add_argument("--language", default="hi", help="language tag; picks the default split sizes")
    sp.add_argument("--sizes", type=int, nargs=3, default=None, metavar=("TRAIN", "DEV", "TEST"),
                    help="override sizes (default: 25000 2500 2500; 15000 2500 2500 for sd)")
    sp.add_argument("--output-dir", required=True)

    sp = add("train-pair", cmd_train_pair, "align a lexicon and train a pair n-gram model")
    sp.add_argument("--lexicon", required=True)
    sp.add_argument("--output", required=True, help="ARPA file")
    sp.add_argument("--order", type=int, default=6)
    sp.add_argument("--max-iter", type=int, default=50)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--alignments", default=None, help="also write Viterbi alignments here")

    sp = add("translit", cmd_translit, "transliterate single words")
    sp.add_argument("--model", required=True, help="pair model ARPA file")
    sp.add_argument("--direction", default="latin2native",
                    choices=["latin2native", "native2latin", "latin_to_native", "native_to_latin"])
    _add_decoder_flags(sp, 1)
    sp.add_argument("--input", default=None, help="file of words (whitespace separated)")
    sp.add_argument("--output", default=None, help="default: stdout")
    sp.add_argument("words", nargs="*")

    sp = add("train-lm", cmd_train_lm, "train a word or character n-gram model")
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", required=True, help="ARPA file")
    sp.add_argument("--unit", choices=["word", "char"], default="word")
    sp.add_argument("--order", type=int, default=3)
    sp.add_argument("--smoothing", choices=["katz", "witten-bell"], default="katz")
    sp.add_argument("--gt-max", type=int, default=5)

    sp = add("decode-sentences", cmd_decode_sentences, "noisy-channel sentence transliteration")
    sp.add_argument("--pair-model", required=True)
    sp.add_argument("--lm", required=True, help="native word n-gram ARPA file")
    sp.add_argument("--input", required=True, help="romanized sentences")
    sp.add_argument("--output", default=None)
    sp.add_argument("--lm-weight", type=float, default=1.0)
    sp.add_argument("--report", default=None, help="JSON listing words that fell back to pass-through")
    _add_decoder_flags(sp, 8)

    sp = add("simulate", cmd_simulate, "romanize native text with a pair model")
    sp.add_argument("--profile", required=True)
    sp.add_argument("--lexicon", required=True, help="lexicon defining the covered native characters")
    sp.add_argument("--pair-model", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", required=True)
    sp.add_argument("--mode", choices=["viterbi", "sampled"], default="viterbi")
    sp.add_argument("--copies", type=int, default=1)
    sp.add_argument("--min-char-count", type=int, default=2)
    sp.add_argument("--eval-input", default=None, help="evaluation corpus for rare-character replacement")
    sp.add_argument("--eval-output", default=None)
    sp.add_argument("--parallel", choices=["whitespace", "full_string"], default=None,
                    help="emit romanized<TAB>native pairs instead of an LM corpus")
    sp.add_argument("--summary", default=None, help="JSON summary of skips and replacements")
    _add_decoder_flags(sp, 8)

    sp = add("eval", cmd_eval, "error rates and bits per character")
    sp.add_argument("--protocol", choices=["cer", "wer", "whitespace", "passthrough", "bpc"], required=True)
    sp.add_argument("--ref", required=True, help="reference lines (ignored for bpc)")
    sp.add_argument("--hyp", required=True, help="system output lines / evaluation corpus for bpc")
    sp.add_argument("--profile", default=None)
    sp.add_argument("--lexicon", default=None)
    sp.add_argument("--lm", default=None, help="character model for bpc")
    sp.add_argument("--denominator", default=None, help="native-side lines for BPNC")
    sp.add_argument("--ignore-case", action="store_true", help="de-case both sides (wer, passthrough)")
    sp.add_argument("--json", default=None, help="write the full report here")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "simulate" and bool(args.eval_input) != bool(args.eval_output):
        ap.error("--eval-input and --eval-output go together")
    if args.command == "eval" and args.protocol == "whitespace" and not args.profile:
        ap.error("--protocol whitespace needs --profile")
    if args.command == "eval" and args.protocol == "bpc" and not args.lm:
        ap.error("--protocol bpc needs --lm")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, UnknownSymbolError) as exc:
        print(f"translitkit {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
