"""Command-line entry point: ``smtbench <command> ...``."""

from __future__ import annotations

import argparse
import glob
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import align, corpus, decoder, harness, lm, morpho, phrase, toydata
from .metrics import bleu, meteor_corpus, nist, ter_corpus, transpose_refs
from .metrics.meteor import load_synonyms

EXIT_OK, EXIT_CONFIG, EXIT_STAGE = 0, 2, 3


def _read(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _write_lines(path, lines):
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def cmd_clean(args):
    pc = corpus.load_parallel(args.src, args.tgt, args.src_lang, args.tgt_lang)
    cfg = corpus.CleaningConfig(max_len=args.max_len, len_unit=args.len_unit, lowercase=args.lowercase,
                                strip_markup=not args.keep_markup, drop_repetitions=not args.keep_repetitions,
                                drop_nonlanguage_symbols=not args.keep_symbols)
    cleaned, log = corpus.clean(pc, cfg)
    prefix = args.out_prefix
    corpus.write_parallel(cleaned, f"{prefix}.{args.src_lang}", f"{prefix}.{args.tgt_lang}")
    Path(f"{prefix}.log").write_text(log.dump(), encoding="utf-8")
    print(f"kept {len(cleaned)} of {len(pc)} pairs")


def cmd_morpho_extract(args):
    data = Path(args.xml).read_bytes()
    if args.encoding == "cp1250":
        data = morpho.convert_encoding(data, morpho.CP1250_TO_UTF8)
    sentences = morpho.parse_annotations(data.decode("utf-8"))
    if args.split_markers:
        sentences = morpho.split_on_markers(sentences)
    lines = morpho.make_variant(sentences, args.kind, marker=args.marker, verbs_only=args.verbs_only)
    _write_lines(args.out, lines)


def cmd_morpho_convert(args):
    Path(args.out).write_bytes(morpho.convert_encoding(Path(args.input).read_bytes(), args.direction))


def cmd_lm_train(args):
    sents = [corpus.tokenize(line) for line in _read(args.text)]
    model = lm.train_kn([s for s in sents if s], order=args.order, discount=args.discount,
                        unk_singletons=args.unk_singletons)
    lm.save_arpa(model, args.out)


def cmd_lm_ppl(args):
    model = lm.load_arpa(args.lm)
    sents = [corpus.tokenize(line) for line in _read(args.text)]
    print(f"perplexity {lm.perplexity(model, sents):.4f}")


def cmd_align_train(args):
    pc = corpus.load_parallel(args.src, args.tgt)
    fwd_t = align.train_ibm1(pc.pairs, args.iters, use_null=not args.no_null)
    bwd_t = align.train_ibm1(pc.pairs, args.iters, use_null=not args.no_null, reverse=True)
    fwd = [align.viterbi_align(fwd_t, p.src_tokens, p.tgt_tokens) for p in pc.pairs]
    bwd = [align.viterbi_align(bwd_t, p.tgt_tokens, p.src_tokens).transpose() for p in pc.pairs]
    align.write_alignments(fwd, f"{args.out_prefix}.fwd")
    align.write_alignments(bwd, f"{args.out_prefix}.bwd")
    print(" ".join(f"{x:.4f}" for x in fwd_t.loglik))


def cmd_align_symmetrize(args):
    pc = corpus.load_parallel(args.src, args.tgt)
    fwd, bwd = _read(args.fwd), _read(args.bwd)
    out = []
    for p, f, b in zip(pc.pairs, fwd, bwd):
        n, m = len(p.src_tokens), len(p.tgt_tokens)
        out.append(align.symmetrize(align.AlignmentMatrix.from_pharaoh(f, n, m),
                                    align.AlignmentMatrix.from_pharaoh(b, n, m), args.heuristic))
    align.write_alignments(out, args.out)


def cmd_phrase_train(args):
    pc = corpus.load_parallel(args.src, args.tgt)
    links = _read(args.alignment)
    alignments = [align.AlignmentMatrix.from_pharaoh(line, len(p.src_tokens), len(p.tgt_tokens))
                  for p, line in zip(pc.pairs, links)]
    table, reordering = phrase.train_phrase_models(pc.pairs, alignments, args.max_len)
    Path(f"{args.out_prefix}.phrase-table").write_text(table.dumps(), encoding="utf-8")
    Path(f"{args.out_prefix}.reordering").write_text(reordering.dumps(), encoding="utf-8")


def cmd_decode(args):
    table = phrase.PhraseTable.loads(Path(args.phrase_table).read_text(encoding="utf-8"))
    reordering = phrase.ReorderingModel.loads(Path(args.reordering).read_text(encoding="utf-8")) \
        if args.reordering else None
    model = lm.load_arpa(args.lm) if args.lm else None
    weights = decoder.FeatureWeights.loads(Path(args.weights).read_text(encoding="utf-8")) \
        if args.weights else decoder.FeatureWeights()
    models = decoder.Models(table, reordering, model)
    nbest_out = open(args.nbest_out, "w", encoding="utf-8") if args.nbest and args.nbest_out else None
    try:
        for k, line in enumerate(_read(args.input)):
            result = decoder.decode(corpus.tokenize(line), models, weights, beam_size=args.beam,
                                    distortion_limit=args.distortion_limit, nbest=args.nbest)
            print(" ".join(result.translation))
            if args.nbest:
                text = decoder.format_nbest(k, result.nbest)
                if nbest_out:
                    nbest_out.write(text)
                else:
                    sys.stderr.write(text)
    finally:
        if nbest_out:
            nbest_out.close()


def cmd_eval(args):
    cands = [corpus.tokenize(line) for line in _read(args.cand)]
    ref_files = [[corpus.tokenize(line) for line in _read(p)] for p in args.refs.split(",")]
    refs = transpose_refs(ref_files)
    synonyms = load_synonyms(args.synonyms) if args.synonyms else None
    names = harness.METRICS if args.metric == "all" else (args.metric,)
    for name in names:
        if name == "bleu":
            comp = bleu(cands, refs)
        elif name == "nist":
            comp = nist(cands, refs)
        elif name == "meteor":
            comp = meteor_corpus(cands, refs, synonyms=synonyms, cubed=args.meteor_cubed)
        else:
            comp = ter_corpus(cands, refs)
        print(f"{name.upper()} = {comp.score:.6f}")
        if args.json:
            components = {k: v for k, v in asdict(comp).items() if k not in ("score", "alignment")}
            print(json.dumps({"name": name, "score": comp.score, "components": components}))


def cmd_experiment_run(args):
    cfg = harness.load_config(args.config)
    row = harness.run_experiment(cfg, log_stream=sys.stderr if args.verbose else None)
    print(harness.render_report([row])[0], end="")


def cmd_experiment_batch(args):
    rows = harness.run_batch(args.dir, log_stream=sys.stderr if args.verbose else None)
    print(harness.render_report(rows)[0], end="")


def cmd_report(args):
    rows = []
    for path in sorted(glob.glob(args.glob)):
        rows.extend(harness.parse_report(Path(path).read_text(encoding="utf-8")))
    text, tsv = harness.render_report(rows)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(tsv, encoding="utf-8")


def cmd_toydata(args):
    for path in toydata.write_bundle(args.out):
        print(path)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="smtbench",
        description="Phrase-based SMT workbench: corpus cleaning, tagger variants, language models, "
                    "alignment, phrase tables, decoding, evaluation and config-driven experiments.",
        epilog="exit status: 0 ok, 1 input error, 2 bad config, 3 failed pipeline stage")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("clean", help="clean a parallel corpus")
    c.add_argument("--src", required=True)
    c.add_argument("--tgt", required=True)
    c.add_argument("--src-lang", default="pl")
    c.add_argument("--tgt-lang", default="en")
    c.add_argument("--out-prefix", required=True)
    c.add_argument("--max-len", type=int, default=80)
    c.add_argument("--len-unit", choices=("chars", "characters", "tokens"), default="characters")
    c.add_argument("--lowercase", action="store_true")
    c.add_argument("--keep-markup", action="store_true")
    c.add_argument("--keep-repetitions", action="store_true")
    c.add_argument("--keep-symbols", action="store_true")
    c.set_defaults(func=cmd_clean)

    m = sub.add_parser("morpho", help="tagger XML tools").add_subparsers(dest="action", required=True)
    e = m.add_parser("extract", help="write an INF/SVO corpus variant from tagger XML")
    e.add_argument("--xml", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--kind", choices=morpho.VARIANTS, required=True)
    e.add_argument("--marker", action=argparse.BooleanOptionalAction, default=True)
    e.add_argument("--split-markers", action=argparse.BooleanOptionalAction, default=True)
    e.add_argument("--verbs-only", action="store_true")
    e.add_argument("--encoding", choices=("utf8", "cp1250"), default="utf8")
    e.set_defaults(func=cmd_morpho_extract)
    cv = m.add_parser("convert", help="convert between cp1250 and UTF-8")
    cv.add_argument("--input", required=True)
    cv.add_argument("--out", required=True)
    cv.add_argument("--direction", choices=(morpho.CP1250_TO_UTF8, morpho.UTF8_TO_CP1250), required=True)
    cv.set_defaults(func=cmd_morpho_convert)

    lmp = sub.add_parser("lm", help="n-gram language models").add_subparsers(dest="action", required=True)
    t = lmp.add_parser("train")
    t.add_argument("--text", required=True)
    t.add_argument("--order", type=int, default=5)
    t.add_argument("--discount", type=float)
    t.add_argument("--unk-singletons", action="store_true")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_lm_train)
    pp = lmp.add_parser("ppl")
    pp.add_argument("--lm", required=True)
    pp.add_argument("--text", required=True)
    pp.set_defaults(func=cmd_lm_ppl)

    ap = sub.add_parser("align", help="word alignment").add_subparsers(dest="action", required=True)
    t = ap.add_parser("train")
    t.add_argument("--src", required=True)
    t.add_argument("--tgt", required=True)
    t.add_argument("--iters", type=int, default=5)
    t.add_argument("--no-null", action="store_true")
    t.add_argument("--out-prefix", required=True)
    t.set_defaults(func=cmd_align_train)
    s = ap.add_parser("symmetrize")
    s.add_argument("--src", required=True)
    s.add_argument("--tgt", required=True)
    s.add_argument("--fwd", required=True)
    s.add_argument("--bwd", required=True)
    s.add_argument("--heuristic", default="grow-diag-final-and",
                   choices=[h.value for h in align.SymmetrizationHeuristic])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_align_symmetrize)

    ph = sub.add_parser("phrase", help="phrase and reordering tables").add_subparsers(dest="action", required=True)
    t = ph.add_parser("train")
    t.add_argument("--src", required=True)
    t.add_argument("--tgt", required=True)
    t.add_argument("--alignment", required=True)
    t.add_argument("--max-len", type=int, default=phrase.DEFAULT_MAX_LEN)
    t.add_argument("--out-prefix", required=True)
    t.set_defaults(func=cmd_phrase_train)

    d = sub.add_parser("decode", help="translate a tokenized file")
    d.add_argument("--input", required=True)
    d.add_argument("--phrase-table", required=True)
    d.add_argument("--reordering")
    d.add_argument("--lm")
    d.add_argument("--weights")
    d.add_argument("--nbest", type=int, default=0)
    d.add_argument("--nbest-out")
    d.add_argument("--beam", type=int, default=100)
    d.add_argument("--distortion-limit", type=int, default=6)
    d.set_defaults(func=cmd_decode)

    ev = sub.add_parser("eval", help="score a candidate file")
    ev.add_argument("--metric", choices=harness.METRICS + ("all",), default="all")
    ev.add_argument("--cand", required=True)
    ev.add_argument("--refs", required=True, help="comma-separated reference files")
    ev.add_argument("--synonyms")
    ev.add_argument("--meteor-cubed", action="store_true")
    ev.add_argument("--json", action=argparse.BooleanOptionalAction, default=True)
    ev.set_defaults(func=cmd_eval)

    ex = sub.add_parser("experiment", help="run experiments").add_subparsers(dest="action", required=True)
    r = ex.add_parser("run")
    r.add_argument("--config", required=True)
    r.add_argument("--verbose", action="store_true")
    r.set_defaults(func=cmd_experiment_run)
    b = ex.add_parser("batch")
    b.add_argument("--dir", required=True)
    b.add_argument("--verbose", action="store_true")
    b.set_defaults(func=cmd_experiment_batch)

    rp = sub.add_parser("report", help="collect report files into one table")
    rp.add_argument("--glob", required=True)
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_report)

    td = sub.add_parser("toydata", help="regenerate the bundled toy corpus")
    td.add_argument("--out", default=str(toydata.data_dir()))
    td.set_defaults(func=cmd_toydata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except harness.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except harness.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (OSError, ValueError, corpus.CorpusError, lm.LMError, morpho.MorphoError, align.AlignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
