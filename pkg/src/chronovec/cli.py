"""``chronovec`` command line: one subcommand per pipeline stage.

Exit status is 0 on success, 1 on a usage error and 2 when the inputs are
invalid (bad data, missing words, inconsistent files). Commands write only
to the paths given with ``--out`` (or ``--out-dir`` for ``pipeline``), plus
the ``--maps`` directory of ``align``.
"""

from __future__ import annotations

import argparse
import logging
import os
import shlex
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .alignment import align_embedding_periods
from .config import RunConfig, load_config
from .cooccurrence import count_pairs, write_cooc
from .corpus import (
    build_vocabulary,
    load_corpus,
    read_corpus,
    read_vocabulary,
    write_corpus,
    write_vocabulary,
)
from .embeddings import METHODS
from .errors import ChronovecError
from .evaluation import (
    FORMATS,
    EvalReport,
    known_shift_benchmark,
    norm_frequency_correlation,
    read_similarity_pairs,
    read_word_list,
    semantic_displacement,
    similarity_benchmark,
    smoothness_curve,
    temporal_neighbors,
    trajectory_report,
)
from .io import read_alignment, read_embeddings, read_provenance, write_alignment, write_embeddings
from .methods import build_embeddings

log = logging.getLogger("chronovec")

EVAL_TASKS = ("smoothness", "similarity", "norms", "displacement", "shifts", "neighbors", "trajectory")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; we reserve 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _common(p, out=True, config=True):
    if config:
        p.add_argument("--config", help="TOML or JSON run configuration")
    if out:
        p.add_argument("--out", help="output path")
    p.add_argument("--seed", type=int, help="override every seed in the config")
    p.add_argument("--workers", type=int, help="SGNS worker threads (1 = reproducible)")


def _report_opts(p):
    p.add_argument("--format", choices=FORMATS, default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="chronovec", description="Temporal word embeddings in one shared space.")
    ap.add_argument("--version", action="version", version=f"chronovec {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", help="parse n-gram or YEAR<TAB>sentence files into a corpus file")
    p.add_argument("inputs", nargs="*", help="input files (default: ingest.inputs from the config)")
    _common(p)
    p.add_argument("--start-year", type=int)
    p.add_argument("--end-year", type=int)
    p.add_argument("--period-length", type=int)
    p.add_argument("--input-format", choices=("auto", "ngram", "text"))

    p = sub.add_parser("vocab", help="build a vocabulary from a corpus file")
    p.add_argument("--corpus", required=True)
    _common(p)
    p.add_argument("--min-count", type=int)
    p.add_argument("--max-vocab", type=int)

    p = sub.add_parser("count", help="windowed co-occurrence counts of one period or the whole corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    _common(p)
    p.add_argument("--period", help="period label (default: all periods pooled)")
    p.add_argument("--window", type=int)

    p = sub.add_parser("train", help="train or factorize one embedding method")
    p.add_argument("method", choices=METHODS)
    p.add_argument("--corpus", help="corpus file (default: ingest the config's inputs)")
    p.add_argument("--vocab", help="vocabulary file (default: build from the corpus)")
    _common(p)
    p.add_argument("--dim", type=int, help="embedding dimension")
    p.add_argument("--window", type=int)

    p = sub.add_parser("align", help="post-hoc alignment of per-period spaces")
    asub = p.add_subparsers(dest="align_method", metavar="METHOD", parser_class=_Parser)
    asub.required = True
    q = asub.add_parser("procrustes", help="chain orthogonal Procrustes maps into one frame")
    q.add_argument("embeddings")
    q.add_argument("--out", required=True)
    q.add_argument("--reference", help="period whose frame is kept (default: last)")
    q.add_argument("--maps", help="directory to write adjacent alignment maps into")

    p = sub.add_parser("eval", help="run an evaluation")
    esub = p.add_subparsers(dest="task", metavar="TASK", parser_class=_Parser)
    esub.required = True

    q = esub.add_parser("smoothness", help="context-overlap perturbation curve")
    q.add_argument("--corpus", help="corpus file (default: ingest the config's inputs)")
    _common(q)
    _report_opts(q)
    q.add_argument("--probe-words", help="comma-separated probes (default: eval.probe_words)")
    q.add_argument("--period", help="period t; t+1 is the next period")
    q.add_argument("--alpha-grid", help="comma-separated replacement fractions, e.g. 0,0.1,0.2")
    q.add_argument("--methods", help="comma-separated methods (default: eval.methods)")

    q = esub.add_parser("similarity", help="Spearman against human similarity scores")
    q.add_argument("embeddings")
    q.add_argument("--pairs", required=True, help="word1<TAB>word2<TAB>score file")
    q.add_argument("--period", default=None, help="period label, first, last or mean")
    q.add_argument("--out")
    _report_opts(q)

    q = esub.add_parser("norms", help="vector norm against relative frequency over time")
    q.add_argument("embeddings")
    q.add_argument("--corpus", required=True)
    q.add_argument("--words", help="word list file (default: every word)")
    q.add_argument("--out")
    _report_opts(q)

    q = esub.add_parser("displacement", help="rank words by 1 - cosine between two periods")
    q.add_argument("embeddings")
    q.add_argument("--period", action="append", help="give twice: t0 then t1 (default: first, last)")
    q.add_argument("--top-k", type=int, default=None)
    q.add_argument("--alignment", help="alignment map file from t0 into t1 (plain spaces)")
    q.add_argument("--out")
    _report_opts(q)

    q = esub.add_parser("shifts", help="score displacement against known shifted / control words")
    q.add_argument("embeddings")
    q.add_argument("--shifted", required=True)
    q.add_argument("--control", required=True)
    q.add_argument("--period", action="append", help="give twice: t0 then t1 (default: first, last)")
    q.add_argument("--top-k", type=int, action="append", help="precision@k cutoffs (default 10 and 50)")
    q.add_argument("--alignment")
    q.add_argument("--out")
    _report_opts(q)

    q = esub.add_parser("neighbors", help="nearest (word, period) keys of a query word-period")
    q.add_argument("embeddings")
    q.add_argument("--word", required=True)
    q.add_argument("--period", required=True)
    q.add_argument("--top-k", type=int, default=10)
    q.add_argument("--target-period", action="append")
    q.add_argument("--out")
    _report_opts(q)

    q = esub.add_parser("trajectory", help="2-D PCA points of a word and its neighbors per period")
    q.add_argument("embeddings")
    q.add_argument("--word", required=True)
    q.add_argument("--period", action="append")
    q.add_argument("--top-k", type=int, default=5)
    q.add_argument("--out")
    _report_opts(q)

    p = sub.add_parser("export", help="print provenance or write word2vec text vectors")
    p.add_argument("embeddings")
    p.add_argument("--provenance", action="store_true", help="print the command that made the file")
    p.add_argument("--period", help="export this period only (default: keys as word@period)")
    p.add_argument("--out")

    p = sub.add_parser("pipeline", help="ingest, vocab, train every configured method, smoothness")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    return ap


# helpers -------------------------------------------------------------------

def _config(args) -> RunConfig:
    cfg = load_config(getattr(args, "config", None))
    return cfg.with_overrides(getattr(args, "seed", None), getattr(args, "workers", None))


def _provenance(cfg: RunConfig, argv) -> dict:
    return {"config_hash": cfg.config_hash(), "seed": cfg.train.seed, "argv": list(argv)}


def _ingest(cfg: RunConfig, inputs=None):
    inputs = list(inputs or cfg.ingest.inputs)
    if not inputs:
        raise UsageError("no corpus inputs: pass files or set ingest.inputs in the config")
    return load_corpus(inputs, cfg.ingest.period_spec(), cfg.ingest.token_filter(),
                       cfg.ingest.format, cfg.ingest.on_error)


def _corpus_vocab(args, cfg):
    corpus = read_corpus(args.corpus) if args.corpus else _ingest(cfg)
    if getattr(args, "vocab", None):
        vocab = read_vocabulary(args.vocab)
    else:
        vocab = build_vocabulary(corpus, cfg.vocab.min_count, cfg.vocab.max_vocab)
    return corpus, vocab


def _emit(report: EvalReport, args, prov: dict) -> None:
    report.provenance.update(argv=prov["argv"])
    if args.out:
        report.write(args.out, args.format)
    elif args.format == "svg":
        raise UsageError("--format svg needs --out")
    else:
        text = {"json": report.to_json, "text": report.to_text, "csv": report.to_csv}[args.format]()
        sys.stdout.write(text)


def _two_periods(es, periods):
    if not periods:
        return es.periods[0], es.periods[-1]
    if len(periods) != 2:
        raise UsageError("--period must be given exactly twice (t0 and t1)")
    return periods[0], periods[1]


def _train_settings(args, cfg: RunConfig):
    settings = cfg.method_settings()
    if getattr(args, "window", None):
        settings = replace(settings, window=args.window)
    if getattr(args, "dim", None):
        d = args.dim
        settings = replace(settings, svd=replace(settings.svd, dim=d),
                           train=replace(settings.train, dim=d), dw2v=replace(settings.dw2v, dim=d))
    return settings


# commands ------------------------------------------------------------------

def cmd_ingest(args, argv):
    _require_out(args)
    cfg = load_config(args.config)
    ing = cfg.ingest
    ing = replace(ing, **{k: v for k, v in {
        "year_start": args.start_year, "year_end": args.end_year,
        "period_length": args.period_length, "format": args.input_format}.items() if v is not None})
    cfg = replace(cfg, ingest=ing)
    corpus = _ingest(cfg, args.inputs)
    write_corpus(corpus, args.out, {"config_hash": cfg.config_hash(), "argv": shlex.join(argv),
                                    "fingerprint": corpus.fingerprint()})
    log.info("%d records in %d periods", len(corpus), corpus.n_periods)


def cmd_vocab(args, argv):
    _require_out(args)
    cfg = _config(args)
    corpus = read_corpus(args.corpus)
    vocab = build_vocabulary(corpus, args.min_count or cfg.vocab.min_count,
                             args.max_vocab or cfg.vocab.max_vocab)
    write_vocabulary(vocab, args.out, {"config_hash": cfg.config_hash(), "argv": shlex.join(argv),
                                       "corpus": corpus.fingerprint()})


def cmd_count(args, argv):
    _require_out(args)
    cfg = _config(args)
    corpus = read_corpus(args.corpus)
    vocab = read_vocabulary(args.vocab)
    counts = count_pairs(corpus, vocab, args.window or cfg.cooc.window, args.period)
    write_cooc(counts, vocab, args.out)


def cmd_train(args, argv):
    _require_out(args)
    cfg = _config(args)
    corpus, vocab = _corpus_vocab(args, cfg)
    settings = _train_settings(args, cfg)
    es = build_embeddings(args.method, corpus, vocab, settings)
    prov = _provenance(cfg, argv)
    write_embeddings(es, args.out, prov["config_hash"], prov["seed"], prov["argv"])


def cmd_align(args, argv):
    es = read_embeddings(args.embeddings)
    aligned, adjacent = align_embedding_periods(es, args.reference)
    write_embeddings(aligned, args.out, es.meta.get("config_hash", ""), es.meta.get("seed"), list(argv))
    if args.maps:
        out = Path(args.maps)
        out.mkdir(parents=True, exist_ok=True)
        for m in adjacent:
            write_alignment(m, out / f"{m.source_period}__{m.target_period}.align")


def cmd_eval(args, argv):
    prov = {"argv": list(argv)}
    task = args.task
    if task == "smoothness":
        cfg = _config(args)
        corpus = read_corpus(args.corpus) if args.corpus else _ingest(cfg)
        probes = args.probe_words.split(",") if args.probe_words else list(cfg.eval.probe_words)
        if not probes:
            raise UsageError("no probe words: use --probe-words or eval.probe_words")
        alphas = [float(a) for a in args.alpha_grid.split(",")] if args.alpha_grid else list(cfg.eval.alphas)
        methods = args.methods.split(",") if args.methods else list(cfg.eval.methods)
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise UsageError(f"unknown method(s): {', '.join(unknown)}")
        t = args.period or cfg.eval.t or corpus.periods[0]
        report = smoothness_curve(methods, corpus, probes, t, alphas, _train_settings(args, cfg),
                                  seed=cfg.train.seed, min_count=cfg.vocab.min_count)
        report.provenance.update(config_hash=cfg.config_hash())
        return _emit(report, args, prov)

    es = read_embeddings(args.embeddings)
    if task == "similarity":
        report = similarity_benchmark(es, read_similarity_pairs(args.pairs), args.period or "last")
    elif task == "norms":
        words = read_word_list(args.words) if args.words else None
        report = norm_frequency_correlation(es, read_corpus(args.corpus), words)
    elif task == "displacement":
        t0, t1 = _two_periods(es, args.period)
        amap = read_alignment(args.alignment) if args.alignment else None
        disp = semantic_displacement(es, t0, t1, args.top_k, alignment=amap)
        report = EvalReport(
            "displacement", params={"t0": disp.t0, "t1": disp.t1, "top_k": args.top_k},
            items=[{"rank": r + 1, "word": w, "displacement": d} for r, (w, d) in enumerate(disp.ranking)],
            aggregates={"excluded": disp.excluded, "ranked": len(disp.ranking)},
            provenance={"method": es.method, "config_hash": es.meta.get("config_hash")})
    elif task == "shifts":
        t0, t1 = _two_periods(es, args.period)
        amap = read_alignment(args.alignment) if args.alignment else None
        report = known_shift_benchmark(es, read_word_list(args.shifted), read_word_list(args.control),
                                       t0, t1, tuple(args.top_k or (10, 50)), alignment=amap)
    elif task == "neighbors":
        hits = temporal_neighbors(es, args.word, args.period, args.top_k, args.target_period)
        report = EvalReport(
            "neighbors", params={"word": args.word, "period": args.period, "k": args.top_k,
                                 "target_periods": args.target_period},
            items=[{"word": w, "period": p, "cosine": c} for w, p, c in hits],
            aggregates={"found": len(hits)},
            provenance={"method": es.method, "config_hash": es.meta.get("config_hash")})
    else:
        report = trajectory_report(es, args.word, args.period, args.top_k)
    _emit(report, args, prov)


def cmd_export(args, argv):
    if args.provenance:
        info = read_provenance(args.embeddings)
        cmd = info.get("argv")
        if not cmd:
            raise ChronovecError(f"{args.embeddings}: no command line recorded")
        sys.stdout.write("chronovec " + shlex.join(cmd) + "\n")
        sys.stdout.write(f"# config_hash {info.get('config_hash', '')} seed {info.get('seed')}\n")
        return
    es = read_embeddings(args.embeddings)
    if es.is_sparse:
        raise ChronovecError("word2vec export needs dense embeddings; ppmi rows are sparse")
    if args.period is not None:
        rows = [(w, es.vector(w, args.period)) for w in es.words]
    else:
        rows = [(f"{w}@{p}", es.vector(w, p)) for p in es.periods for w in es.words]
    lines = [f"{len(rows)} {es.dim}"] + [w + " " + " ".join("%.9g" % x for x in v) for w, v in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_pipeline(args, argv):
    cfg = _config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prov = _provenance(cfg, argv)
    corpus = _ingest(cfg)
    write_corpus(corpus, out / "corpus.tsv", {"config_hash": prov["config_hash"]})
    vocab = build_vocabulary(corpus, cfg.vocab.min_count, cfg.vocab.max_vocab)
    write_vocabulary(vocab, out / "vocab.tsv", {"config_hash": prov["config_hash"]})
    settings = cfg.method_settings()
    for method in cfg.eval.methods:
        es = build_embeddings(method, corpus, vocab, settings)
        write_embeddings(es, out / f"{method}.emb", prov["config_hash"], prov["seed"], prov["argv"])
    if cfg.eval.probe_words:
        report = smoothness_curve(list(cfg.eval.methods), corpus, list(cfg.eval.probe_words),
                                  cfg.eval.t or corpus.periods[0], cfg.eval.alphas, settings,
                                  seed=cfg.train.seed, vocab=vocab)
        report.provenance.update(prov)
        report.write(out / "smoothness.json", "json")
        report.write(out / "smoothness.csv", "csv")
        report.write(out / "smoothness.svg", "svg")


def _require_out(args):
    if not args.out:
        raise UsageError("--out is required")


COMMANDS = {"ingest": cmd_ingest, "vocab": cmd_vocab, "count": cmd_count, "train": cmd_train,
            "align": cmd_align, "eval": cmd_eval, "export": cmd_export, "pipeline": cmd_pipeline}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    level = os.environ.get("CHRONOVEC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args, argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"chronovec: error: {exc}\n")
        return 1
    except (ChronovecError, OSError, ValueError) as exc:
        sys.stderr.write(f"chronovec: {type(exc).__name__}: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
