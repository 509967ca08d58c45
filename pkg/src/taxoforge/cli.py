"""``taxoforge`` command line."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import disambiguate, load_corpus
from .evaluation import compute_precision, question_coverage, read_sheet, sample_for_labeling, write_sheet
from .generation import discover_predicates, read_candidates, write_candidates
from .pipeline import (
    PipelineConfig, build_graph, build_pmi, generate, ingest, read_lines, run_pipeline,
)
from .segstats import Dictionary, PmiTable
from .service import serve
from .store import load, save, stats
from .verification import ThematicLexicon, read_ne_counts, verify


def _pages(path):
    return disambiguate(load_corpus(path))


def cmd_ingest(args):
    out = args.out or Path(args.path).with_suffix(".pages.jsonl")
    report = ingest(args.path, out, args.report)
    print(json.dumps({"records": report.records, "parsed": report.parsed, "skipped": report.skipped}))


def cmd_pmi_build(args):
    table = build_pmi(_pages(args.corpus), Dictionary.from_file(args.dict), args.alpha, args.include_tags)
    table.save(args.out)
    print(f"{len(table.unigram_counts)} unigrams, {table.total_bigrams} bigrams -> {args.out}")


def cmd_generate(args):
    pages = _pages(args.corpus)
    whitelist = read_lines(args.whitelist) if args.whitelist else []
    result = generate(pages, PmiTable.load(args.pmi), Dictionary.from_file(args.dict), whitelist)
    write_candidates(args.out, result.candidates)
    print(json.dumps({"per_source": result.per_source, "merged": len(result.candidates)}))


def cmd_discover(args):
    known = [c for c in read_candidates(args.candidates) if "bracket" in c.sources]
    for cand in discover_predicates(known, _pages(args.corpus))[:args.top]:
        print(f"{cand.predicate}\t{cand.alignment_count}")


def cmd_verify(args):
    cfg = PipelineConfig.from_file(args.config)
    v = cfg.verify
    accepted, filtered = verify(
        read_candidates(args.candidates), v,
        triples=[t for p in _pages(cfg.corpus) for t in p.triples] if v.incompatible else None,
        dictionary=Dictionary.from_file(cfg.dictionary) if v.head_stem else None,
        lexicon=ThematicLexicon.from_file(cfg.lexicon) if v.thematic else None,
        ne_counts=read_ne_counts(cfg.ne_counts) if v.ne else None,
    )
    write_candidates(args.out_accepted, accepted)
    write_candidates(args.out_filtered, filtered)
    print(json.dumps({"accepted": len(accepted), "filtered": len(filtered)}))


def cmd_store(args):
    if args.action == "build":
        graph = build_graph(read_candidates(args.accepted), _pages(args.corpus))
        save(graph, args.snapshot)
        print(json.dumps(stats(graph)._asdict()))
    elif args.action == "stats":
        print(json.dumps(stats(load(args.snapshot))._asdict()))
    else:
        graph = load(args.snapshot)
        lookup = {"concepts": graph.get_concepts, "entities": graph.get_entities, "mentions": graph.men2ent}
        for item in lookup[args.kind](args.key):
            print(item)


def cmd_serve(args):
    serve(load(args.snapshot), args.addr)


def cmd_eval(args):
    if args.action == "sample":
        write_sheet(args.out, sample_for_labeling(load(args.snapshot), args.n, args.seed))
    elif args.action == "precision":
        report = compute_precision(read_sheet(args.sheet))
        print(f"overall\t{report.precision:.4f}\t[{report.wilson_95_interval[0]:.4f}, "
              f"{report.wilson_95_interval[1]:.4f}]\tn={report.overall.total}")
        for src, est in report.per_source.items():
            print(f"{src}\t{est.precision:.4f}\t[{est.interval[0]:.4f}, {est.interval[1]:.4f}]\tn={est.total}")
    else:
        questions = read_lines(args.questions)
        dictionary = Dictionary.from_file(args.dict) if args.dict else None
        report = question_coverage(questions, load(args.snapshot), dictionary)
        print(json.dumps(report.__dict__))


def cmd_run(args):
    manifest = run_pipeline(PipelineConfig.from_file(args.config), args.manifest)
    print(json.dumps(manifest, indent=2, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taxoforge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"taxoforge {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize a dump into pages")
    p.add_argument("path")
    p.add_argument("--report", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pmi-build", help="count compound statistics")
    p.add_argument("corpus")
    p.add_argument("--dict", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--include-tags", action="store_true")
    p.set_defaults(func=cmd_pmi_build)

    p = sub.add_parser("generate", help="extract candidate isA relations")
    p.add_argument("corpus")
    p.add_argument("--dict", required=True)
    p.add_argument("--pmi", required=True)
    p.add_argument("--whitelist")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("discover-predicates", help="rank infobox predicates aligned with bracket relations")
    p.add_argument("corpus")
    p.add_argument("--candidates", required=True)
    p.add_argument("--top", type=int, default=341)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("verify", help="filter candidates")
    p.add_argument("candidates")
    p.add_argument("--config", required=True)
    p.add_argument("--out-accepted", required=True)
    p.add_argument("--out-filtered", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("store", help="build, inspect or query a snapshot")
    p.add_argument("action", choices=("build", "stats", "query"))
    p.add_argument("--snapshot", required=True)
    p.add_argument("--accepted")
    p.add_argument("--corpus")
    p.add_argument("--kind", choices=("concepts", "entities", "mentions"), default="concepts")
    p.add_argument("--key")
    p.set_defaults(func=cmd_store)

    p = sub.add_parser("serve", help="serve a snapshot over HTTP")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--addr", default="127.0.0.1:8000")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="precision sampling and coverage")
    p.add_argument("action", choices=("sample", "precision", "coverage"))
    p.add_argument("--snapshot")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--sheet")
    p.add_argument("--questions")
    p.add_argument("--dict")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="run the whole pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_run)
    return parser


_REQUIRED = {
    ("store", "build"): ("accepted", "corpus"),
    ("store", "query"): ("key",),
    ("eval", "sample"): ("snapshot", "out"),
    ("eval", "precision"): ("sheet",),
    ("eval", "coverage"): ("snapshot", "questions"),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    for name in _REQUIRED.get((args.command, getattr(args, "action", None)), ()):
        if getattr(args, name) is None:
            parser.error(f"{args.command} {args.action} requires --{name}")
    try:
        args.func(args)
    except (OSError, ValueError) as exc:
        print(f"taxoforge: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
