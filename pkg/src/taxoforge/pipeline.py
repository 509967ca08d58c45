"""End-to-end pipeline: ingest, pmi-build, generate, verify, store.

Each stage writes its outputs before the next one starts.  A rerun with
the same config reuses stages whose outputs are all present; anything
downstream of a recomputed stage is recomputed too.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import __version__
from .corpus import EncyclopediaPage, IngestReport, disambiguate, load_corpus, page_from_json, page_to_json
from .generation import (
    CandidateRelation, LookupGenerator, abstract_extract, bracket_extract, build_ds_dataset,
    discover_predicates, infobox_extract, merge_candidates, noop_generator, read_candidates, tag_extract,
    write_candidates,
)
from .segstats import Dictionary, PmiTable, build_pmi_table, segment
from .store import TaxonomyGraph, build_mention_index, insert_edges, save, stats
from .verification import ConfigError, ThematicLexicon, VerifyConfig, read_ne_counts, verify

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

STAGES = ("ingest", "pmi-build", "generate", "verify", "store")
OUTPUTS = {
    "ingest": ("pages.jsonl", "ingest_report.json"),
    "pmi-build": ("pmi.tsv",),
    "generate": ("candidates.tsv", "ds_dataset.tsv", "predicates.tsv"),
    "verify": ("accepted.tsv", "filtered.tsv"),
    "store": ("taxonomy.snapshot",),
}


@dataclass
class PipelineConfig:
    corpus: Path
    dictionary: Path
    output_dir: Path
    whitelist: Optional[Path] = None
    lexicon: Optional[Path] = None
    ne_counts: Optional[Path] = None
    pmi_alpha: float = 1.0
    pmi_include_tags: bool = False
    sources: tuple[str, ...] = ("bracket", "abstract", "infobox", "tag")
    abstract_generator: str = "none"
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        return cls.from_dict(raw, base=path.parent)

    @classmethod
    def from_dict(cls, raw: dict, base: Path = Path(".")) -> "PipelineConfig":
        paths = raw.get("paths", {})

        def p(key: str, required: bool = False) -> Optional[Path]:
            value = paths.get(key)
            if value is None:
                if required:
                    raise ConfigError(f"config is missing paths.{key}")
                return None
            return (base / value).resolve()

        pmi_cfg = raw.get("pmi", {})
        gen = raw.get("generation", {})
        generator = gen.get("abstract_generator", "none")
        if generator not in ("none", "lookup"):
            raise ConfigError(f"unknown abstract_generator {generator!r}")
        return cls(
            corpus=p("corpus", True),
            dictionary=p("dictionary", True),
            output_dir=p("output_dir") or (base / "out").resolve(),
            whitelist=p("whitelist"),
            lexicon=p("lexicon"),
            ne_counts=p("ne_counts"),
            pmi_alpha=float(pmi_cfg.get("alpha", 1.0)),
            pmi_include_tags=bool(pmi_cfg.get("include_tags", False)),
            sources=tuple(gen.get("sources", ("bracket", "abstract", "infobox", "tag"))),
            abstract_generator=generator,
            verify=VerifyConfig(**raw.get("verify", {})),
            seed=int(raw.get("seed", 0)),
            raw=raw,
        )

    def validate(self) -> None:
        needed = [("corpus", self.corpus), ("dictionary", self.dictionary)]
        if "infobox" in self.sources:
            needed.append(("whitelist", self.whitelist))
        if self.verify.thematic:
            needed.append(("lexicon", self.lexicon))
        if self.verify.ne:
            needed.append(("ne_counts", self.ne_counts))
        for name, path in needed:
            if path is None:
                raise ConfigError(f"paths.{name} is required by the enabled stages")
            if not path.is_file():
                raise ConfigError(f"paths.{name}: file not found: {path}")
        unknown = set(self.sources) - {"bracket", "abstract", "infobox", "tag"}
        if unknown:
            raise ConfigError(f"unknown generation sources {sorted(unknown)}")

    def config_hash(self) -> str:
        """Digest of the config as written plus the content of its inputs."""
        h = hashlib.sha256(json.dumps(self.raw, sort_keys=True, default=str).encode())
        for path in (self.corpus, self.dictionary, self.whitelist, self.lexicon, self.ne_counts):
            if path is not None and path.is_file():
                h.update(hashlib.sha256(path.read_bytes()).digest())
        return h.hexdigest()[:16]


# -- Stage functions (also used by the CLI) ----------------------------------

def read_lines(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def ingest(corpus: str | Path, pages_out: str | Path, report_out: Optional[str | Path] = None) -> IngestReport:
    report = IngestReport()
    pages = disambiguate(load_corpus(corpus, report))
    with open(pages_out, "w", encoding="utf-8") as fh:
        for page in pages:
            fh.write(page_to_json(page) + "\n")
    if report_out is not None:
        Path(report_out).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return report


def read_pages(path: str | Path) -> list[EncyclopediaPage]:
    with open(path, encoding="utf-8") as fh:
        return [page_from_json(line) for line in fh if line.strip()]


def pmi_compounds(pages: Iterable[EncyclopediaPage], dictionary: Dictionary, include_tags: bool = False):
    for page in pages:
        if page.bracket_compound:
            yield segment(page.bracket_compound, dictionary)
        if include_tags:
            for tag in page.tags:
                yield segment(tag, dictionary)


def build_pmi(pages: Iterable[EncyclopediaPage], dictionary: Dictionary, alpha: float = 1.0,
              include_tags: bool = False) -> PmiTable:
    return build_pmi_table(pmi_compounds(pages, dictionary, include_tags), alpha)


@dataclass
class GenerationResult:
    candidates: list[CandidateRelation]
    per_source: dict[str, int]
    dataset: list[tuple[str, str]]
    predicates: list


def generate(pages: Sequence[EncyclopediaPage], table: PmiTable, dictionary: Dictionary,
             whitelist: Iterable[str] = (), sources: Sequence[str] = ("bracket", "abstract", "infobox", "tag"),
             generator=None) -> GenerationResult:
    whitelist = frozenset(whitelist)
    bracket = [r for page in pages for r in bracket_extract(page, table, dictionary)] if "bracket" in sources else []
    index = {page.entity_name: page for page in pages}
    dataset = build_ds_dataset(bracket, index)
    if generator == "lookup":
        generator = LookupGenerator(dataset)
    abstract = ([r for page in pages for r in abstract_extract(page, generator or noop_generator)]
                if "abstract" in sources else [])
    infobox = [r for page in pages for r in infobox_extract(page, whitelist)] if "infobox" in sources else []
    tags = [r for page in pages for r in tag_extract(page)] if "tag" in sources else []
    predicates = discover_predicates(bracket, pages) if bracket else []
    merged = merge_candidates(bracket, abstract, infobox, tags)
    return GenerationResult(
        merged,
        {"bracket": len(bracket), "abstract": len(abstract), "infobox": len(infobox), "tag": len(tags)},
        dataset,
        predicates,
    )


def build_graph(accepted: Iterable[CandidateRelation], pages: Iterable[EncyclopediaPage],
                config_hash: str = "") -> TaxonomyGraph:
    graph = TaxonomyGraph()
    if config_hash:
        graph.meta["config_hash"] = config_hash
    insert_edges(graph, accepted)
    build_mention_index(graph, pages)
    return graph


def _write_pairs(path: Path, rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write("\t".join(str(x).replace("\t", " ").replace("\n", " ") for x in row) + "\n")


# -- Orchestration -----------------------------------------------------------

def run_pipeline(config: PipelineConfig, manifest_path: Optional[str | Path] = None) -> dict:
    """Run every stage; returns the manifest (also written to disk)."""
    config.validate()
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = Path(manifest_path) if manifest_path else out / "manifest.json"
    digest = config.config_hash()

    previous = {}
    if manifest_path.is_file():
        try:
            previous = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            previous = {}
    reusable = previous.get("config_hash") == digest
    prev_stages = previous.get("stages", {})

    manifest = {"version": __version__, "config_hash": digest, "stages": {}, "status": "running"}
    dictionary = Dictionary.from_file(config.dictionary)
    dirty = False
    cache: dict = {}

    def pages() -> list[EncyclopediaPage]:
        if "pages" not in cache:
            cache["pages"] = read_pages(out / "pages.jsonl")
        return cache["pages"]

    def run_ingest() -> dict:
        report = ingest(config.corpus, out / "pages.jsonl", out / "ingest_report.json")
        return {"records": report.records, "parsed": report.parsed, "skipped": report.skipped}

    def run_pmi() -> dict:
        table = build_pmi(pages(), dictionary, config.pmi_alpha, config.pmi_include_tags)
        table.save(out / "pmi.tsv")
        return {"unigrams": len(table.unigram_counts), "bigram_types": len(table.bigram_counts),
                "total_bigrams": table.total_bigrams}

    def run_generate() -> dict:
        table = PmiTable.load(out / "pmi.tsv")
        whitelist = read_lines(config.whitelist) if config.whitelist else []
        result = generate(pages(), table, dictionary, whitelist, config.sources,
                          "lookup" if config.abstract_generator == "lookup" else None)
        write_candidates(out / "candidates.tsv", result.candidates)
        _write_pairs(out / "ds_dataset.tsv", result.dataset)
        _write_pairs(out / "predicates.tsv", [(p.predicate, p.alignment_count) for p in result.predicates])
        return {"per_source": result.per_source, "merged": len(result.candidates),
                "ds_pairs": len(result.dataset), "predicates": len(result.predicates)}

    def run_verify() -> dict:
        candidates = read_candidates(out / "candidates.tsv")
        accepted, filtered = verify(
            candidates, config.verify,
            triples=[t for page in pages() for t in page.triples],
            dictionary=dictionary,
            lexicon=ThematicLexicon.from_file(config.lexicon) if config.verify.thematic else None,
            ne_counts=read_ne_counts(config.ne_counts) if config.verify.ne else None,
        )
        write_candidates(out / "accepted.tsv", accepted)
        write_candidates(out / "filtered.tsv", filtered)
        hist = Counter(r.filter_reason for r in filtered)
        return {"in": len(candidates), "accepted": len(accepted), "filtered": len(filtered),
                "filter_reasons": dict(sorted(hist.items()))}

    def run_store() -> dict:
        graph = build_graph(read_candidates(out / "accepted.tsv"), pages(), digest)
        save(graph, out / "taxonomy.snapshot")
        return stats(graph)._asdict()

    runners = {"ingest": run_ingest, "pmi-build": run_pmi, "generate": run_generate,
               "verify": run_verify, "store": run_store}

    for stage in STAGES:
        outputs = [out / name for name in OUTPUTS[stage]]
        prev = prev_stages.get(stage, {})
        if (not dirty and reusable and prev.get("status") in ("done", "reused")
                and all(p.is_file() for p in outputs)):
            manifest["stages"][stage] = {**prev, "status": "reused", "seconds": 0.0}
            continue
        dirty = True
        start = time.perf_counter()
        try:
            counts = runners[stage]()
        except Exception as exc:
            manifest["stages"][stage] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}",
                                         "seconds": round(time.perf_counter() - start, 4)}
            manifest["status"] = "failed"
            _write_manifest(manifest_path, manifest)
            raise
        manifest["stages"][stage] = {"status": "done", "counts": counts,
                                     "seconds": round(time.perf_counter() - start, 4)}
        logger.info("stage %s done: %s", stage, counts)

    manifest["status"] = "done"
    manifest["snapshot"] = str(out / "taxonomy.snapshot")
    _write_manifest(manifest_path, manifest)
    return manifest


def _write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
