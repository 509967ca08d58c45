"""Precision audits and question coverage."""

from __future__ import annotations

import csv
import math
import random
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist
from typing import Iterable, Optional, Sequence

from .segstats import Dictionary, segment
from .store import ENTITY, TaxonomyGraph

CORRECT, WRONG = "correct", "wrong"
SHEET_HEADER = ("hyponym", "hypernym", "source", "label")


@dataclass(frozen=True)
class LabeledSample:
    hyponym: str
    hypernym: str
    source: str
    label: Optional[str] = None


def sample_for_labeling(graph: TaxonomyGraph, n: int, seed: int = 0) -> list[LabeledSample]:
    """Uniform sample of ``n`` edges without replacement, fixed by ``seed``."""
    edges = sorted(graph.edges.items())
    if n > len(edges) or n < 0:
        raise ValueError(f"cannot sample {n} of {len(edges)} edges")
    picked = random.Random(seed).sample(edges, n)
    return [LabeledSample(hypo, hyper, ",".join(sorted(src))) for (hypo, hyper), src in picked]


def write_sheet(path: str | Path, samples: Iterable[LabeledSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(SHEET_HEADER)
        for s in samples:
            writer.writerow([s.hyponym, s.hypernym, s.source, s.label or ""])


def read_sheet(path: str | Path) -> list[LabeledSample]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None or tuple(header[:3]) != SHEET_HEADER[:3]:
            raise ValueError(f"{path}: not a labeling sheet")
        for row_no, row in enumerate(reader, 2):
            if not row:
                continue
            label = (row[3].strip().lower() if len(row) > 3 else "") or None
            if label not in (None, CORRECT, WRONG):
                raise ValueError(f"{path}:{row_no}: label must be '{CORRECT}' or '{WRONG}'")
            out.append(LabeledSample(row[0], row[1], row[2], label))
    return out


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    # the bounds are exactly 0 and 1 at the extremes; avoid float drift there
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class PrecisionEstimate:
    precision: float
    interval: tuple[float, float]
    correct: int
    total: int


@dataclass(frozen=True)
class PrecisionReport:
    overall: PrecisionEstimate
    per_source: dict[str, PrecisionEstimate]

    @property
    def precision(self) -> float:
        return self.overall.precision

    @property
    def wilson_95_interval(self) -> tuple[float, float]:
        return self.overall.interval


def _estimate(correct: int, total: int) -> PrecisionEstimate:
    return PrecisionEstimate(correct / total if total else 0.0, wilson_interval(correct, total), correct, total)


def compute_precision(labels: Sequence[LabeledSample]) -> PrecisionReport:
    missing = [i for i, s in enumerate(labels, 1) if s.label is None]
    if missing:
        raise ValueError(f"unlabeled rows: {missing}")
    correct = sum(s.label == CORRECT for s in labels)
    by_source: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for s in labels:
        for src in filter(None, s.source.split(",")):
            by_source[src][0] += s.label == CORRECT
            by_source[src][1] += 1
    return PrecisionReport(
        _estimate(correct, len(labels)),
        {src: _estimate(c, t) for src, (c, t) in sorted(by_source.items())},
    )


@dataclass(frozen=True)
class CoverageReport:
    questions_total: int
    questions_covered: int
    coverage_ratio: float
    avg_concepts_per_covered_entity: float


def question_coverage(questions: Sequence[str], graph: TaxonomyGraph,
                      dictionary: Optional[Dictionary] = None) -> CoverageReport:
    """A question is covered when greedy longest-match segmentation over
    the taxonomy vocabulary (plus ``dictionary``, which only serves to
    block spurious in-word hits) yields at least one taxonomy term."""
    vocab = set(graph.nodes) | {m for m, ents in graph.mentions.items() if ents}
    if not vocab:
        return CoverageReport(len(questions), 0, 0.0, 0.0)
    seg_dict = dictionary.union(vocab) if dictionary is not None else Dictionary(frozenset(vocab))
    covered = 0
    entities: set[str] = set()
    for question in questions:
        if not question.strip():
            continue
        hits = [w for w in segment(question, seg_dict) if w in vocab]
        if not hits:
            continue
        covered += 1
        for term in hits:
            if graph.mentions.get(term):
                entities.update(graph.mentions[term])
            elif graph.kind(term) == ENTITY:
                entities.add(term)
    avg = (sum(len(graph.get_concepts(e)) for e in entities) / len(entities)) if entities else 0.0
    total = len(questions)
    return CoverageReport(total, covered, covered / total if total else 0.0, avg)
