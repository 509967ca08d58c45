"""Candidate isA generation from brackets, abstracts, infoboxes and tags."""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .corpus import EncyclopediaPage
from .segstats import Dictionary, PmiTable, concat, pmi, segment

logger = logging.getLogger(__name__)

BRACKET, ABSTRACT, INFOBOX, TAG = "bracket", "abstract", "infobox", "tag"
SOURCES = (BRACKET, ABSTRACT, INFOBOX, TAG)

CANDIDATE, ACCEPTED, FILTERED = "candidate", "accepted", "filtered"
FILTER_REASONS = ("incompatible-kl", "ne-support", "thematic-word", "head-stem")

Scorer = Callable[[str, str], float]
ConceptGenerator = Callable[[str], Sequence[str]]


@dataclass(frozen=True)
class CandidateRelation:
    hyponym: str
    hypernym: str
    sources: frozenset = frozenset()
    status: str = CANDIDATE
    filter_reason: Optional[str] = None

    def __post_init__(self):
        if self.hyponym == self.hypernym:
            raise ValueError(f"self-loop isA({self.hyponym}, {self.hypernym})")
        if not self.sources or not set(self.sources) <= set(SOURCES):
            raise ValueError(f"bad sources {set(self.sources)!r}")
        if (self.status == FILTERED) != (self.filter_reason is not None):
            raise ValueError("filter_reason must be set exactly when status is filtered")
        if self.filter_reason is not None and self.filter_reason not in FILTER_REASONS:
            raise ValueError(f"unknown filter reason {self.filter_reason!r}")

    @property
    def pair(self) -> tuple[str, str]:
        return self.hyponym, self.hypernym

    def filtered(self, reason: str) -> "CandidateRelation":
        return replace(self, status=FILTERED, filter_reason=reason)

    def accepted(self) -> "CandidateRelation":
        return replace(self, status=ACCEPTED, filter_reason=None)


def relation(hyponym: str, hypernym: str, *sources: str) -> CandidateRelation:
    return CandidateRelation(hyponym, hypernym, frozenset(sources))


# -- Separation -------------------------------------------------------------

@dataclass(frozen=True)
class SeparationTree:
    text: str
    left: Optional["SeparationTree"] = None
    right: Optional["SeparationTree"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.text]
        return self.left.leaves() + self.right.leaves()

    def bracketing(self):
        """Nested tuples of leaf strings, e.g. ``(("a", "b"), "c")``."""
        if self.is_leaf:
            return self.text
        return (self.left.bracketing(), self.right.bracketing())


def _join(left: SeparationTree, right: SeparationTree) -> SeparationTree:
    return SeparationTree(concat(left.text, right.text), left, right)


def _scorer(table: Union[PmiTable, Scorer]) -> Scorer:
    if isinstance(table, PmiTable):
        return lambda a, b: pmi(table, a, b)
    return table


def separate(words: Sequence[str], table: Union[PmiTable, Scorer]) -> SeparationTree:
    """Build the binary constituency tree of a segmented noun compound.

    A pass slides a three-element window from the right end to the left.
    At each window the left-pair and right-pair PMI are compared: a
    strictly larger right pair is merged and the window moves left,
    otherwise the window just moves left.  At the leftmost window a
    strictly larger left pair is merged instead, and the pass ends.
    Passes repeat until two elements remain, which become the root.  A
    pass that merges nothing (all ties) falls back to merging the
    highest-PMI adjacent pair, leftmost on ties.
    """
    if not words:
        raise ValueError("cannot separate an empty word sequence")
    score = _scorer(table)
    nodes = [SeparationTree(w) for w in words]
    budget = len(nodes) * len(nodes) + 1
    steps = 0
    while len(nodes) > 2:
        merged = False
        c = len(nodes) - 2
        while len(nodes) >= 3:
            steps += 1
            if steps > budget:
                raise RuntimeError("separation exceeded its step bound")
            left = score(nodes[c - 1].text, nodes[c].text)
            right = score(nodes[c].text, nodes[c + 1].text)
            if c == 1:
                if left > right:
                    nodes[0:2] = [_join(nodes[0], nodes[1])]
                    merged = True
                elif left < right:
                    nodes[1:3] = [_join(nodes[1], nodes[2])]
                    merged = True
                break
            if left < right:
                nodes[c:c + 2] = [_join(nodes[c], nodes[c + 1])]
                merged = True
            c -= 1
        if not merged and len(nodes) > 2:
            scores = [score(nodes[j].text, nodes[j + 1].text) for j in range(len(nodes) - 1)]
            best = max(scores)
            k = scores.index(best)
            nodes[k:k + 2] = [_join(nodes[k], nodes[k + 1])]
    if len(nodes) == 2:
        return _join(nodes[0], nodes[1])
    return nodes[0]


def extract_hypernyms(tree: SeparationTree) -> list[str]:
    """Strings on the rightmost path below the root, longest first.

    A single-leaf tree yields its own word.
    """
    if tree.is_leaf:
        return [tree.text]
    out: list[str] = []
    node = tree.right
    while node is not None:
        if node.text not in out:
            out.append(node.text)
        node = node.right
    return out


# -- Extractors -------------------------------------------------------------

def bracket_extract(page: EncyclopediaPage, table: Union[PmiTable, Scorer],
                    dictionary: Dictionary) -> list[CandidateRelation]:
    if not page.bracket_compound:
        return []
    tree = separate(segment(page.bracket_compound, dictionary), table)
    return [relation(page.entity_name, h, BRACKET)
            for h in extract_hypernyms(tree) if h != page.entity_name]


def build_ds_dataset(bracket_relations: Iterable[CandidateRelation],
                     pages: Mapping[str, EncyclopediaPage]) -> list[tuple[str, str]]:
    """(abstract, concept) training pairs from trusted bracket relations."""
    pairs: dict[tuple[str, str], None] = {}
    for rel in bracket_relations:
        page = pages.get(rel.hyponym)
        if page is None or not page.abstract:
            continue
        pairs.setdefault((page.abstract, rel.hypernym))
    return list(pairs)


def noop_generator(abstract: str) -> list[str]:
    return []


class LookupGenerator:
    """Concept generator that replays a distant-supervision dataset."""

    def __init__(self, pairs: Iterable[tuple[str, str]]):
        self.table: dict[str, list[str]] = {}
        for abstract, concept in pairs:
            concepts = self.table.setdefault(abstract, [])
            if concept not in concepts:
                concepts.append(concept)

    def __call__(self, abstract: str) -> list[str]:
        return list(self.table.get(abstract, ()))


def abstract_extract(page: EncyclopediaPage,
                     generator: ConceptGenerator = noop_generator) -> list[CandidateRelation]:
    if not page.abstract:
        return []
    try:
        concepts = list(generator(page.abstract))
    except Exception:
        logger.exception("concept generator failed on %r", page.entity_name)
        return []
    out: dict[str, CandidateRelation] = {}
    for concept in concepts:
        concept = concept.strip() if isinstance(concept, str) else ""
        if concept and concept != page.entity_name and concept not in out:
            out[concept] = relation(page.entity_name, concept, ABSTRACT)
    return list(out.values())


@dataclass(frozen=True)
class PredicateCandidate:
    predicate: str
    alignment_count: int


def discover_predicates(known_relations: Iterable[CandidateRelation],
                        corpus: Iterable[EncyclopediaPage]) -> list[PredicateCandidate]:
    """Rank infobox predicates by how many known isA pairs they restate."""
    known = {r.pair for r in known_relations}
    counts: Counter = Counter()
    for page in corpus:
        for t in page.triples:
            if (t.subject, t.object) in known:
                counts[t.predicate] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [PredicateCandidate(p, n) for p, n in ranked]


def infobox_extract(page: EncyclopediaPage, whitelist: set[str] | frozenset[str]) -> list[CandidateRelation]:
    return [relation(t.subject, t.object, INFOBOX)
            for t in page.triples
            if t.predicate in whitelist and t.subject != t.object]


def tag_extract(page: EncyclopediaPage) -> list[CandidateRelation]:
    return [relation(page.entity_name, tag, TAG) for tag in page.tags if tag != page.entity_name]


def merge_candidates(*streams: Iterable[CandidateRelation]) -> list[CandidateRelation]:
    """Collapse duplicate pairs, unioning their sources; sorted output."""
    sources: dict[tuple[str, str], set[str]] = {}
    for stream in streams:
        for rel in stream:
            sources.setdefault(rel.pair, set()).update(rel.sources)
    return [CandidateRelation(hypo, hyper, frozenset(src))
            for (hypo, hyper), src in sorted(sources.items())]


# -- Candidate dump ---------------------------------------------------------

def write_candidates(path: str | Path, candidates: Iterable[CandidateRelation]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_NONE)
        for rel in candidates:
            row = [rel.hyponym, rel.hypernym, ",".join(sorted(rel.sources)), rel.status]
            if rel.filter_reason:
                row.append(rel.filter_reason)
            writer.writerow(row)
            n += 1
    return n


def read_candidates(path: str | Path) -> list[CandidateRelation]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) not in (4, 5):
                raise ValueError(f"{path}:{line_no}: expected 4 or 5 columns, got {len(cols)}")
            reason = cols[4] if len(cols) == 5 else None
            out.append(CandidateRelation(cols[0], cols[1], frozenset(cols[2].split(",")), cols[3], reason))
    return out
