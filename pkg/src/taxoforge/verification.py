"""Noise filters for candidate isA relations.

Three independent judges, any of which can reject a candidate:

* incompatible concepts: for an entity attached to two concepts that share
  (almost) no hyponyms and have dissimilar attributes, drop the concept
  whose attribute distribution is farther (KL) from the entity's;
* named-entity support: drop hypernyms that behave like proper names;
* syntax rules: thematic-word lexicon and the head-stem rule.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .corpus import SpoTriple, split_title
from .generation import CANDIDATE, FILTERED, CandidateRelation
from .segstats import Dictionary, _is_alpha_script, segment

logger = logging.getLogger(__name__)

KL_TIE_TOLERANCE = 1e-12


class ConfigError(ValueError):
    """A verification rule is enabled but its artifact is missing or invalid."""


# -- Attribute distributions and KL ----------------------------------------

@dataclass(frozen=True)
class AttributeDistribution:
    weights: Mapping[str, float]
    support: int = 0

    def __post_init__(self):
        if any(w <= 0 for w in self.weights.values()):
            raise ValueError("attribute weights must be strictly positive")
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"attribute weights sum to {total}, not 1")


def _smoothed(counts: Mapping[str, int], vocabulary: Sequence[str], alpha: float) -> AttributeDistribution:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not vocabulary:
        raise ValueError("empty attribute vocabulary")
    raw = {a: counts.get(a, 0) + alpha for a in vocabulary}
    z = math.fsum(raw.values())
    support = sum(counts.get(a, 0) for a in vocabulary)
    return AttributeDistribution({a: v / z for a, v in raw.items()}, support)


def attribute_distribution(subject: str, triples: Iterable[SpoTriple], alpha: float,
                           vocabulary: Optional[Iterable[str]] = None) -> AttributeDistribution:
    """Add-alpha smoothed predicate distribution of one subject.

    The vocabulary defaults to every predicate in ``triples``.
    """
    triples = list(triples)
    vocab = sorted(set(vocabulary) if vocabulary is not None else {t.predicate for t in triples})
    counts = Counter(t.predicate for t in triples if t.subject == subject)
    return _smoothed(counts, vocab, alpha)


def kl_divergence(p: AttributeDistribution, q: AttributeDistribution) -> float:
    """D(p || q) = -sum_x p(x) log(q(x) / p(x)), natural log."""
    if p.weights.keys() != q.weights.keys():
        raise ValueError("distributions are over different attribute vocabularies")
    keys = sorted(p.weights)
    return -math.fsum(p.weights[x] * math.log(q.weights[x] / p.weights[x]) for x in keys)


def cosine(u: Mapping[str, float], v: Mapping[str, float]) -> float:
    dot = math.fsum(u[k] * v[k] for k in u.keys() & v.keys())
    nu = math.sqrt(math.fsum(x * x for x in u.values()))
    nv = math.sqrt(math.fsum(x * x for x in v.values()))
    if nu == 0 or nv == 0:
        return 0.0
    return dot / (nu * nv)


def jaccard(a: set, b: set) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


class AttributeModel:
    """Predicate counts per subject plus the concept -> hyponyms map.

    Concept distributions pool the triples of all the concept's hyponyms.
    """

    def __init__(self, triples: Iterable[SpoTriple], concept_hyponyms: Mapping[str, set[str]],
                 alpha: float = 0.1):
        self.alpha = alpha
        self.counts: dict[str, Counter] = defaultdict(Counter)
        for t in triples:
            self.counts[t.subject][t.predicate] += 1
        self.vocabulary = sorted({p for c in self.counts.values() for p in c})
        self.concept_hyponyms = concept_hyponyms
        self._pooled: dict[str, Counter] = {}

    def raw_counts(self, concept: str) -> Counter:
        pooled = self._pooled.get(concept)
        if pooled is None:
            pooled = Counter()
            for hypo in sorted(self.concept_hyponyms.get(concept, ())):
                pooled.update(self.counts.get(hypo, {}))
            self._pooled[concept] = pooled
        return pooled

    def entity(self, name: str) -> AttributeDistribution:
        return _smoothed(self.counts.get(name, {}), self.vocabulary, self.alpha)

    def concept(self, name: str) -> AttributeDistribution:
        return _smoothed(self.raw_counts(name), self.vocabulary, self.alpha)


@dataclass(frozen=True, order=True)
class IncompatiblePair:
    concept_a: str
    concept_b: str
    jaccard: float = field(compare=False)
    cosine: float = field(compare=False)

    def __post_init__(self):
        if not self.concept_a < self.concept_b:
            raise ValueError("incompatible pair must be in canonical order")


def _edge_maps(candidates: Iterable[CandidateRelation]):
    hyponyms: dict[str, set[str]] = defaultdict(set)
    concepts: dict[str, set[str]] = defaultdict(set)
    for rel in candidates:
        hyponyms[rel.hypernym].add(rel.hyponym)
        concepts[rel.hyponym].add(rel.hypernym)
    return hyponyms, concepts


def build_incompatible_pairs(candidates: Iterable[CandidateRelation], model: AttributeModel,
                             tau_j: float = 0.01, tau_c: float = 0.2,
                             min_support: int = 5) -> set[IncompatiblePair]:
    """Concept pairs co-occurring on some entity yet sharing almost nothing.

    A pair is incompatible when the Jaccard similarity of the hyponym sets
    is at most ``tau_j`` and the cosine of the raw pooled attribute counts
    is at most ``tau_c``.  Concepts with fewer than ``min_support``
    hyponyms are not considered.
    """
    if not (0 <= tau_j <= 1 and 0 <= tau_c <= 1):
        raise ValueError("thresholds must lie in [0, 1]")
    hyponyms, concepts = _edge_maps(candidates)
    eligible = {c for c, hs in hyponyms.items() if len(hs) >= min_support}
    pairs: set[tuple[str, str]] = set()
    for cs in concepts.values():
        for a, b in itertools.combinations(sorted(cs & eligible), 2):
            pairs.add((a, b))
    out = set()
    for a, b in pairs:
        j = jaccard(hyponyms[a], hyponyms[b])
        if j > tau_j:
            continue
        cos = cosine(model.raw_counts(a), model.raw_counts(b))
        if cos <= tau_c:
            out.add(IncompatiblePair(a, b, j, cos))
    return out


def resolve_conflict(entity: str, c1: str, c2: str, model: AttributeModel) -> Optional[str]:
    """The concept to drop for ``entity``: the one with larger KL, or None on a tie."""
    v_e = model.entity(entity)
    kl1 = kl_divergence(v_e, model.concept(c1))
    kl2 = kl_divergence(v_e, model.concept(c2))
    if abs(kl1 - kl2) < KL_TIE_TOLERANCE:
        logger.info("KL tie for %r between %r and %r; keeping both", entity, c1, c2)
        return None
    return c1 if kl1 > kl2 else c2


# -- Named-entity support ----------------------------------------------------

@dataclass(frozen=True)
class NeSupport:
    term: str
    s1: float
    s2: float
    s: float


def noisy_or(s1: float, s2: float) -> float:
    """1 - (1 - s1)(1 - s2), arranged so that 0 and 1 act exactly."""
    lo, hi = sorted((s1, s2))
    return hi + lo * (1.0 - hi)


class TermPositions:
    """How often each term sits on either side of the current candidates."""

    def __init__(self, candidates: Iterable[CandidateRelation] = ()):
        self.as_hyponym: Counter = Counter()
        self.as_hypernym: Counter = Counter()
        for rel in candidates:
            self.as_hyponym[rel.hyponym] += 1
            self.as_hypernym[rel.hypernym] += 1

    def hyponym_ratio(self, term: str) -> float:
        hypo = self.as_hyponym.get(term, 0)
        total = hypo + self.as_hypernym.get(term, 0)
        return hypo / total if total else 0.0


NeCounts = Mapping[str, tuple[int, int]]


def ne_support(term: str, corpus_counts: NeCounts, positions: TermPositions) -> NeSupport:
    ne, total = corpus_counts.get(term, (0, 0))
    s1 = ne / total if total else 0.0
    s2 = positions.hyponym_ratio(term)
    return NeSupport(term, s1, s2, noisy_or(s1, s2))


def ner_filter(candidates: Sequence[CandidateRelation], corpus_counts: NeCounts,
               theta: float = 0.9) -> list[CandidateRelation]:
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    positions = TermPositions(c for c in candidates if c.status == CANDIDATE)
    cache: dict[str, float] = {}
    out = []
    for rel in candidates:
        if rel.status == CANDIDATE:
            s = cache.get(rel.hypernym)
            if s is None:
                s = cache[rel.hypernym] = ne_support(rel.hypernym, corpus_counts, positions).s
            if s > theta:
                rel = rel.filtered("ne-support")
        out.append(rel)
    return out


def read_ne_counts(path: str | Path) -> dict[str, tuple[int, int]]:
    counts = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            try:
                term, ne, total = parts[0], int(parts[1]), int(parts[2])
            except (IndexError, ValueError):
                raise ConfigError(f"{path}:{line_no}: expected term<TAB>ne_count<TAB>total_count") from None
            if len(parts) != 3 or ne < 0 or total < ne:
                raise ConfigError(f"{path}:{line_no}: inconsistent NE counts")
            counts[term] = (ne, total)
    return counts


# -- Syntax rules ------------------------------------------------------------

@dataclass(frozen=True)
class ThematicLexicon:
    words: frozenset

    @classmethod
    def from_file(cls, path: str | Path) -> "ThematicLexicon":
        with open(path, encoding="utf-8") as fh:
            words = frozenset(w.strip() for w in fh if w.strip())
        if not words:
            raise ConfigError(f"thematic lexicon {path} is empty")
        return cls(words)


def thematic_filter(candidates: Sequence[CandidateRelation],
                    lexicon: ThematicLexicon) -> list[CandidateRelation]:
    return [rel.filtered("thematic-word")
            if rel.status == CANDIDATE and rel.hypernym in lexicon.words else rel
            for rel in candidates]


def default_stem_match(head: str, word: str, min_prefix: int = 5) -> bool:
    """Identity for ideographic words; case-folded shared prefix of at
    least ``min_prefix`` characters for alphabetic ones."""
    if not (head and word):
        return False
    if head == word:
        return True
    if not (_is_alpha_script(head[0]) and _is_alpha_script(word[0])):
        return False
    a, b = head.lower(), word.lower()
    if a == b:
        return True
    common = 0
    for x, y in zip(a, b):
        if x != y:
            break
        common += 1
    return common >= min_prefix


def head_stem_filter(candidate: CandidateRelation, dictionary: Dictionary,
                     stemmer: Optional[Callable[[str], str]] = None) -> bool:
    """True to keep.  Drops the candidate when the hypernym's head word
    (last word) stem-matches a non-head word of the hyponym.  A
    disambiguation bracket on the hyponym is not part of its name."""
    head = segment(candidate.hypernym, dictionary)[-1]
    modifiers = segment(split_title(candidate.hyponym)[0], dictionary)[:-1]
    if stemmer is not None:
        stem = stemmer(head)
        return not any(stemmer(w) == stem for w in modifiers)
    return not any(default_stem_match(head, w) for w in modifiers)


# -- Orchestration -----------------------------------------------------------

@dataclass
class VerifyConfig:
    tau_j: float = 0.01
    tau_c: float = 0.2
    min_support: int = 5
    alpha: float = 0.1
    theta: float = 0.9
    thematic: bool = True
    head_stem: bool = True
    ne: bool = True
    incompatible: bool = True

    def __post_init__(self):
        for name in ("tau_j", "tau_c", "theta"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigError(f"{name}={v} outside [0, 1]")
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if self.min_support < 1:
            raise ConfigError("min_support must be at least 1")

    @classmethod
    def disabled(cls) -> "VerifyConfig":
        return cls(thematic=False, head_stem=False, ne=False, incompatible=False)


def incompatibility_filter(candidates: Sequence[CandidateRelation], triples: Iterable[SpoTriple],
                           config: VerifyConfig) -> list[CandidateRelation]:
    active = [c for c in candidates if c.status == CANDIDATE]
    hyponyms, concepts = _edge_maps(active)
    model = AttributeModel(triples, hyponyms, config.alpha)
    if not model.vocabulary:
        logger.warning("no infobox attributes; incompatibility check skipped")
        return list(candidates)
    pairs = build_incompatible_pairs(active, model, config.tau_j, config.tau_c, config.min_support)
    by_concept: dict[str, list[IncompatiblePair]] = defaultdict(list)
    for pair in sorted(pairs):
        by_concept[pair.concept_a].append(pair)
    drop: set[tuple[str, str]] = set()
    for entity in sorted(concepts):
        cs = concepts[entity]
        removed: set[str] = set()
        for a in sorted(cs):
            for pair in by_concept.get(a, ()):
                b = pair.concept_b
                if b not in cs or a in removed or b in removed:
                    continue
                loser = resolve_conflict(entity, a, b, model)
                if loser is not None:
                    removed.add(loser)
                    drop.add((entity, loser))
    return [rel.filtered("incompatible-kl") if rel.status == CANDIDATE and rel.pair in drop else rel
            for rel in candidates]


def verify(candidates: Sequence[CandidateRelation], config: VerifyConfig, *,
           triples: Optional[Iterable[SpoTriple]] = None,
           dictionary: Optional[Dictionary] = None,
           lexicon: Optional[ThematicLexicon] = None,
           ne_counts: Optional[NeCounts] = None,
           stemmer: Optional[Callable[[str], str]] = None,
           ) -> tuple[list[CandidateRelation], list[CandidateRelation]]:
    """Run the enabled filters in order: thematic words, head-stem, NE
    support, incompatible concepts.  Returns ``(accepted, filtered)``."""
    missing = [name for name, enabled, res in (
        ("lexicon", config.thematic, lexicon),
        ("dictionary", config.head_stem, dictionary),
        ("ne_counts", config.ne, ne_counts),
        ("triples", config.incompatible, triples),
    ) if enabled and res is None]
    if missing:
        raise ConfigError(f"enabled rules need: {', '.join(missing)}")

    cands = list(candidates)
    if config.thematic:
        cands = thematic_filter(cands, lexicon)
    if config.head_stem:
        cands = [rel.filtered("head-stem")
                 if rel.status == CANDIDATE and not head_stem_filter(rel, dictionary, stemmer) else rel
                 for rel in cands]
    if config.ne:
        cands = ner_filter(cands, ne_counts, config.theta)
    if config.incompatible:
        cands = incompatibility_filter(cands, triples, config)

    accepted = [rel.accepted() for rel in cands if rel.status != FILTERED]
    filtered = [rel for rel in cands if rel.status == FILTERED]
    return accepted, filtered
