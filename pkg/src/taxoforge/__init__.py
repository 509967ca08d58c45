"""Hypernym taxonomy construction from encyclopedia dumps."""

__version__ = "0.1.0"

from .corpus import EncyclopediaPage, SpoTriple, load_corpus, parse_page, split_title
from .segstats import Dictionary, PmiTable, build_pmi_table, pmi, segment
from .generation import CandidateRelation, SeparationTree, extract_hypernyms, merge_candidates, separate
from .verification import VerifyConfig, kl_divergence, noisy_or, verify
from .store import TaxonomyGraph

__all__ = [
    "CandidateRelation", "Dictionary", "EncyclopediaPage", "PmiTable", "SeparationTree", "SpoTriple",
    "TaxonomyGraph", "VerifyConfig", "build_pmi_table", "extract_hypernyms", "kl_divergence",
    "load_corpus", "merge_candidates", "noisy_or", "parse_page", "pmi", "segment", "separate",
    "split_title", "verify",
]
