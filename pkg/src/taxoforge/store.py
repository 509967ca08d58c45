"""Typed taxonomy graph, mention index, statistics and snapshots.

Snapshot layout (UTF-8, every section sorted)::

    #SNAPSHOT<TAB>config_hash=<hex>
    #NODES
    name<TAB>kind
    #EDGES
    hyponym<TAB>hypernym<TAB>sources
    #MENTIONS
    mention<TAB>entity
    #END<TAB><record count>
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Union

from .corpus import EncyclopediaPage
from .generation import ACCEPTED, CandidateRelation

ENTITY, CONCEPT, BOTH = "entity", "concept", "both"
_SECTIONS = ("#NODES", "#EDGES", "#MENTIONS")


class SnapshotError(ValueError):
    pass


class GraphStats(NamedTuple):
    entity_count: int
    concept_count: int
    entity_concept_edges: int
    subconcept_edges: int


@dataclass(frozen=True)
class EdgeError:
    hyponym: str
    hypernym: str
    message: str


class TaxonomyGraph:
    """isA edges plus page-registered entities and a mention index.

    Node kinds are derived: a name is a concept when it is the hypernym of
    some edge, an entity when it comes from a page or is the hyponym of
    some edge, ``both`` when both hold.
    """

    def __init__(self):
        self.edges: dict[tuple[str, str], frozenset] = {}
        self.registered: set[str] = set()
        self.mentions: dict[str, set[str]] = defaultdict(set)
        self.rejected: list[EdgeError] = []
        self.meta: dict[str, str] = {}
        self._hypernyms: dict[str, set[str]] = defaultdict(set)
        self._hyponyms: dict[str, set[str]] = defaultdict(set)

    def add_edge(self, hyponym: str, hypernym: str, sources: Iterable[str] = ()) -> bool:
        if hyponym == hypernym:
            self.rejected.append(EdgeError(hyponym, hypernym, "self-loop"))
            return False
        key = (hyponym, hypernym)
        self.edges[key] = self.edges.get(key, frozenset()) | frozenset(sources)
        self._hypernyms[hyponym].add(hypernym)
        self._hyponyms[hypernym].add(hyponym)
        return True

    def register_entity(self, name: str) -> None:
        self.registered.add(name)

    def kind(self, name: str) -> str | None:
        is_concept = bool(self._hyponyms.get(name))
        is_entity = name in self.registered or bool(self._hypernyms.get(name))
        if is_concept and is_entity:
            return BOTH
        if is_concept:
            return CONCEPT
        if is_entity:
            return ENTITY
        return None

    @property
    def nodes(self) -> dict[str, str]:
        names = set(self.registered)
        for hypo, hyper in self.edges:
            names.add(hypo)
            names.add(hyper)
        return {n: self.kind(n) for n in sorted(names)}

    def get_concepts(self, entity: str) -> list[str]:
        return sorted(self._hypernyms.get(entity, ()))

    def get_entities(self, concept: str) -> list[str]:
        return sorted(self._hyponyms.get(concept, ()))

    def men2ent(self, mention: str) -> list[str]:
        return sorted(self.mentions.get(mention, ()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TaxonomyGraph):
            return NotImplemented
        return (self.nodes == other.nodes and self.edges == other.edges
                and {k: v for k, v in self.mentions.items() if v}
                == {k: v for k, v in other.mentions.items() if v})

    def __repr__(self) -> str:
        return f"TaxonomyGraph(nodes={len(self.nodes)}, edges={len(self.edges)}, mentions={len(self.mentions)})"


def insert_edges(graph: TaxonomyGraph,
                 accepted: Iterable[Union[CandidateRelation, tuple]]) -> TaxonomyGraph:
    for rel in accepted:
        if isinstance(rel, CandidateRelation):
            if rel.status != ACCEPTED:
                raise ValueError(f"refusing to insert {rel.status} relation {rel.pair}")
            graph.add_edge(rel.hyponym, rel.hypernym, rel.sources)
        else:
            hypo, hyper, *rest = rel
            graph.add_edge(hypo, hyper, rest[0] if rest else ())
    return graph


def build_mention_index(graph: TaxonomyGraph, pages: Iterable[EncyclopediaPage]) -> TaxonomyGraph:
    """Register page entities and map bare and bracketed titles to them."""
    for page in pages:
        entity = page.entity_name
        graph.register_entity(entity)
        graph.mentions[entity].add(entity)
        graph.mentions[page.mention].add(entity)
        if page.title:
            graph.mentions[page.title].add(entity)
    return graph


def get_concepts(graph: TaxonomyGraph, entity: str) -> list[str]:
    return graph.get_concepts(entity)


def get_entities(graph: TaxonomyGraph, concept: str) -> list[str]:
    return graph.get_entities(concept)


def men2ent(graph: TaxonomyGraph, mention: str) -> list[str]:
    return graph.men2ent(mention)


def stats(graph: TaxonomyGraph) -> GraphStats:
    kinds = graph.nodes
    entities = sum(1 for k in kinds.values() if k in (ENTITY, BOTH))
    concepts = sum(1 for k in kinds.values() if k in (CONCEPT, BOTH))
    sub = sum(1 for hypo, _ in graph.edges if kinds[hypo] in (CONCEPT, BOTH))
    return GraphStats(entities, concepts, len(graph.edges) - sub, sub)


def _field(value: str) -> str:
    if "\t" in value or "\n" in value or "\r" in value:
        raise SnapshotError(f"value {value!r} contains a tab or newline")
    return value


def dumps(graph: TaxonomyGraph) -> str:
    lines = [f"#SNAPSHOT\tconfig_hash={graph.meta.get('config_hash', '')}", "#NODES"]
    records = 0
    for name, kind in graph.nodes.items():
        lines.append(f"{_field(name)}\t{kind}")
        records += 1
    lines.append("#EDGES")
    for (hypo, hyper), sources in sorted(graph.edges.items()):
        lines.append(f"{_field(hypo)}\t{_field(hyper)}\t{','.join(sorted(sources))}")
        records += 1
    lines.append("#MENTIONS")
    for mention in sorted(graph.mentions):
        for entity in sorted(graph.mentions[mention]):
            lines.append(f"{_field(mention)}\t{_field(entity)}")
            records += 1
    lines.append(f"#END\t{records}")
    return "\n".join(lines) + "\n"


def save(graph: TaxonomyGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(graph), encoding="utf-8")


def loads(text: str, source: str = "<snapshot>") -> TaxonomyGraph:
    graph = TaxonomyGraph()
    listed: dict[str, str] = {}
    section = None
    records = 0
    ended = False
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    def fail(line_no: int, msg: str):
        raise SnapshotError(f"{source}:{line_no}: {msg}")

    for line_no, line in enumerate(lines, 1):
        if ended:
            fail(line_no, "content after #END")
        if line_no == 1:
            if not line.startswith("#SNAPSHOT"):
                fail(1, "missing #SNAPSHOT header")
            _, _, value = line.partition("config_hash=")
            if value:
                graph.meta["config_hash"] = value
            continue
        if line in _SECTIONS:
            expected = _SECTIONS[_SECTIONS.index(line) - 1] if line != "#NODES" else None
            if section != expected:
                fail(line_no, f"section {line} out of order")
            section = line
            continue
        if line.startswith("#END"):
            parts = line.split("\t")
            if section != "#MENTIONS" or len(parts) != 2 or not parts[1].isdigit():
                fail(line_no, "malformed #END marker")
            if int(parts[1]) != records:
                fail(line_no, f"#END declares {parts[1]} records, found {records}")
            ended = True
            continue
        cols = line.split("\t")
        if section == "#NODES":
            if len(cols) != 2 or cols[1] not in (ENTITY, CONCEPT, BOTH) or not cols[0]:
                fail(line_no, f"malformed node line {line!r}")
            listed[cols[0]] = cols[1]
        elif section == "#EDGES":
            if len(cols) != 3 or not cols[0] or not cols[1]:
                fail(line_no, f"malformed edge line {line!r}")
            sources = [s for s in cols[2].split(",") if s]
            if not graph.add_edge(cols[0], cols[1], sources):
                fail(line_no, "self-loop edge")
        elif section == "#MENTIONS":
            if len(cols) != 2 or not cols[0] or not cols[1]:
                fail(line_no, f"malformed mention line {line!r}")
            graph.mentions[cols[0]].add(cols[1])
        else:
            fail(line_no, "record outside any section")
        records += 1
    if not ended:
        fail(len(lines), "truncated snapshot: no #END marker")

    for name, kind in listed.items():
        if kind in (ENTITY, BOTH):
            graph.register_entity(name)
    derived = graph.nodes
    if derived != listed:
        bad = sorted(set(derived.items()) ^ set(listed.items()))[0]
        raise SnapshotError(f"{source}: node kinds disagree with edges at {bad[0]!r}")
    return graph


def load(path: str | Path) -> TaxonomyGraph:
    return loads(Path(path).read_text(encoding="utf-8"), str(path))
