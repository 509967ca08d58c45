"""Encyclopedia dump ingestion.

One page per line, each a JSON object with ``title``, ``abstract``,
``infobox`` (predicate -> object, or predicate -> list of objects) and
``tags``.  Malformed lines are counted and skipped, never fatal.
"""

from __future__ import annotations

import json
import logging
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

logger = logging.getLogger(__name__)

_BRACKETS = {")": "(", "）": "（"}
_OPENERS = set(_BRACKETS.values())
MAX_REPORTED_ERRORS = 100


class InvalidRecordError(ValueError):
    """A dump record that cannot be turned into a page."""


@dataclass(frozen=True)
class SpoTriple:
    subject: str
    predicate: str
    object: str

    def __post_init__(self):
        if not (self.subject and self.predicate and self.object):
            raise InvalidRecordError(f"empty field in triple {self!r}")


@dataclass(frozen=True)
class EncyclopediaPage:
    entity_name: str
    bracket_compound: Optional[str] = None
    abstract: Optional[str] = None
    triples: tuple[SpoTriple, ...] = ()
    tags: tuple[str, ...] = ()
    title: str = ""

    @property
    def mention(self) -> str:
        """Bare surface name (title with the bracket stripped)."""
        return split_title(self.title)[0] if self.title else self.entity_name

    def to_record(self) -> dict:
        infobox: dict[str, object] = {}
        for t in self.triples:
            prev = infobox.get(t.predicate)
            if prev is None:
                infobox[t.predicate] = t.object
            elif isinstance(prev, list):
                prev.append(t.object)
            else:
                infobox[t.predicate] = [prev, t.object]
        return {
            "title": self.title or self.entity_name,
            "abstract": self.abstract,
            "infobox": infobox,
            "tags": list(self.tags),
        }


def split_title(raw_title: str) -> tuple[str, Optional[str]]:
    """Split ``"Dehua Liu (singer)"`` into ``("Dehua Liu", "singer")``.

    Only a single balanced trailing bracket (ASCII or full-width) is split
    off; nested or unbalanced trailing brackets leave the title whole.
    """
    title = raw_title.strip() if raw_title else ""
    if not title:
        raise InvalidRecordError("empty title")
    close = title[-1]
    if close not in _BRACKETS:
        return title, None
    open_ch = _BRACKETS[close]
    start = title.rfind(open_ch)
    if start <= 0:
        return title, None
    # ASCII disambiguation brackets are space-separated; "f(x)" is a name
    if open_ch == "(" and not title[start - 1].isspace():
        return title, None
    inner = title[start + 1:-1]
    if any(ch in inner for ch in _OPENERS) or any(ch in inner for ch in _BRACKETS):
        return title, None
    name = title[:start].strip()
    inner = inner.strip()
    if not name or not inner:
        return title, None
    return name, inner


def parse_page(record: dict | str) -> EncyclopediaPage:
    """Build a normalized page from one dump record (dict or JSON line)."""
    if isinstance(record, str):
        try:
            record = json.loads(record)
        except json.JSONDecodeError as exc:
            raise InvalidRecordError(f"bad JSON: {exc.msg}") from None
    if not isinstance(record, dict):
        raise InvalidRecordError("record is not an object")
    title = record.get("title")
    if not isinstance(title, str):
        raise InvalidRecordError("missing title")
    entity_name, compound = split_title(title)

    abstract = record.get("abstract")
    if abstract is not None and not isinstance(abstract, str):
        raise InvalidRecordError("abstract must be a string")
    abstract = abstract.strip() if abstract else None

    infobox = record.get("infobox") or {}
    if not isinstance(infobox, dict):
        raise InvalidRecordError("infobox must be an object")
    triples = []
    for predicate, value in infobox.items():
        values = value if isinstance(value, list) else [value]
        for obj in values:
            if not isinstance(obj, str):
                raise InvalidRecordError(f"infobox value for {predicate!r} is not a string")
            predicate_n, obj_n = predicate.strip(), obj.strip()
            if predicate_n and obj_n:
                triples.append(SpoTriple(entity_name, predicate_n, obj_n))

    tags = record.get("tags") or []
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise InvalidRecordError("tags must be a list of strings")
    seen: dict[str, None] = {}
    for tag in tags:
        tag = tag.strip()
        if tag:
            seen.setdefault(tag)

    return EncyclopediaPage(
        entity_name=entity_name,
        bracket_compound=compound,
        abstract=abstract,
        triples=tuple(dict.fromkeys(triples)),
        tags=tuple(seen),
        title=title.strip(),
    )


@dataclass
class IngestReport:
    records: int = 0
    parsed: int = 0
    skipped: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def ok(self) -> None:
        with self._lock:
            self.records += 1
            self.parsed += 1

    def fail(self, line_no: int, message: str) -> None:
        with self._lock:
            self.records += 1
            self.skipped += 1
            if len(self.errors) < MAX_REPORTED_ERRORS:
                self.errors.append((line_no, message))

    def merge(self, other: "IngestReport") -> "IngestReport":
        with self._lock:
            self.records += other.records
            self.parsed += other.parsed
            self.skipped += other.skipped
            room = MAX_REPORTED_ERRORS - len(self.errors)
            self.errors.extend(other.errors[:max(room, 0)])
        return self

    def to_dict(self) -> dict:
        return {
            "records": self.records,
            "parsed": self.parsed,
            "skipped": self.skipped,
            "errors": [{"line": n, "message": m} for n, m in self.errors],
        }


def load_corpus(path: str | Path, report: Optional[IngestReport] = None) -> Iterator[EncyclopediaPage]:
    """Stream pages from a line-delimited dump.

    The file is opened eagerly so an unreadable path fails here rather than
    on first iteration.  Blank lines are ignored and not counted.
    """
    fh = open(path, encoding="utf-8")
    if report is None:
        report = IngestReport()
    return _iter_pages(fh, report)


def _iter_pages(fh, report: IngestReport) -> Iterator[EncyclopediaPage]:
    with fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                page = parse_page(line)
            except InvalidRecordError as exc:
                logger.warning("line %d skipped: %s", line_no, exc)
                report.fail(line_no, str(exc))
                continue
            report.ok()
            yield page


def disambiguate(pages: Iterable[EncyclopediaPage]) -> list[EncyclopediaPage]:
    """Give every page a unique entity name.

    Pages whose bare name collides with another page keep their full
    bracketed title as the entity name (``Apple (fruit)``); unique names
    stay bare.  Later duplicates of an identical title are dropped.
    """
    pages = list(pages)
    counts = Counter(p.entity_name for p in pages)
    out: list[EncyclopediaPage] = []
    seen: set[str] = set()
    for page in pages:
        name = page.entity_name
        if counts[name] > 1 and page.title:
            name = page.title
        if name in seen:
            logger.warning("duplicate page %r dropped", name)
            continue
        seen.add(name)
        if name != page.entity_name:
            page = EncyclopediaPage(
                entity_name=name,
                bracket_compound=page.bracket_compound,
                abstract=page.abstract,
                triples=tuple(SpoTriple(name, t.predicate, t.object) for t in page.triples),
                tags=page.tags,
                title=page.title,
            )
        out.append(page)
    return out


def page_to_json(page: EncyclopediaPage) -> str:
    """Serialize with the resolved entity name kept alongside the record."""
    rec = page.to_record()
    if page.entity_name != split_title(rec["title"])[0]:
        rec["entity"] = page.entity_name
    return json.dumps(rec, ensure_ascii=False, sort_keys=True)


def page_from_json(line: str) -> EncyclopediaPage:
    rec = json.loads(line)
    page = parse_page(rec)
    entity = rec.get("entity")
    if entity and entity != page.entity_name:
        page = EncyclopediaPage(
            entity_name=entity,
            bracket_compound=page.bracket_compound,
            abstract=page.abstract,
            triples=tuple(SpoTriple(entity, t.predicate, t.object) for t in page.triples),
            tags=page.tags,
            title=page.title,
        )
    return page
