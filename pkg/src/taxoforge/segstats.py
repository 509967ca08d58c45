"""Dictionary segmentation and adjacent-pair PMI statistics."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


def _is_alpha_script(ch: str) -> bool:
    # letters/digits of space-delimited scripts; CJK starts at U+2E80
    return ch.isalnum() and ord(ch) < 0x2E80


def concat(left: str, right: str) -> str:
    """The string-concatenation operator used when merging constituents.

    Two words of a space-delimited script get a single space between
    them; ideographic text is glued directly.
    """
    if left and right and _is_alpha_script(left[-1]) and _is_alpha_script(right[0]):
        return f"{left} {right}"
    return left + right


def join_words(words: Sequence[str]) -> str:
    out = ""
    for w in words:
        out = concat(out, w) if out else w
    return out


@dataclass(frozen=True)
class Dictionary:
    entries: frozenset[str]
    max_word_len: int = field(init=False)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("dictionary must not be empty")
        object.__setattr__(self, "max_word_len", max(len(w) for w in self.entries))

    @classmethod
    def from_words(cls, words: Iterable[str]) -> "Dictionary":
        return cls(frozenset(w.strip() for w in words if w.strip()))

    @classmethod
    def from_file(cls, path: str | Path) -> "Dictionary":
        with open(path, encoding="utf-8") as fh:
            return cls.from_words(fh)

    def union(self, words: Iterable[str]) -> "Dictionary":
        return Dictionary(self.entries | frozenset(w for w in words if w))

    def __contains__(self, word: str) -> bool:
        return word in self.entries


def segment(text: str, dictionary: Dictionary) -> list[str]:
    """Greedy longest-match, left to right.

    Whitespace separates words and is not emitted (unless it is part of a
    dictionary entry such as ``"strategy officer"``).  Uncovered
    ideographic characters become single-character words; an uncovered run
    of letters from a space-delimited script stays one word, and dictionary
    hits inside such a run must end on the run boundary.
    """
    if not text:
        raise ValueError("cannot segment empty text")
    words: list[str] = []
    n = len(text)
    i = 0
    entries = dictionary.entries
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        match = None
        for length in range(min(dictionary.max_word_len, n - i), 0, -1):
            cand = text[i:i + length]
            if cand in entries:
                end = i + length
                if _is_alpha_script(cand[-1]) and end < n and _is_alpha_script(text[end]):
                    continue
                match = cand
                break
        if match is None:
            j = i + 1
            if _is_alpha_script(ch):
                while j < n and _is_alpha_script(text[j]):
                    j += 1
            match = text[i:j]
        words.append(match)
        i += len(match)
    return words


@dataclass
class PmiTable:
    unigram_counts: Counter = field(default_factory=Counter)
    bigram_counts: Counter = field(default_factory=Counter)
    smoothing_alpha: float = 1.0

    def __post_init__(self):
        if self.smoothing_alpha <= 0:
            raise ValueError("smoothing alpha must be positive")

    @property
    def total_bigrams(self) -> int:
        return sum(self.bigram_counts.values())

    @property
    def vocab_size(self) -> int:
        return len(self.unigram_counts)

    def add(self, words: Sequence[str]) -> None:
        self.unigram_counts.update(words)
        self.bigram_counts.update(zip(words, words[1:]))

    def merge(self, other: "PmiTable") -> "PmiTable":
        merged = PmiTable(Counter(self.unigram_counts), Counter(self.bigram_counts), self.smoothing_alpha)
        merged.unigram_counts.update(other.unigram_counts)
        merged.bigram_counts.update(other.bigram_counts)
        return merged

    def __call__(self, a: str, b: str) -> float:
        return pmi(self, a, b)

    def save(self, path: str | Path) -> None:
        lines = [f"#PMI\talpha={self.smoothing_alpha!r}", "#UNIGRAMS"]
        for word, count in sorted(self.unigram_counts.items()):
            lines.append(f"{_check(word)}\t{count}")
        lines.append("#BIGRAMS")
        for (a, b), count in sorted(self.bigram_counts.items()):
            lines.append(f"{_check(a)}\t{_check(b)}\t{count}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "PmiTable":
        table = cls()
        section = None
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#PMI"):
                    _, _, alpha = line.partition("alpha=")
                    table.smoothing_alpha = float(alpha)
                elif line in ("#UNIGRAMS", "#BIGRAMS"):
                    section = line
                else:
                    parts = line.split("\t")
                    try:
                        if section == "#UNIGRAMS" and len(parts) == 2:
                            table.unigram_counts[parts[0]] = int(parts[1])
                        elif section == "#BIGRAMS" and len(parts) == 3:
                            table.bigram_counts[(parts[0], parts[1])] = int(parts[2])
                        else:
                            raise ValueError
                    except ValueError:
                        raise ValueError(f"{path}:{line_no}: malformed PMI table line") from None
        return table


def _check(word: str) -> str:
    if "\t" in word or "\n" in word:
        raise ValueError(f"word {word!r} cannot be stored in a tab-separated table")
    return word


def build_pmi_table(compounds: Iterable[Sequence[str]], alpha: float = 1.0) -> PmiTable:
    table = PmiTable(smoothing_alpha=alpha)
    for words in compounds:
        table.add(list(words))
    return table


def pmi(table: PmiTable, a: str, b: str) -> float:
    """Add-alpha smoothed PMI of the ordered adjacent pair ``(a, b)``.

    P(a,b) = (C(a,b)+alpha) / (T + alpha*V^2) and
    P(w) = (C(w)+alpha) / (T + alpha*V), T the bigram total, V the
    unigram vocabulary size (at least 1).  Natural log.
    """
    alpha = table.smoothing_alpha
    total = table.total_bigrams
    vocab = max(table.vocab_size, 1)
    joint = (table.bigram_counts.get((a, b), 0) + alpha) / (total + alpha * vocab * vocab)
    marg = total + alpha * vocab
    pa = (table.unigram_counts.get(a, 0) + alpha) / marg
    pb = (table.unigram_counts.get(b, 0) + alpha) / marg
    return math.log(joint) - math.log(pa) - math.log(pb)
