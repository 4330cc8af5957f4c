"""Relation context windows: construction, candidate enumeration, coverage.

A context window is the smallest contiguous sentence range containing both
endpoint triggers of a relation pair, capped at 5 sentences and 400 tokens
under the active tokenizer. The inference validity filter keeps exactly one
window per pair across all sliding windows, so no relation is predicted
twice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .model import Document, Event, EventType, Relation, document_order
from .validation import sentence_index

Tokenizer = Callable[[str], int]

MAX_WINDOW_SENTENCES = 5
MAX_WINDOW_TOKENS = 400


def subword_token_count(text: str) -> int:
    """Crude subword stand-in: whitespace tokens, ceil(len/6) units each.

    Deterministic and dependency-free; inject a real tokenizer to reproduce a
    specific model's counts. Monotone under concatenation.
    """
    return sum(math.ceil(len(token) / 6) for token in text.split())


class WindowLimitError(ValueError):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


@dataclass(frozen=True)
class ContextWindow:
    doc: Document
    first: int
    last: int
    events: tuple[Event, ...]
    token_count: int

    @property
    def intra_sentence(self) -> bool:
        return self.first == self.last

    @property
    def n_sentences(self) -> int:
        return self.last - self.first + 1

    @property
    def text(self) -> str:
        sentences = self.doc.sentences
        return self.doc.text[sentences[self.first].start : sentences[self.last].end]

    @property
    def start(self) -> int:
        return self.doc.sentences[self.first].start


def event_sentence_map(doc: Document) -> dict[str, int]:
    """Sentence ordinal of every event trigger (by trigger start)."""
    return {e.id: sentence_index(doc, e.trigger) for e in doc.events}


def window_for_range(
    doc: Document,
    first: int,
    last: int,
    tokenizer: Tokenizer = subword_token_count,
    sentence_map: dict[str, int] | None = None,
) -> ContextWindow:
    """Window over an explicit sentence range; no limits enforced."""
    if first < 0 or last >= len(doc.sentences) or first > last:
        raise WindowLimitError("BAD_RANGE", f"[{first},{last}] out of range")
    smap = sentence_map if sentence_map is not None else event_sentence_map(doc)
    events = tuple(
        e for e in document_order(doc.events) if first <= smap[e.id] <= last
    )
    start = doc.sentences[first].start
    end = doc.sentences[last].end
    return ContextWindow(
        doc=doc,
        first=first,
        last=last,
        events=events,
        token_count=tokenizer(doc.text[start:end]),
    )


def build_window(
    doc: Document,
    head: Event,
    tail: Event,
    tokenizer: Tokenizer = subword_token_count,
    max_sentences: int = MAX_WINDOW_SENTENCES,
    max_tokens: int = MAX_WINDOW_TOKENS,
    sentence_map: dict[str, int] | None = None,
) -> ContextWindow:
    """Minimal window containing both triggers, enforcing the size limits."""
    smap = sentence_map if sentence_map is not None else event_sentence_map(doc)
    head_s, tail_s = smap[head.id], smap[tail.id]
    first, last = min(head_s, tail_s), max(head_s, tail_s)
    if last - first + 1 > max_sentences:
        raise WindowLimitError(
            "WINDOW_TOO_LONG",
            f"{last - first + 1} sentences exceed the {max_sentences}-sentence limit",
        )
    window = window_for_range(doc, first, last, tokenizer, smap)
    if window.token_count > max_tokens:
        raise WindowLimitError(
            "WINDOW_TOO_MANY_TOKENS",
            f"{window.token_count} tokens exceed the {max_tokens}-token limit",
        )
    return window


@dataclass(frozen=True)
class CandidateEnumeration:
    pairs: tuple[tuple[Event, Event, ContextWindow], ...]
    excluded: int


def enumerate_candidate_pairs(
    doc: Document,
    tokenizer: Tokenizer = subword_token_count,
    max_sentences: int = MAX_WINDOW_SENTENCES,
    max_tokens: int = MAX_WINDOW_TOKENS,
) -> CandidateEnumeration:
    """All typed head/tail pairs whose minimal window passes both limits.

    Ordered (Drug, Problem) pairs plus ordered (Problem, Problem) pairs with
    head != tail; each pair appears exactly once, independent of event list
    order. Oversize pairs are excluded and counted.
    """
    smap = event_sentence_map(doc)
    drugs = [e for e in document_order(doc.events) if e.event_type is EventType.DRUG]
    problems = [
        e for e in document_order(doc.events) if e.event_type is EventType.PROBLEM
    ]
    pairs: list[tuple[Event, Event, ContextWindow]] = []
    excluded = 0
    window_cache: dict[tuple[int, int], ContextWindow] = {}

    def minimal(head: Event, tail: Event) -> ContextWindow | None:
        nonlocal excluded
        key = (
            min(smap[head.id], smap[tail.id]),
            max(smap[head.id], smap[tail.id]),
        )
        if key[1] - key[0] + 1 > max_sentences:
            excluded += 1
            return None
        window = window_cache.get(key)
        if window is None:
            window = window_for_range(doc, key[0], key[1], tokenizer, smap)
            window_cache[key] = window
        if window.token_count > max_tokens:
            excluded += 1
            return None
        return window

    for head in drugs:
        for tail in problems:
            window = minimal(head, tail)
            if window is not None:
                pairs.append((head, tail, window))
    for head in problems:
        for tail in problems:
            if head.id == tail.id:
                continue
            window = minimal(head, tail)
            if window is not None:
                pairs.append((head, tail, window))
    return CandidateEnumeration(pairs=tuple(pairs), excluded=excluded)


def validity_filter(window: ContextWindow, relation: Relation) -> bool:
    """True iff this window is the one window allowed to predict the pair.

    Criteria: head trigger in the first sentence and tail in the last, or
    tail in the first and head in the last, or the window is one sentence.
    """
    head = window.doc.event_by_id(relation.head)
    tail = window.doc.event_by_id(relation.tail)
    if head is None or tail is None:
        return False
    head_s = sentence_index(window.doc, head.trigger)
    tail_s = sentence_index(window.doc, tail.trigger)
    if not (window.first <= head_s <= window.last):
        return False
    if not (window.first <= tail_s <= window.last):
        return False
    if window.first == window.last:
        return True
    if head_s == window.first and tail_s == window.last:
        return True
    return tail_s == window.first and head_s == window.last


@dataclass
class TypeCoverage:
    total: int = 0
    covered: int = 0
    intra: int = 0


@dataclass
class CoverageStats:
    """Corpus-level context-window coverage of the gold relations."""

    total: int = 0
    covered: int = 0
    intra: int = 0
    too_long: int = 0
    too_many_tokens: int = 0
    by_type: dict[str, TypeCoverage] = field(default_factory=dict)

    @property
    def coverage(self) -> float:
        return self.covered / self.total if self.total else 0.0

    @property
    def intra_fraction(self) -> float:
        return self.intra / self.total if self.total else 0.0

    def merge(self, other: CoverageStats) -> CoverageStats:
        merged = CoverageStats(
            total=self.total + other.total,
            covered=self.covered + other.covered,
            intra=self.intra + other.intra,
            too_long=self.too_long + other.too_long,
            too_many_tokens=self.too_many_tokens + other.too_many_tokens,
            by_type={k: TypeCoverage(v.total, v.covered, v.intra) for k, v in self.by_type.items()},
        )
        for key, theirs in other.by_type.items():
            mine = merged.by_type.setdefault(key, TypeCoverage())
            mine.total += theirs.total
            mine.covered += theirs.covered
            mine.intra += theirs.intra
        return merged

    def to_record(self) -> dict:
        return {
            "total": self.total,
            "covered": self.covered,
            "coverage": self.coverage,
            "intra": self.intra,
            "intra_fraction": self.intra_fraction,
            "too_long": self.too_long,
            "too_many_tokens": self.too_many_tokens,
            "by_type": {
                k: {"total": v.total, "covered": v.covered, "intra": v.intra}
                for k, v in sorted(self.by_type.items())
            },
        }


def coverage_report(
    docs: Iterable[Document],
    tokenizer: Tokenizer = subword_token_count,
    max_sentences: int = MAX_WINDOW_SENTENCES,
    max_tokens: int = MAX_WINDOW_TOKENS,
) -> CoverageStats:
    """Fraction of gold relations whose minimal window passes the limits."""
    stats = CoverageStats()
    for doc in docs:
        smap = event_sentence_map(doc)
        for rel in doc.relations:
            head, tail = doc.resolve(rel)
            if head is None or tail is None:
                continue
            stats.total += 1
            per_type = stats.by_type.setdefault(rel.rel_type.value, TypeCoverage())
            per_type.total += 1
            head_s, tail_s = smap[head.id], smap[tail.id]
            if head_s == tail_s:
                stats.intra += 1
                per_type.intra += 1
            first, last = min(head_s, tail_s), max(head_s, tail_s)
            if last - first + 1 > max_sentences:
                stats.too_long += 1
                continue
            window = window_for_range(doc, first, last, tokenizer, smap)
            if window.token_count > max_tokens:
                stats.too_many_tokens += 1
                continue
            stats.covered += 1
            per_type.covered += 1
    return stats
