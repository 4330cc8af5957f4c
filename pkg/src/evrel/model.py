"""Domain model: spans, events, relations, and documents for clinical notes.

All types are immutable; schema checks beyond local field invariants live in
:mod:`evrel.validation`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class AnnotationError(ValueError):
    """A locally invalid annotation object (bad span bounds, bad label, ...)."""


class EventType(str, enum.Enum):
    PROBLEM = "Problem"
    DRUG = "Drug"

    def __str__(self) -> str:
        return self.value


class ArgumentType(str, enum.Enum):
    ASSERTION = "Assertion"
    CHANGE = "Change"
    SEVERITY = "Severity"
    ANATOMY = "Anatomy"
    CHARACTERISTICS = "Characteristics"
    DURATION = "Duration"
    FREQUENCY = "Frequency"

    def __str__(self) -> str:
        return self.value

    @property
    def is_labeled(self) -> bool:
        """Labeled arguments normalize to a closed subtype vocabulary."""
        return self in LABELED_ARGUMENTS


LABELED_ARGUMENTS = frozenset(
    {ArgumentType.ASSERTION, ArgumentType.CHANGE, ArgumentType.SEVERITY}
)
SPAN_ONLY_ARGUMENTS = frozenset(set(ArgumentType) - LABELED_ARGUMENTS)

SUBTYPE_VOCAB: dict[ArgumentType, frozenset[str]] = {
    ArgumentType.ASSERTION: frozenset(
        {"present", "absent", "possible", "conditional", "hypothetical", "not_patient"}
    ),
    ArgumentType.CHANGE: frozenset({"worsening", "no_change", "improving", "resolved"}),
    ArgumentType.SEVERITY: frozenset({"mild", "moderate", "severe"}),
}

# At-most-one argument types per Problem event; Characteristics may repeat.
SINGLE_VALUED_ARGUMENTS = frozenset(
    {
        ArgumentType.ANATOMY,
        ArgumentType.DURATION,
        ArgumentType.FREQUENCY,
        ArgumentType.CHANGE,
        ArgumentType.SEVERITY,
    }
)

# Canonical argument order for serialized events and annotation records.
ARGUMENT_ORDER = (
    ArgumentType.ASSERTION,
    ArgumentType.ANATOMY,
    ArgumentType.DURATION,
    ArgumentType.FREQUENCY,
    ArgumentType.CHARACTERISTICS,
    ArgumentType.CHANGE,
    ArgumentType.SEVERITY,
)


class RelationType(str, enum.Enum):
    ADMIN_FOR = "AdminFor"
    NOT_ADMIN_BECAUSE = "NotAdminBecause"
    CAUSES = "Causes"
    IMPROVES = "Improves"
    WORSENS = "Worsens"
    PIP = "PIP"

    def __str__(self) -> str:
        return self.value

    @property
    def head_type(self) -> EventType:
        return EventType.PROBLEM if self is RelationType.PIP else EventType.DRUG

    @property
    def tail_type(self) -> EventType:
        return EventType.PROBLEM


DRUG_PROBLEM_RELATIONS = (
    RelationType.ADMIN_FOR,
    RelationType.NOT_ADMIN_BECAUSE,
    RelationType.CAUSES,
    RelationType.IMPROVES,
    RelationType.WORSENS,
)


@dataclass(frozen=True, slots=True)
class Span:
    """Contiguous character interval [start, end) with its surface text.

    Offsets count Unicode scalar values, 0-based, end-exclusive.
    """

    start: int
    end: int
    text: str

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise AnnotationError(f"bad span bounds [{self.start}, {self.end})")
        if len(self.text) != self.end - self.start:
            raise AnnotationError(
                f"span text length {len(self.text)} != {self.end - self.start} "
                f"for [{self.start}, {self.end})"
            )

    def overlaps(self, other: Span) -> bool:
        return self.start < other.end and other.start < self.end

    def overlap_size(self, other: Span) -> int:
        return max(0, min(self.end, other.end) - max(self.start, other.start))

    def contains(self, other: Span) -> bool:
        return self.start <= other.start and other.end <= self.end


@dataclass(frozen=True, slots=True)
class Argument:
    """One event argument: a subtype label, a text span, or (rarely) both.

    Labeled types (Assertion/Change/Severity) require a vocabulary label and
    may optionally carry the span it was normalized from; span-only types
    require a span and admit no label.
    """

    arg_type: ArgumentType
    span: Span | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        if self.arg_type.is_labeled:
            if self.label is None:
                raise AnnotationError(f"{self.arg_type} argument requires a label")
            if self.label not in SUBTYPE_VOCAB[self.arg_type]:
                raise AnnotationError(
                    f"{self.label!r} not in {self.arg_type} vocabulary"
                )
        else:
            if self.label is not None:
                raise AnnotationError(f"{self.arg_type} argument cannot carry a label")
            if self.span is None:
                raise AnnotationError(f"{self.arg_type} argument requires a span")


@dataclass(frozen=True, slots=True)
class Event:
    """A typed trigger plus its arguments.

    Construction is permissive about event-level cardinalities (Drug events
    with arguments, missing Assertion, ...): those are reported as data by
    ``validate_document``, not raised here, so imperfect model output and
    imperfect corpora survive parsing.
    """

    id: str
    event_type: EventType
    trigger: Span
    arguments: tuple[Argument, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "arguments", tuple(self.arguments))

    def arguments_of(self, arg_type: ArgumentType) -> tuple[Argument, ...]:
        return tuple(a for a in self.arguments if a.arg_type == arg_type)


@dataclass(frozen=True, slots=True)
class Relation:
    """Directed typed link between two event triggers, referenced by event id."""

    rel_type: RelationType
    head: str
    tail: str


@dataclass(frozen=True)
class Document:
    """One note with its sentence segmentation, events, and relations.

    ``source`` is a provenance tag: ``gold``, ``predicted``, or an
    annotator id.
    """

    doc_id: str
    text: str
    sentences: tuple[Span, ...] = ()
    events: tuple[Event, ...] = ()
    relations: tuple[Relation, ...] = ()
    source: str = "gold"

    def __post_init__(self) -> None:
        object.__setattr__(self, "sentences", tuple(self.sentences))
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "relations", tuple(self.relations))

    def event_by_id(self, event_id: str) -> Event | None:
        return self._event_index.get(event_id)

    @property
    def _event_index(self) -> dict[str, Event]:
        # Cached lazily; safe because the document is immutable.
        index = self.__dict__.get("_event_index_cache")
        if index is None:
            index = {e.id: e for e in self.events}
            self.__dict__["_event_index_cache"] = index
        return index

    def resolve(self, relation: Relation) -> tuple[Event | None, Event | None]:
        return self.event_by_id(relation.head), self.event_by_id(relation.tail)


def document_order(events: tuple[Event, ...] | list[Event]) -> list[Event]:
    """Events sorted by trigger position (start, end), then id for stability."""
    return sorted(events, key=lambda e: (e.trigger.start, e.trigger.end, e.id))


def argument_sort_key(arg: Argument) -> tuple:
    span = arg.span
    return (span.start, span.end) if span is not None else (-1, -1)


def event_signature(event: Event) -> tuple:
    """Identity of an event up to its opaque id (used for id-renaming equality)."""
    args = tuple(
        sorted(
            (
                a.arg_type.value,
                a.label,
                (a.span.start, a.span.end, a.span.text) if a.span else None,
            )
            for a in event.arguments
        )
    )
    return (event.event_type.value, event.trigger.start, event.trigger.end, args)


def documents_equivalent(a: Document, b: Document) -> bool:
    """Structural equality modulo event id renaming.

    Compares text, sentence spans, the multiset of event signatures, and the
    multiset of relations with endpoints replaced by event signatures.
    """
    if a.text != b.text or a.sentences != b.sentences:
        return False
    if sorted(event_signature(e) for e in a.events) != sorted(
        event_signature(e) for e in b.events
    ):
        return False

    def rel_keys(doc: Document) -> list[tuple]:
        keys = []
        for rel in doc.relations:
            head, tail = doc.resolve(rel)
            keys.append(
                (
                    rel.rel_type.value,
                    event_signature(head) if head else rel.head,
                    event_signature(tail) if tail else rel.tail,
                )
            )
        return sorted(keys)

    return rel_keys(a) == rel_keys(b)
