"""Schema validation: every constraint violation is data, not an exception.

Violations carry a machine-readable code, the offending element id, and a
severity. Only ``error`` severity marks a document schema-invalid; warnings
(cross-sentence arguments, duplicate triggers, over-limit optional arguments)
survive so real corpora keep flowing through the pipeline.
"""
from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass

from .model import (
    ArgumentType,
    Document,
    EventType,
    SINGLE_VALUED_ARGUMENTS,
    SUBTYPE_VOCAB,
    Span,
)


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"

    def __str__(self) -> str:
        return self.value


class OutOfBoundsError(ValueError):
    """Span lies outside the document text (code OUT_OF_BOUNDS)."""


@dataclass(frozen=True, slots=True)
class Violation:
    code: str
    element: str
    message: str
    severity: Severity = Severity.ERROR
    doc_id: str | None = None

    def __str__(self) -> str:
        return f"[{self.severity}] {self.code} {self.element}: {self.message}"


def sentence_index(
    doc: Document, span: Span, warnings: list[Violation] | None = None
) -> int:
    """Ordinal of the sentence containing ``span.start``.

    A span that crosses a sentence boundary resolves to its start sentence
    and records a warning in ``warnings`` when a sink is provided. Raises
    :class:`OutOfBoundsError` if the span exceeds the note text.
    """
    if span.end > len(doc.text) or not doc.sentences:
        raise OutOfBoundsError(
            f"span [{span.start}, {span.end}) outside text of length {len(doc.text)}"
        )
    ends = [s.end for s in doc.sentences]
    idx = bisect_right(ends, span.start)
    if idx >= len(doc.sentences):
        idx = len(doc.sentences) - 1
    sentence = doc.sentences[idx]
    contained = sentence.start <= span.start and span.end <= sentence.end
    if not contained and warnings is not None:
        warnings.append(
            Violation(
                code="CROSS_SENTENCE_SPAN",
                element=f"[{span.start},{span.end})",
                message=f"span {span.text!r} not contained in sentence {idx}",
                severity=Severity.WARNING,
                doc_id=doc.doc_id,
            )
        )
    return idx


def validate_document(doc: Document) -> list[Violation]:
    """Collect every schema violation in ``doc``.

    Deterministic and order-independent: permuting event, argument, or
    relation order yields the same multiset of violations. An empty result
    means the document is schema-valid (no errors, no warnings).
    """
    out: list[Violation] = []
    text_len = len(doc.text)

    def bad_span(span: Span, element: str) -> bool:
        if span.end > text_len:
            out.append(
                Violation(
                    "SPAN_OUT_OF_BOUNDS",
                    element,
                    f"[{span.start},{span.end}) exceeds text length {text_len}",
                    doc_id=doc.doc_id,
                )
            )
            return True
        actual = doc.text[span.start : span.end]
        if actual != span.text:
            out.append(
                Violation(
                    "SPAN_TEXT_MISMATCH",
                    element,
                    f"span text {span.text!r} != note substring {actual!r}",
                    doc_id=doc.doc_id,
                )
            )
            return True
        return False

    seen_ids: set[str] = set()
    seen_triggers: set[tuple[EventType, int, int]] = set()
    for event in doc.events:
        if event.id in seen_ids:
            out.append(
                Violation(
                    "DUPLICATE_ID", event.id, "event id used more than once",
                    doc_id=doc.doc_id,
                )
            )
        seen_ids.add(event.id)

        trigger_ok = not bad_span(event.trigger, event.id)
        trig_key = (event.event_type, event.trigger.start, event.trigger.end)
        if trig_key in seen_triggers:
            out.append(
                Violation(
                    "DUPLICATE_TRIGGER",
                    event.id,
                    f"another {event.event_type} event has trigger "
                    f"[{event.trigger.start},{event.trigger.end})",
                    severity=Severity.WARNING,
                    doc_id=doc.doc_id,
                )
            )
        seen_triggers.add(trig_key)

        trig_sentence: int | None = None
        if trigger_ok and doc.sentences:
            trig_warnings: list[Violation] = []
            trig_sentence = sentence_index(doc, event.trigger, trig_warnings)
            for w in trig_warnings:
                out.append(
                    Violation(
                        "CROSS_SENTENCE_TRIGGER",
                        event.id,
                        w.message,
                        severity=Severity.WARNING,
                        doc_id=doc.doc_id,
                    )
                )

        if event.event_type is EventType.DRUG:
            if event.arguments:
                out.append(
                    Violation(
                        "DRUG_HAS_ARGUMENT",
                        event.id,
                        f"Drug event carries {len(event.arguments)} argument(s); "
                        "Drug events have a trigger only",
                        doc_id=doc.doc_id,
                    )
                )
            continue

        out.extend(_check_problem_arguments(doc, event, trig_sentence, bad_span))

    event_ids = {e.id for e in doc.events}
    for rel in doc.relations:
        element = f"{rel.rel_type}({rel.head},{rel.tail})"
        head, tail = doc.resolve(rel)
        missing = [eid for eid in (rel.head, rel.tail) if eid not in event_ids]
        if missing:
            out.append(
                Violation(
                    "MISSING_ENDPOINT",
                    element,
                    f"relation references unknown event id(s) {missing}",
                    doc_id=doc.doc_id,
                )
            )
            continue
        if rel.head == rel.tail:
            out.append(
                Violation(
                    "SELF_RELATION", element, "head and tail are the same event",
                    doc_id=doc.doc_id,
                )
            )
            continue
        assert head is not None and tail is not None
        if head.event_type is not rel.rel_type.head_type:
            out.append(
                Violation(
                    "RELATION_HEAD_TYPE",
                    element,
                    f"{rel.rel_type} head must be {rel.rel_type.head_type}, "
                    f"got {head.event_type}",
                    doc_id=doc.doc_id,
                )
            )
        if tail.event_type is not rel.rel_type.tail_type:
            out.append(
                Violation(
                    "RELATION_TAIL_TYPE",
                    element,
                    f"{rel.rel_type} tail must be {rel.rel_type.tail_type}, "
                    f"got {tail.event_type}",
                    doc_id=doc.doc_id,
                )
            )

    out.sort(key=lambda v: (v.element, v.code, v.message))
    return out


def _check_problem_arguments(doc, event, trig_sentence, bad_span) -> list[Violation]:
    out: list[Violation] = []
    counts: dict[ArgumentType, int] = {}
    for arg in event.arguments:
        counts[arg.arg_type] = counts.get(arg.arg_type, 0) + 1
        # element ids avoid list positions so violations are order-independent
        if arg.span is not None:
            element = f"{event.id}/{arg.arg_type}[{arg.span.start},{arg.span.end})"
        else:
            element = f"{event.id}/{arg.arg_type}={arg.label}"
        if arg.label is not None and arg.label not in SUBTYPE_VOCAB.get(
            arg.arg_type, frozenset()
        ):
            out.append(
                Violation(
                    "UNKNOWN_SUBTYPE",
                    element,
                    f"label {arg.label!r} outside the {arg.arg_type} vocabulary",
                    doc_id=doc.doc_id,
                )
            )
        if arg.span is not None and not bad_span(arg.span, element):
            if trig_sentence is not None and doc.sentences:
                sink: list[Violation] = []
                arg_sentence = sentence_index(doc, arg.span, sink)
                if arg_sentence != trig_sentence or sink:
                    out.append(
                        Violation(
                            "CROSS_SENTENCE_ARGUMENT",
                            element,
                            f"argument span in sentence {arg_sentence}, trigger "
                            f"in sentence {trig_sentence}",
                            severity=Severity.WARNING,
                            doc_id=doc.doc_id,
                        )
                    )

    n_assert = counts.get(ArgumentType.ASSERTION, 0)
    if n_assert != 1:
        out.append(
            Violation(
                "CARDINALITY",
                f"{event.id}/Assertion",
                f"Problem events require exactly one Assertion (max=1, "
                f"found={n_assert})",
                doc_id=doc.doc_id,
            )
        )
    for arg_type in sorted(SINGLE_VALUED_ARGUMENTS, key=lambda t: t.value):
        found = counts.get(arg_type, 0)
        if found > 1:
            out.append(
                Violation(
                    "CARDINALITY",
                    f"{event.id}/{arg_type}",
                    f"at most one {arg_type} argument expected (max=1, "
                    f"found={found})",
                    severity=Severity.WARNING,
                    doc_id=doc.doc_id,
                )
            )
    return out


def has_errors(violations: list[Violation]) -> bool:
    return any(v.severity is Severity.ERROR for v in violations)
