"""Event codec: structured events <-> the tagged single-sentence text format.

Encoding renders events in trigger order, one type tag per field, multiple
spans of one argument type joined by ``<s>``, events joined by ``[SEP]``, and
the literal string ``None`` for an event-free sentence:

    <Problem> pain <Assertion> present <Anatomy> back <s> neck [SEP] <Drug> lupron

Decoding accepts arbitrary untrusted strings and never raises: every decoded
span is located in the sentence by exact string search with a moving anchor
(so repeated identical mentions resolve in order), anything that cannot be
located or understood is dropped and reported as a :class:`DecodeIssue`.
"""
from __future__ import annotations

import re
from dataclasses import replace

from ..model import (
    ARGUMENT_ORDER,
    Argument,
    ArgumentType,
    Event,
    EventType,
    SUBTYPE_VOCAB,
    Span,
    document_order,
)
from . import DecodeIssue

SEPARATOR = "[SEP]"
SPAN_JOINER = "<s>"

_EVENT_TAGS = {t.value: t for t in EventType}
_ARGUMENT_TAGS = {t.value: t for t in ArgumentType}
_TAG_RE = re.compile(r"<\s*(/?[A-Za-z_]+)\s*>")


class EncodeError(ValueError):
    """Raised when events cannot be rendered (code EVENT_OUTSIDE_SENTENCE)."""


def encode_events(sentence: Span, events: list[Event] | tuple[Event, ...]) -> str:
    """Render the events of one sentence in the tagged format."""
    for event in events:
        if not sentence.contains(event.trigger):
            raise EncodeError(
                f"EVENT_OUTSIDE_SENTENCE: trigger [{event.trigger.start},"
                f"{event.trigger.end}) outside sentence "
                f"[{sentence.start},{sentence.end})"
            )
    chunks = [_render_event(e) for e in document_order(list(events))]
    return f" {SEPARATOR} ".join(chunks) if chunks else "None"


def _render_event(event: Event) -> str:
    parts = [f"<{event.event_type}>", event.trigger.text]
    for arg_type in ARGUMENT_ORDER:
        args = event.arguments_of(arg_type)
        if not args:
            continue
        if arg_type.is_labeled:
            values = [a.label or "" for a in args]
        else:
            values = [
                a.span.text
                for a in sorted(args, key=lambda a: (a.span.start, a.span.end))
                if a.span is not None
            ]
        parts.append(f"<{arg_type}>")
        parts.append(f" {SPAN_JOINER} ".join(values))
    return " ".join(parts)


def decode_events(
    sentence: Span, output: str
) -> tuple[list[Event], list[DecodeIssue]]:
    """Parse model output for one sentence back into events.

    Salvages the longest valid prefix of malformed output; the issue list
    bounds the information lost.
    """
    issues: list[DecodeIssue] = []
    text = output.strip()
    if not text or text == "None":
        return [], issues

    events: list[Event] = []
    trigger_anchor = 0
    for chunk in text.split(SEPARATOR):
        decoded, trigger_anchor = _decode_chunk(
            sentence, chunk, trigger_anchor, issues
        )
        events.extend(decoded)
    events = [replace(e, id=f"E{i}") for i, e in enumerate(events, start=1)]
    return events, issues


def _decode_chunk(sentence, chunk, trigger_anchor, issues):
    segments = _segments(chunk, issues)
    events: list[Event] = []
    current: dict | None = None
    current_arg: ArgumentType | None = None

    def finish() -> None:
        nonlocal current
        if current is None:
            return
        event = _build_event(sentence, current, issues)
        if event is not None:
            events.append(event)
        current = None

    for tag, value in segments:
        if tag in _EVENT_TAGS:
            if current is not None:
                issues.append(
                    DecodeIssue("MISSING_SEPARATOR", f"new <{tag}> without {SEPARATOR}")
                )
                finish()
            current = {"type": _EVENT_TAGS[tag], "trigger": value, "args": []}
            current_arg = None
        elif tag in _ARGUMENT_TAGS:
            if current is None:
                issues.append(
                    DecodeIssue("EVENT_WITHOUT_TRIGGER", f"<{tag}> before any event tag")
                )
                continue
            current_arg = _ARGUMENT_TAGS[tag]
            current["args"].append((current_arg, value))
        elif tag == "s":
            if current is None or current_arg is None:
                issues.append(DecodeIssue("ORPHAN_JOINER", f"{SPAN_JOINER} {value!r}"))
                continue
            current["args"].append((current_arg, value))
        else:
            issues.append(DecodeIssue("UNKNOWN_TAG", f"<{tag}> skipped"))
            current_arg = None
    finish()

    resolved: list[Event] = []
    for event in events:
        placed = _place_trigger(sentence, event, trigger_anchor, issues)
        if placed is None:
            continue
        final, trigger_anchor = placed
        resolved.append(final)
    return resolved, trigger_anchor


def _segments(chunk: str, issues: list[DecodeIssue]):
    """Split a chunk into (tag, following-text) pairs."""
    out = []
    matches = list(_TAG_RE.finditer(chunk))
    if matches and chunk[: matches[0].start()].strip():
        issues.append(
            DecodeIssue("STRAY_TEXT", chunk[: matches[0].start()].strip()[:60])
        )
    if not matches and chunk.strip():
        issues.append(DecodeIssue("STRAY_TEXT", chunk.strip()[:60]))
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(chunk)
        out.append((m.group(1).lstrip("/"), chunk[m.end() : end].strip()))
    return out


def _build_event(sentence, raw, issues):
    """Assemble an unresolved event dict; spans stay as raw strings."""
    if not raw["trigger"].strip():
        issues.append(DecodeIssue("EMPTY_SPAN", f"<{raw['type']}> with empty trigger"))
        return None
    return raw


def _place_trigger(sentence, raw, trigger_anchor, issues):
    trigger_text = raw["trigger"].strip()
    pos = sentence.text.find(trigger_text, trigger_anchor)
    if pos < 0:
        pos = sentence.text.find(trigger_text)
        if pos < 0:
            issues.append(
                DecodeIssue("SPAN_NOT_FOUND", f"trigger {trigger_text!r}")
            )
            return None
        issues.append(
            DecodeIssue("OUT_OF_ORDER_SPAN", f"trigger {trigger_text!r}")
        )
        anchor = trigger_anchor
    else:
        anchor = pos + 1
    trigger = Span(
        sentence.start + pos, sentence.start + pos + len(trigger_text), trigger_text
    )

    arguments: list[Argument] = []
    type_anchor: dict[ArgumentType, int] = {}
    for arg_type, value in raw["args"]:
        value = value.strip()
        if not value:
            issues.append(DecodeIssue("EMPTY_SPAN", f"<{arg_type}> with empty value"))
            continue
        if arg_type.is_labeled:
            label = value.lower()
            if label not in SUBTYPE_VOCAB[arg_type]:
                issues.append(
                    DecodeIssue("UNKNOWN_LABEL", f"<{arg_type}> {value!r}")
                )
                continue
            arguments.append(Argument(arg_type, label=label))
        else:
            start = sentence.text.find(value, type_anchor.get(arg_type, 0))
            if start < 0:
                issues.append(
                    DecodeIssue("SPAN_NOT_FOUND", f"<{arg_type}> {value!r}")
                )
                continue
            type_anchor[arg_type] = start + 1
            arguments.append(
                Argument(
                    arg_type,
                    span=Span(
                        sentence.start + start,
                        sentence.start + start + len(value),
                        value,
                    ),
                )
            )
    return (
        Event("E0", raw["type"], trigger, tuple(arguments)),
        anchor,
    )


def event_content_key(event: Event) -> tuple:
    """Identity of an event at the level the text format can carry.

    The format has no character offsets, so round-trip equality compares
    event type, trigger text, and arguments as (type, label-or-text) pairs
    in canonical order.
    """
    args = []
    for arg_type in ARGUMENT_ORDER:
        for arg in event.arguments_of(arg_type):
            if arg_type.is_labeled:
                args.append((arg_type.value, arg.label))
            elif arg.span is not None:
                args.append((arg_type.value, arg.span.text))
    return (event.event_type.value, event.trigger.text, tuple(args))
