"""Marker codec: trigger-tagged window text and relation-per-line output.

Input encoding wraps every trigger in the window with its event-type marker,
leaving all other text untouched:

    <Drug> lupron </Drug> is given for <Problem> pain </Problem> .

Output lines carry one relation type each; instances are rendered as
``head ... tail`` trigger texts and separated by ``[SEP]``; a window with no
relations is the literal string ``None``. The line grammar is this module's
own convention and stays isolated behind these functions.
"""
from __future__ import annotations

import re

from ..model import Event, EventType, Relation, RelationType
from ..windows import ContextWindow
from . import DecodeIssue

SEPARATOR = "[SEP]"
PAIR_JOINER = " ... "

_OPEN = {t: f"<{t.value}>" for t in EventType}
_CLOSE = {t: f"</{t.value}>" for t in EventType}
_OPEN_RE = re.compile(r"<(?:Problem|Drug)> ")
_CLOSE_RE = re.compile(r" </(?:Problem|Drug)>")


def encode_marker_input(window: ContextWindow) -> tuple[str, list[DecodeIssue]]:
    """Window text with triggers wrapped in type markers, in offset order.

    Overlapping triggers cannot both be wrapped without corrupting the text
    between markers; the outermost one is kept and the conflict reported.
    """
    issues: list[DecodeIssue] = []
    kept: list[Event] = []
    for event in sorted(
        window.events, key=lambda e: (e.trigger.start, -e.trigger.end, e.id)
    ):
        if kept and kept[-1].trigger.overlaps(event.trigger):
            issues.append(
                DecodeIssue(
                    "OVERLAPPING_TRIGGERS",
                    f"{event.trigger.text!r} overlaps {kept[-1].trigger.text!r}; "
                    "outermost kept",
                )
            )
            continue
        kept.append(event)

    base = window.start
    text = window.text
    out: list[str] = []
    cursor = 0
    for event in kept:
        start, end = event.trigger.start - base, event.trigger.end - base
        out.append(text[cursor:start])
        out.append(f"{_OPEN[event.event_type]} {text[start:end]} {_CLOSE[event.event_type]}")
        cursor = end
    out.append(text[cursor:])
    return "".join(out), issues


def strip_markers(text: str) -> str:
    """Exact inverse of :func:`encode_marker_input` on its own output."""
    return _CLOSE_RE.sub("", _OPEN_RE.sub("", text))


def encode_marker_targets(
    window: ContextWindow, relations: list[Relation] | tuple[Relation, ...]
) -> str:
    """Render gold relations as the line-per-type target string."""
    lines = []
    for rel_type in RelationType:
        instances = []
        for rel in relations:
            if rel.rel_type is not rel_type:
                continue
            head = window.doc.event_by_id(rel.head)
            tail = window.doc.event_by_id(rel.tail)
            if head is None or tail is None:
                continue
            instances.append(f"{head.trigger.text}{PAIR_JOINER}{tail.trigger.text}")
        if instances:
            lines.append(f"{rel_type}: " + f" {SEPARATOR} ".join(instances))
    return "\n".join(lines) if lines else "None"


def decode_marker_output(
    output: str, window: ContextWindow
) -> tuple[list[Relation], list[DecodeIssue]]:
    """Parse relation lines back into typed relations over the window events.

    Head and tail mentions resolve to window events by exact trigger-text
    match with the required event type; among multiple matches the closest
    pair wins. Anything unresolvable is dropped and reported.
    """
    issues: list[DecodeIssue] = []
    relations: list[Relation] = []
    text = output.strip()
    if not text or text == "None":
        return relations, issues

    for line in text.splitlines():
        line = line.strip()
        if not line or line == "None":
            continue
        name, sep, rest = line.partition(":")
        if not sep:
            issues.append(DecodeIssue("MALFORMED_INSTANCE", f"no relation name in {line!r}"))
            continue
        try:
            rel_type = RelationType(name.strip())
        except ValueError:
            issues.append(DecodeIssue("UNKNOWN_RELATION", name.strip()[:40]))
            continue
        for instance in rest.split(SEPARATOR):
            pair = instance.split(PAIR_JOINER.strip())
            if len(pair) != 2:
                issues.append(
                    DecodeIssue("MALFORMED_INSTANCE", instance.strip()[:60])
                )
                continue
            head_text, tail_text = pair[0].strip(), pair[1].strip()
            resolved = _resolve_pair(window, rel_type, head_text, tail_text, issues)
            if resolved is not None:
                relations.append(resolved)
    return relations, issues


def _resolve_pair(window, rel_type, head_text, tail_text, issues) -> Relation | None:
    heads = [e for e in window.events if e.trigger.text == head_text]
    tails = [e for e in window.events if e.trigger.text == tail_text]
    if not heads or not tails:
        missing = head_text if not heads else tail_text
        issues.append(DecodeIssue("UNRESOLVED_MENTION", missing[:60]))
        return None
    heads = [e for e in heads if e.event_type is rel_type.head_type]
    tails = [e for e in tails if e.event_type is rel_type.tail_type]
    if not heads or not tails:
        issues.append(
            DecodeIssue(
                "PAIR_TYPE_MISMATCH",
                f"{rel_type}: {head_text!r} ... {tail_text!r}",
            )
        )
        return None
    best: tuple[int, int, int] | None = None
    chosen: tuple[Event, Event] | None = None
    for head in heads:
        for tail in tails:
            if head.id == tail.id:
                continue
            key = (
                abs(head.trigger.start - tail.trigger.start),
                head.trigger.start,
                tail.trigger.start,
            )
            if best is None or key < best:
                best = key
                chosen = (head, tail)
    if chosen is None:
        issues.append(
            DecodeIssue(
                "UNRESOLVED_MENTION",
                f"{head_text!r} and {tail_text!r} resolve to the same event",
            )
        )
        return None
    return Relation(rel_type, chosen[0].id, chosen[1].id)
