from __future__ import annotations

from pathlib import Path

import pytest

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS[name] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, outcome in sorted(_ACCEPTANCE_RESULTS.items()):
        terminalreporter.write_line(f"  {name}: {outcome}")

from evrel.model import (
    Argument,
    ArgumentType,
    Document,
    Event,
    EventType,
    Relation,
    RelationType,
    Span,
)
from evrel.segmentation import segment_sentences

FIXTURES = Path(__file__).parent / "fixtures"


def span_of(text: str, phrase: str, occurrence: int = 0) -> Span:
    """Span of the nth occurrence of a phrase; fails loudly if absent."""
    pos = -1
    for _ in range(occurrence + 1):
        pos = text.find(phrase, pos + 1)
        assert pos >= 0, f"{phrase!r} (occurrence {occurrence}) not in text"
    return Span(pos, pos + len(phrase), phrase)


def problem(text: str, eid: str, phrase: str, assertion: str = "present",
            occurrence: int = 0, extra: tuple[Argument, ...] = ()) -> Event:
    return Event(
        eid,
        EventType.PROBLEM,
        span_of(text, phrase, occurrence),
        (Argument(ArgumentType.ASSERTION, label=assertion),) + extra,
    )


def drug(text: str, eid: str, phrase: str, occurrence: int = 0) -> Event:
    return Event(eid, EventType.DRUG, span_of(text, phrase, occurrence))


def make_doc(text: str, events=(), relations=(), doc_id: str = "doc",
             source: str = "gold") -> Document:
    return Document(
        doc_id=doc_id,
        text=text,
        sentences=tuple(segment_sentences(text)),
        events=tuple(events),
        relations=tuple(relations),
        source=source,
    )


@pytest.fixture
def simple_doc() -> Document:
    text = "Lupron is given for pain.\nHe denies rash in the groin."
    events = (
        drug(text, "E1", "Lupron"),
        problem(text, "E2", "pain"),
        problem(text, "E3", "rash", assertion="absent",
                extra=(Argument(ArgumentType.ANATOMY, span=span_of(text, "groin")),)),
    )
    relations = (Relation(RelationType.ADMIN_FOR, "E1", "E2"),)
    return make_doc(text, events, relations)
