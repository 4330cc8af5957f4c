"""QA codec: per-pair multiple-choice prompts and answer-letter parsing.

The prompt templates are loaded verbatim from the packaged text resources;
the questioned pair is labeled inside the window text by wrapping the head
mention in ``<A> ... </A>`` and the tail mention in ``<B> ... </B>``, so the
literal A/B symbols in the question and options refer to marked mentions.

Drug-Problem answers map A/B/C/D/E to AdminFor/NotAdminBecause/Worsens/
Causes/Improves and F to no relation; Problem-Problem answers map A and B to
the two directions of the problem-indicates-problem link and C to no
relation. Option C of the Drug-Problem set reads as a treatment that fails
or worsens the problem, hence the Worsens assignment; pass ``mapping`` to
override it.
"""
from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass
from typing import Mapping

from ..model import Event, EventType, Relation, RelationType
from ..windows import ContextWindow
from . import prompt_text

logger = logging.getLogger(__name__)


class PairKind(str, enum.Enum):
    DRUG_PROBLEM = "drug_problem"
    PROBLEM_PROBLEM = "problem_problem"


DRUG_PROBLEM_ANSWERS: dict[str, RelationType | None] = {
    "A": RelationType.ADMIN_FOR,
    "B": RelationType.NOT_ADMIN_BECAUSE,
    "C": RelationType.WORSENS,
    "D": RelationType.CAUSES,
    "E": RelationType.IMPROVES,
    "F": None,
}

PROBLEM_PROBLEM_LETTERS = ("A", "B", "C")


class PairTypeError(ValueError):
    """Head/tail event types do not form a supported pair (INVALID_PAIR_TYPES)."""


class AnswerParseError(ValueError):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


@dataclass(frozen=True)
class QAPrompt:
    head: Event
    tail: Event
    pair_kind: PairKind
    window_text: str
    text: str


def pair_kind_for(head: Event, tail: Event) -> PairKind:
    if head.event_type is EventType.DRUG and tail.event_type is EventType.PROBLEM:
        return PairKind.DRUG_PROBLEM
    if head.event_type is EventType.PROBLEM and tail.event_type is EventType.PROBLEM:
        return PairKind.PROBLEM_PROBLEM
    raise PairTypeError(
        f"INVALID_PAIR_TYPES: ({head.event_type}, {tail.event_type})"
    )


def build_qa_prompt(head: Event, tail: Event, window: ContextWindow) -> QAPrompt:
    """Render the multiple-choice prompt for one candidate pair."""
    kind = pair_kind_for(head, tail)
    template = prompt_text(
        "relation_qa_drug_problem"
        if kind is PairKind.DRUG_PROBLEM
        else "relation_qa_problem_problem"
    )
    marked = _mark_pair(window, head, tail)
    return QAPrompt(
        head=head,
        tail=tail,
        pair_kind=kind,
        window_text=marked,
        text=template.replace("{note}", marked).rstrip("\n"),
    )


def _mark_pair(window: ContextWindow, head: Event, tail: Event) -> str:
    base = window.start
    inserts = sorted(
        [
            (head.trigger.start - base, head.trigger.end - base, "A"),
            (tail.trigger.start - base, tail.trigger.end - base, "B"),
        ],
        key=lambda item: (item[0], item[1]),
    )
    text = window.text
    out = []
    cursor = 0
    for start, end, symbol in inserts:
        start, end = max(start, cursor), max(end, cursor)
        out.append(text[cursor:start])
        out.append(f"<{symbol}> {text[start:end]} </{symbol}>")
        cursor = end
    out.append(text[cursor:])
    return "".join(out)


_logged_default_mapping = False


def parse_qa_answer(
    answer: str,
    pair_kind: PairKind,
    head: Event,
    tail: Event,
    mapping: Mapping[str, RelationType | None] | None = None,
) -> Relation | None:
    """Map an answer letter back to a relation (or None for no relation).

    The letter is taken from the first parenthesized option letter, or from
    a bare leading letter; anything else raises
    :class:`AnswerParseError` (UNPARSEABLE_ANSWER).
    """
    global _logged_default_mapping
    if mapping is None:
        mapping = DRUG_PROBLEM_ANSWERS
        if not _logged_default_mapping and pair_kind is PairKind.DRUG_PROBLEM:
            logger.info(
                "Drug-Problem answer mapping in effect: A=AdminFor "
                "B=NotAdminBecause C=Worsens D=Causes E=Improves F=none"
            )
            _logged_default_mapping = True

    valid = (
        "".join(mapping.keys())
        if pair_kind is PairKind.DRUG_PROBLEM
        else "".join(PROBLEM_PROBLEM_LETTERS)
    )
    letter = _extract_letter(answer, valid)
    if letter is None:
        raise AnswerParseError(
            "UNPARSEABLE_ANSWER", f"no option letter in {answer!r}"
        )

    if pair_kind is PairKind.DRUG_PROBLEM:
        rel_type = mapping[letter]
        return None if rel_type is None else Relation(rel_type, head.id, tail.id)
    if letter == "A":
        return Relation(RelationType.PIP, head.id, tail.id)
    if letter == "B":
        return Relation(RelationType.PIP, tail.id, head.id)
    return None


def _extract_letter(answer: str, valid: str) -> str | None:
    paren = re.search(rf"\(\s*([{valid}{valid.lower()}])\s*\)", answer)
    if paren:
        return paren.group(1).upper()
    lead = re.match(rf"\s*([{valid}{valid.lower()}])(?![A-Za-z])", answer)
    if lead:
        return lead.group(1).upper()
    return None


def answer_letter(
    relation: Relation | None,
    pair_kind: PairKind,
    head: Event,
    tail: Event,
    mapping: Mapping[str, RelationType | None] | None = None,
) -> str:
    """Gold answer letter for a pair: inverse of :func:`parse_qa_answer`."""
    if pair_kind is PairKind.DRUG_PROBLEM:
        mapping = mapping or DRUG_PROBLEM_ANSWERS
        for letter, rel_type in mapping.items():
            if relation is None and rel_type is None:
                return letter
            if relation is not None and rel_type is relation.rel_type:
                return letter
        raise AnswerParseError(
            "UNPARSEABLE_ANSWER", f"no letter for {relation!r}"
        )
    if relation is None:
        return "C"
    if relation.head == head.id and relation.tail == tail.id:
        return "A"
    if relation.head == tail.id and relation.tail == head.id:
        return "B"
    raise AnswerParseError(
        "UNPARSEABLE_ANSWER", f"relation {relation!r} does not link the pair"
    )
