"""Serialization codecs for generative-model inputs and outputs."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True, slots=True)
class DecodeIssue:
    """One recoverable problem found while decoding untrusted model output."""

    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


def prompt_text(name: str) -> str:
    """Load a prompt template resource by stem name, emitted as-is."""
    path = resources.files("evrel") / "resources" / "prompts" / f"{name}.txt"
    return path.read_text(encoding="utf-8")


from .events import decode_events, encode_events, event_content_key  # noqa: E402
from .marker import (  # noqa: E402
    decode_marker_output,
    encode_marker_input,
    encode_marker_targets,
    strip_markers,
)
from .qa import (  # noqa: E402
    AnswerParseError,
    PairKind,
    PairTypeError,
    QAPrompt,
    answer_letter,
    build_qa_prompt,
    pair_kind_for,
    parse_qa_answer,
)

__all__ = [
    "AnswerParseError",
    "DecodeIssue",
    "PairKind",
    "PairTypeError",
    "QAPrompt",
    "answer_letter",
    "build_qa_prompt",
    "decode_events",
    "decode_marker_output",
    "encode_events",
    "encode_marker_input",
    "encode_marker_targets",
    "event_content_key",
    "pair_kind_for",
    "parse_qa_answer",
    "prompt_text",
    "strip_markers",
]
