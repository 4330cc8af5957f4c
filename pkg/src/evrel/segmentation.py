"""Rule-based sentence segmentation with a pluggable splitter contract.

The default splitter is deterministic and dependency-free: it breaks on
sentence-final punctuation followed by whitespace, on blank lines, and on
section-header lines that end with a colon. Callers that need a specific
external splitter can pass any callable with the same signature.
"""
from __future__ import annotations

from typing import Callable

from .model import Span

SentenceSplitter = Callable[[str], list[Span]]

_TERMINALS = frozenset(".!?")


def segment_sentences(text: str) -> list[Span]:
    """Split a note into sorted, disjoint sentence spans.

    Every non-whitespace character of ``text`` is covered by exactly one
    returned span; surrounding whitespace is trimmed from each span.
    """
    spans: list[Span] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        ch = text[i]
        boundary = False
        cut = i + 1
        if ch in _TERMINALS:
            # Run of terminal punctuation counts as one boundary.
            while cut < n and text[cut] in _TERMINALS:
                cut += 1
            if cut >= n or text[cut].isspace():
                boundary = True
        elif ch == "\n":
            rest = text[cut:]
            if rest[:1] == "\n" or not rest.strip():
                boundary = True  # blank line (or trailing whitespace) ends a block
            else:
                line_start = text.rfind("\n", 0, i) + 1
                if text[line_start:i].rstrip().endswith(":"):
                    boundary = True  # section header line
        if boundary:
            _append_trimmed(spans, text, start, cut)
            start = cut
            i = cut
        else:
            i += 1
    _append_trimmed(spans, text, start, n)
    return spans


def _append_trimmed(spans: list[Span], text: str, start: int, end: int) -> None:
    chunk = text[start:end]
    stripped = chunk.strip()
    if not stripped:
        return
    left = start + (len(chunk) - len(chunk.lstrip()))
    right = left + len(stripped)
    spans.append(Span(left, right, text[left:right]))
