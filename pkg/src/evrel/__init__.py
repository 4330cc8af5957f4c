"""Toolkit for clinical problem/drug event and relation annotations:
standoff I/O, schema validation, relaxed-match scoring, relation context
windows, generative-model codecs, bootstrap significance tests, and a
seeded synthetic corpus generator.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .model import (
    ARGUMENT_ORDER,
    AnnotationError,
    Argument,
    ArgumentType,
    Document,
    Event,
    EventType,
    Relation,
    RelationType,
    SUBTYPE_VOCAB,
    Span,
    documents_equivalent,
)
from .segmentation import SentenceSplitter, segment_sentences
from .validation import (
    OutOfBoundsError,
    Severity,
    Violation,
    has_errors,
    sentence_index,
    validate_document,
)
from .standoff import (
    StandoffFilePair,
    StandoffParseError,
    parse_standoff,
    read_corpus_dir,
    read_pair,
    write_corpus_dir,
    write_standoff,
)
from .windows import (
    ContextWindow,
    CoverageStats,
    Tokenizer,
    WindowLimitError,
    build_window,
    coverage_report,
    enumerate_candidate_pairs,
    subword_token_count,
    validity_filter,
    window_for_range,
)
from .scoring import (
    Matching,
    ScoreReport,
    TextMismatchError,
    UnalignedCorporaError,
    iaa,
    match_documents,
    per_note_f1,
    score,
    triggers_equivalent,
)
from .significance import MisalignedSamplesError, SigTestResult, bootstrap_test
from .synth import GenConfig, InvalidConfigError, Lexicons, NoiseSpec, generate_corpus, perturb

__all__ = [
    "ARGUMENT_ORDER",
    "AnnotationError",
    "Argument",
    "ArgumentType",
    "ContextWindow",
    "CoverageStats",
    "Document",
    "Event",
    "EventType",
    "GenConfig",
    "InvalidConfigError",
    "Lexicons",
    "Matching",
    "MisalignedSamplesError",
    "NoiseSpec",
    "OutOfBoundsError",
    "Relation",
    "RelationType",
    "SUBTYPE_VOCAB",
    "ScoreReport",
    "SentenceSplitter",
    "Severity",
    "SigTestResult",
    "Span",
    "StandoffFilePair",
    "StandoffParseError",
    "TextMismatchError",
    "Tokenizer",
    "UnalignedCorporaError",
    "Violation",
    "WindowLimitError",
    "bootstrap_test",
    "build_window",
    "coverage_report",
    "documents_equivalent",
    "enumerate_candidate_pairs",
    "generate_corpus",
    "has_errors",
    "iaa",
    "match_documents",
    "parse_standoff",
    "per_note_f1",
    "perturb",
    "read_corpus_dir",
    "read_pair",
    "score",
    "segment_sentences",
    "sentence_index",
    "subword_token_count",
    "triggers_equivalent",
    "validate_document",
    "validity_filter",
    "window_for_range",
    "write_corpus_dir",
    "write_standoff",
]
