from __future__ import annotations

import random

import pytest

from evrel.codec import decode_events, encode_events, event_content_key
from evrel.codec.events import EncodeError
from evrel.model import Argument, ArgumentType, Event, EventType, Span
from evrel.synth import GenConfig, generate_corpus
from evrel.windows import event_sentence_map

from conftest import drug, problem, span_of


def sentence_span(text: str) -> Span:
    return Span(0, len(text), text)


def test_no_events_renders_none():
    assert encode_events(sentence_span("Nothing to see."), []) == "None"


def test_none_decodes_to_nothing():
    events, issues = decode_events(sentence_span("Nothing to see."), "None")
    assert events == [] and issues == []


def test_multi_span_argument_rendering():
    text = "Patient reports pain in back and neck."
    event = problem(
        text, "E1", "pain",
        extra=(
            Argument(ArgumentType.ANATOMY, span=span_of(text, "back")),
            Argument(ArgumentType.ANATOMY, span=span_of(text, "neck")),
        ),
    )
    rendered = encode_events(sentence_span(text), [event])
    assert rendered == "<Problem> pain <Assertion> present <Anatomy> back <s> neck"


def test_two_events_single_separator_and_round_trip():
    text = "lupron helps the pain."
    events = [drug(text, "E1", "lupron"), problem(text, "E2", "pain")]
    rendered = encode_events(sentence_span(text), events)
    assert rendered.count("[SEP]") == 1
    decoded, issues = decode_events(sentence_span(text), rendered)
    assert issues == []
    assert [event_content_key(e) for e in decoded] == [
        event_content_key(e) for e in events
    ]
    assert [e.trigger for e in decoded] == [e.trigger for e in events]


def test_events_ordered_by_trigger_position():
    text = "pain treated with lupron."
    events = [drug(text, "E1", "lupron"), problem(text, "E2", "pain")]
    rendered = encode_events(sentence_span(text), events)
    assert rendered.index("<Problem>") < rendered.index("<Drug>")


def test_event_outside_sentence_rejected():
    text = "short text."
    with pytest.raises(EncodeError):
        encode_events(Span(0, 5, "short"), [problem(text, "E1", "text")])


def test_repeated_identical_mentions_resolve_in_order():
    text = "pain now and pain later."
    events = [problem(text, "E1", "pain"), problem(text, "E2", "pain", occurrence=1)]
    rendered = encode_events(sentence_span(text), events)
    decoded, issues = decode_events(sentence_span(text), rendered)
    assert issues == []
    assert decoded[0].trigger.start == 0
    assert decoded[1].trigger.start == text.find("pain", 1)


def test_missing_span_drops_argument_but_keeps_event():
    text = "Patient reports pain."
    out = "<Problem> pain <Assertion> present <Anatomy> xyz"
    decoded, issues = decode_events(sentence_span(text), out)
    assert len(decoded) == 1
    assert [a.arg_type for a in decoded[0].arguments] == [ArgumentType.ASSERTION]
    assert any(i.code == "SPAN_NOT_FOUND" for i in issues)


def test_missing_trigger_drops_event():
    text = "Patient reports pain."
    decoded, issues = decode_events(sentence_span(text), "<Problem> xyz")
    assert decoded == []
    assert any(i.code == "SPAN_NOT_FOUND" for i in issues)


def test_unknown_label_dropped_with_issue():
    text = "Patient reports pain."
    decoded, issues = decode_events(
        sentence_span(text), "<Problem> pain <Assertion> definitely"
    )
    assert len(decoded) == 1
    assert decoded[0].arguments == ()
    assert any(i.code == "UNKNOWN_LABEL" for i in issues)


def test_unknown_tag_skipped():
    text = "Patient reports pain on 5mg dose."
    decoded, issues = decode_events(
        sentence_span(text), "<Problem> pain <Assertion> present <Dosage> 5mg"
    )
    assert len(decoded) == 1
    assert [a.arg_type for a in decoded[0].arguments] == [ArgumentType.ASSERTION]
    assert any(i.code == "UNKNOWN_TAG" for i in issues)


def test_malformed_tail_salvages_prefix():
    text = "lupron helps the pain."
    out = "<Drug> lupron [SEP] <Problem> pain <Assertion> pres"
    decoded, issues = decode_events(sentence_span(text), out)
    assert len(decoded) == 2  # both triggers survive; bad label is dropped
    assert any(i.code == "UNKNOWN_LABEL" for i in issues)


def test_label_case_normalized():
    text = "Patient reports pain."
    decoded, _ = decode_events(
        sentence_span(text), "<Problem> pain <Assertion> Present"
    )
    assert decoded[0].arguments[0].label == "present"


def test_round_trip_over_generated_corpus():
    docs = generate_corpus(GenConfig(seed=9, n_notes=15))
    for doc in docs:
        smap = event_sentence_map(doc)
        by_sentence: dict[int, list] = {}
        for event in doc.events:
            by_sentence.setdefault(smap[event.id], []).append(event)
        for idx, sentence in enumerate(doc.sentences):
            events = sorted(
                by_sentence.get(idx, []),
                key=lambda e: (e.trigger.start, e.trigger.end, e.id),
            )
            rendered = encode_events(sentence, events)
            decoded, issues = decode_events(sentence, rendered)
            assert issues == []
            assert [event_content_key(e) for e in decoded] == [
                event_content_key(e) for e in events
            ]


def test_fuzzed_outputs_never_crash_and_spans_verify():
    rng = random.Random(1234)
    text = "Patient reports severe pain in the back and neck daily."
    sentence = sentence_span(text)
    vocab = [
        "<Problem>", "<Drug>", "<Assertion>", "<Anatomy>", "<s>", "[SEP]",
        "<Dosage>", "pain", "back", "neck", "present", "xyz", "(", "<", ">",
        "/", "None", "", " ",
    ]
    for _ in range(500):
        fuzz = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 25)))
        decoded, _issues = decode_events(sentence, fuzz)
        for event in decoded:
            assert text[event.trigger.start - sentence.start :].startswith(
                event.trigger.text
            ) or sentence.text.find(event.trigger.text) >= 0
            found = sentence.text.find(event.trigger.text)
            assert found >= 0
            for arg in event.arguments:
                if arg.span is not None:
                    assert sentence.text.find(arg.span.text) >= 0
