from __future__ import annotations

import hashlib

import pytest

from evrel.model import ArgumentType, EventType
from evrel.scoring import OVERALL, score
from evrel.standoff import write_standoff
from evrel.synth import (
    GenConfig,
    InvalidConfigError,
    NoiseSpec,
    generate_corpus,
    perturb,
)
from evrel.validation import Severity, validate_document


def corpus_hash(docs) -> str:
    digest = hashlib.sha256()
    for doc in docs:
        pair = write_standoff(doc)
        digest.update(pair.text.encode())
        digest.update(pair.ann.encode())
    return digest.hexdigest()


def test_zero_notes():
    assert generate_corpus(GenConfig(n_notes=0)) == []


def test_seeded_determinism():
    cfg = GenConfig(seed=123, n_notes=12)
    assert corpus_hash(generate_corpus(cfg)) == corpus_hash(generate_corpus(cfg))


def test_different_seeds_differ():
    a = corpus_hash(generate_corpus(GenConfig(seed=1, n_notes=6)))
    b = corpus_hash(generate_corpus(GenConfig(seed=2, n_notes=6)))
    assert a != b


def test_generated_documents_are_schema_valid():
    for doc in generate_corpus(GenConfig(seed=50, n_notes=30)):
        violations = validate_document(doc)
        errors = [v for v in violations if v.severity is Severity.ERROR]
        assert errors == [], (doc.doc_id, errors)


def test_trigger_type_ratio_census():
    docs = generate_corpus(GenConfig(seed=8, n_notes=200))
    problems = sum(
        1 for d in docs for e in d.events if e.event_type is EventType.PROBLEM
    )
    drugs = sum(1 for d in docs for e in d.events if e.event_type is EventType.DRUG)
    ratio = problems / drugs
    assert ratio == pytest.approx(21453 / 11118, rel=0.10)


def test_argument_attachment_frequencies():
    docs = generate_corpus(GenConfig(seed=16, n_notes=300))
    cfg = GenConfig()
    problems = [
        e for d in docs for e in d.events if e.event_type is EventType.PROBLEM
    ]
    assert len(problems) >= 2000
    for arg_type, target in cfg.argument_probs.items():
        with_arg = sum(1 for e in problems if e.arguments_of(arg_type))
        frequency = with_arg / len(problems)
        assert abs(frequency - target) <= 0.03, (arg_type, frequency, target)


def test_assertion_label_frequencies():
    docs = generate_corpus(GenConfig(seed=19, n_notes=300))
    cfg = GenConfig()
    labels = [
        arg.label
        for d in docs
        for e in d.events
        for arg in e.arguments_of(ArgumentType.ASSERTION)
    ]
    assert len(labels) >= 2000
    for label, target in cfg.assertion_probs.items():
        frequency = labels.count(label) / len(labels)
        assert abs(frequency - target) <= 0.03, (label, frequency, target)


def test_change_and_severity_label_mix():
    # lower-frequency categories: smaller samples, looser bound
    docs = generate_corpus(GenConfig(seed=23, n_notes=900))
    cfg = GenConfig()
    for arg_type, probs in (
        (ArgumentType.CHANGE, cfg.change_probs),
        (ArgumentType.SEVERITY, cfg.severity_probs),
    ):
        labels = [
            arg.label
            for d in docs
            for e in d.events
            for arg in e.arguments_of(arg_type)
        ]
        assert len(labels) >= 120
        for label, target in probs.items():
            frequency = labels.count(label) / len(labels)
            assert abs(frequency - target) <= 0.08, (arg_type, label, frequency)


def test_relations_respect_typing_and_closest_pair():
    docs = generate_corpus(GenConfig(seed=12, n_notes=40))
    total = 0
    for doc in docs:
        mentions: dict[tuple, int] = {}
        for event in doc.events:
            key = (event.event_type, event.trigger.text)
            mentions[key] = mentions.get(key, 0) + 1
        for rel in doc.relations:
            total += 1
            head, tail = doc.resolve(rel)
            assert head.event_type is rel.rel_type.head_type
            assert tail.event_type is rel.rel_type.tail_type
            assert head.id != tail.id
    assert total > 0


def test_invalid_config_rejected():
    with pytest.raises(InvalidConfigError):
        GenConfig(n_notes=-1).validate()
    with pytest.raises(InvalidConfigError):
        GenConfig(problem_fraction=1.5).validate()
    with pytest.raises(InvalidConfigError):
        GenConfig(relation_mix={}).validate()
    with pytest.raises(InvalidConfigError):
        GenConfig(intra_sentence_fraction=1.0,
                  oversize_relation_fraction=0.1).validate()
    with pytest.raises(InvalidConfigError):
        generate_corpus(GenConfig(sentences_per_note=(9, 3)))


def test_perturb_zero_noise_is_identity():
    doc = generate_corpus(GenConfig(seed=2, n_notes=1))[0]
    same = perturb(doc, NoiseSpec(), seed=0)
    assert same.events == doc.events
    assert same.relations == doc.relations
    assert same.source == "predicted"
    report = score([doc], [same])
    assert report[OVERALL].f1 == 1.0


def test_perturb_deterministic():
    doc = generate_corpus(GenConfig(seed=2, n_notes=1))[0]
    noise = NoiseSpec(drop_events=2, insert_events=1, flip_labels=1, jitter_spans=1)
    assert perturb(doc, noise, seed=9) == perturb(doc, noise, seed=9)


def test_drop_k_gives_exact_trigger_recall():
    doc = generate_corpus(GenConfig(seed=33, n_notes=1))[0]
    n = len(doc.events)
    k = 3
    assert n > k
    pred = perturb(doc, NoiseSpec(drop_events=k), seed=1)
    report = score([doc], [pred])
    tp = report["Problem trigger"].tp + report["Drug trigger"].tp
    fn = report["Problem trigger"].fn + report["Drug trigger"].fn
    assert tp == n - k and fn == k
    assert tp / (tp + fn) == pytest.approx((n - k) / n, abs=1e-12)


def test_flip_one_assertion_label():
    docs = generate_corpus(GenConfig(seed=44, n_notes=1))
    doc = docs[0]
    pred = perturb(doc, NoiseSpec(flip_labels=1), seed=2)
    report = score([doc], [pred])
    trigger_f1 = report["Problem trigger"].f1
    assert trigger_f1 == 1.0
    flipped_rows = [
        report[t.value]
        for t in (ArgumentType.ASSERTION, ArgumentType.CHANGE, ArgumentType.SEVERITY)
        if report.get(t.value) is not None and report[t.value].fn
    ]
    assert len(flipped_rows) == 1
    row = flipped_rows[0]
    assert row.fn == 1 and row.fp == 1


def test_insertions_are_spurious_but_valid():
    doc = generate_corpus(GenConfig(seed=3, n_notes=1))[0]
    pred = perturb(doc, NoiseSpec(insert_events=3), seed=4)
    assert len(pred.events) == len(doc.events) + 3
    errors = [
        v for v in validate_document(pred) if v.severity is Severity.ERROR
    ]
    assert errors == []
    report = score([doc], [pred])
    fp = report["Problem trigger"].fp + report["Drug trigger"].fp
    assert fp == 3


def test_jitter_keeps_relaxed_match_but_breaks_strict():
    doc = generate_corpus(GenConfig(seed=6, n_notes=1))[0]
    pred = perturb(doc, NoiseSpec(jitter_spans=2), seed=5)
    relaxed = score([doc], [pred])
    tp = relaxed["Problem trigger"].tp + relaxed["Drug trigger"].tp
    assert tp == len(doc.events)
    strict = score([doc], [pred], strict=True)
    strict_tp = strict["Problem trigger"].tp + strict["Drug trigger"].tp
    assert strict_tp == len(doc.events) - 2


def test_perturb_rejects_impossible_counts():
    doc = generate_corpus(GenConfig(seed=2, n_notes=1))[0]
    with pytest.raises(ValueError):
        perturb(doc, NoiseSpec(drop_events=len(doc.events) + 1), seed=0)


def test_intra_sentence_fraction_controls_generation():
    from evrel.windows import coverage_report

    all_intra = generate_corpus(
        GenConfig(seed=1, n_notes=30, intra_sentence_fraction=1.0,
                  oversize_relation_fraction=0.0)
    )
    stats = coverage_report(all_intra)
    assert stats.intra_fraction == 1.0
    assert stats.coverage == 1.0
