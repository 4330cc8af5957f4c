"""Seeded generator for schema-valid synthetic corpora with gold annotations.

Sentences are composed from lexicon phrases inside fixed templates, so every
trigger and argument span is locatable verbatim in the note text, which the
event codec's validity rule requires. Inter-sentence relations follow the
section-header pattern (a header line, a problem statement, filler, then the
treatment sentence) so context windows longer than one sentence occur at a
controlled rate. Generation is a pure function of the config, including the
seed; per-note seeds are derived up front so notes could be built in
parallel.

Default distribution targets: problem/drug trigger mix and per-argument
attachment rates follow the corpus label counts these tools are built
around; the intra-sentence relation fraction defaults to 0.707.
"""
from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from types import MappingProxyType
from typing import Mapping, Sequence

from .model import (
    Argument,
    ArgumentType,
    Document,
    Event,
    EventType,
    Relation,
    RelationType,
    SUBTYPE_VOCAB,
    Span,
    document_order,
)
from .segmentation import segment_sentences
from .validation import sentence_index


class InvalidConfigError(ValueError):
    """Generator config violates its own invariants (INVALID_CONFIG)."""


def _load_lexicon(name: str) -> tuple[str, ...]:
    path = resources.files("evrel") / "resources" / "lexicons" / f"{name}.txt"
    lines = path.read_text(encoding="utf-8").splitlines()
    return tuple(line.strip() for line in lines if line.strip())


@dataclass(frozen=True)
class Lexicons:
    problems: tuple[str, ...]
    drugs: tuple[str, ...]
    anatomy: tuple[str, ...]
    characteristics: tuple[str, ...]
    durations: tuple[str, ...]
    frequencies: tuple[str, ...]

    @staticmethod
    def bundled() -> "Lexicons":
        return Lexicons(
            problems=_load_lexicon("problems"),
            drugs=_load_lexicon("drugs"),
            anatomy=_load_lexicon("anatomy"),
            characteristics=_load_lexicon("characteristics"),
            durations=_load_lexicon("durations"),
            frequencies=_load_lexicon("frequencies"),
        )


# Trigger counts 21,453 problems / 11,118 drugs give the default type mix.
DEFAULT_PROBLEM_FRACTION = 21453 / (21453 + 11118)

DEFAULT_ARGUMENT_PROBS: Mapping[ArgumentType, float] = MappingProxyType(
    {
        ArgumentType.ANATOMY: 9880 / 21453,
        ArgumentType.CHARACTERISTICS: 4749 / 21453,
        ArgumentType.DURATION: 930 / 21453,
        ArgumentType.FREQUENCY: 245 / 21453,
        ArgumentType.CHANGE: 1440 / 21453,
        ArgumentType.SEVERITY: 775 / 21453,
    }
)

DEFAULT_ASSERTION_PROBS: Mapping[str, float] = MappingProxyType(
    {
        "present": 0.62,
        "absent": 0.14,
        "possible": 0.08,
        "hypothetical": 0.07,
        "conditional": 0.05,
        "not_patient": 0.04,
    }
)

DEFAULT_CHANGE_PROBS: Mapping[str, float] = MappingProxyType(
    {"worsening": 0.3, "improving": 0.3, "no_change": 0.2, "resolved": 0.2}
)

DEFAULT_SEVERITY_PROBS: Mapping[str, float] = MappingProxyType(
    {"mild": 0.3, "moderate": 0.4, "severe": 0.3}
)

DEFAULT_RELATION_MIX: Mapping[RelationType, float] = MappingProxyType(
    {
        RelationType.ADMIN_FOR: 3715 / 6590,
        RelationType.NOT_ADMIN_BECAUSE: 130 / 6590,
        RelationType.CAUSES: 729 / 6590,
        RelationType.IMPROVES: 502 / 6590,
        RelationType.WORSENS: 257 / 6590,
        RelationType.PIP: 1257 / 6590,
    }
)

DEFAULT_INTRA_FRACTION = 0.707


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    n_notes: int = 100
    sentences_per_note: tuple[int, int] = (8, 16)
    relations_per_note: tuple[int, int] = (2, 6)
    problem_fraction: float = DEFAULT_PROBLEM_FRACTION
    argument_probs: Mapping[ArgumentType, float] = DEFAULT_ARGUMENT_PROBS
    assertion_probs: Mapping[str, float] = DEFAULT_ASSERTION_PROBS
    change_probs: Mapping[str, float] = DEFAULT_CHANGE_PROBS
    severity_probs: Mapping[str, float] = DEFAULT_SEVERITY_PROBS
    relation_mix: Mapping[RelationType, float] = DEFAULT_RELATION_MIX
    intra_sentence_fraction: float = DEFAULT_INTRA_FRACTION
    oversize_relation_fraction: float = 0.01
    extra_characteristics_prob: float = 0.25
    lexicons: Lexicons = field(default_factory=Lexicons.bundled)

    def validate(self) -> None:
        if self.n_notes < 0:
            raise InvalidConfigError(f"n_notes must be >= 0, got {self.n_notes}")
        for name, lo_hi in (
            ("sentences_per_note", self.sentences_per_note),
            ("relations_per_note", self.relations_per_note),
        ):
            if lo_hi[0] < 0 or lo_hi[0] > lo_hi[1]:
                raise InvalidConfigError(f"bad range {name}={lo_hi}")
        fractions = {
            "problem_fraction": self.problem_fraction,
            "intra_sentence_fraction": self.intra_sentence_fraction,
            "oversize_relation_fraction": self.oversize_relation_fraction,
            "extra_characteristics_prob": self.extra_characteristics_prob,
            **{f"p({t})": p for t, p in self.argument_probs.items()},
        }
        for name, value in fractions.items():
            if not 0.0 <= value <= 1.0:
                raise InvalidConfigError(f"{name}={value} outside [0, 1]")
        for name, mix in (
            ("assertion_probs", self.assertion_probs),
            ("change_probs", self.change_probs),
            ("severity_probs", self.severity_probs),
            ("relation_mix", self.relation_mix),
        ):
            if any(p < 0 for p in mix.values()) or abs(sum(mix.values()) - 1.0) > 1e-6:
                raise InvalidConfigError(f"{name} must be a distribution summing to 1")
        if self.intra_sentence_fraction < 1.0:
            inter = 1.0 - self.intra_sentence_fraction
            if self.oversize_relation_fraction >= inter:
                raise InvalidConfigError(
                    "oversize_relation_fraction must be below the inter-sentence share"
                )
        elif self.oversize_relation_fraction > 0:
            raise InvalidConfigError("oversize relations need inter-sentence relations")


def _weighted_choice(rng: random.Random, probs: Mapping) -> object:
    items = list(probs.items())
    r = rng.random()
    acc = 0.0
    for value, p in items:
        acc += p
        if r < acc:
            return value
    return items[-1][0]


class _Draft:
    """One sentence under construction; records phrase offsets as it grows."""

    __slots__ = ("parts", "length", "events")

    def __init__(self) -> None:
        self.parts: list[str] = []
        self.length = 0
        self.events: list[_Proto] = []

    def add(self, text: str) -> tuple[int, int]:
        start = self.length
        self.parts.append(text)
        self.length += len(text)
        return start, start + len(text)

    @property
    def text(self) -> str:
        return "".join(self.parts)


class _Proto:
    """Event under construction with sentence-relative offsets."""

    __slots__ = ("event_type", "trigger", "args")

    def __init__(self, event_type: EventType, trigger: tuple[int, int, str]):
        self.event_type = event_type
        self.trigger = trigger
        self.args: list[tuple[ArgumentType, tuple[int, int, str] | None, str | None]] = []


@dataclass
class _Block:
    drafts: list[_Draft]
    relations: list[tuple[RelationType, _Proto, _Proto]] = field(default_factory=list)


# Sentence frames keyed by the sampled assertion label: (prefix, suffix).
_PROBLEM_FRAMES: dict[str, tuple[tuple[str, str], ...]] = {
    "present": (
        ("Patient reports ", "."),
        ("He reports ", "."),
        ("She describes ", "."),
        ("Exam shows ", "."),
    ),
    "absent": (("Patient denies ", "."), ("He denies ", "."), ("She denies ", ".")),
    "possible": (("There is likely ", "."), ("Findings suggest ", ".")),
    "conditional": (("He notes ", " only with exertion."),),
    "hypothetical": (("Return to clinic if ", " develops."),),
    "not_patient": (("Family history of ", "."),),
}
_DRUG_FRAMES = ("Continue ", "We will begin ", "Patient remains on ", "Started ")
_NEUTRAL_SENTENCES = (
    "Labs were reviewed.",
    "Vitals are stable.",
    "Imaging was obtained.",
    "The plan was discussed with the patient.",
    "Follow up in clinic next month.",
)
_HEADERS = ("ASSESSMENT AND PLAN:", "IMPRESSION:", "CANCER TREATMENT:", "PLAN:")


def _add_problem(
    draft: _Draft, rng: random.Random, cfg: GenConfig, assertion: str
) -> _Proto:
    """Append a problem noun phrase and return its proto event."""
    lex = cfg.lexicons
    pending: list[tuple[ArgumentType, tuple[int, int, str] | None, str | None]] = [
        (ArgumentType.ASSERTION, None, assertion)
    ]
    if rng.random() < cfg.argument_probs[ArgumentType.SEVERITY]:
        label = _weighted_choice(rng, cfg.severity_probs)
        draft.add(f"{label} ")
        pending.append((ArgumentType.SEVERITY, None, label))
    if rng.random() < cfg.argument_probs[ArgumentType.CHARACTERISTICS]:
        count = 2 if rng.random() < cfg.extra_characteristics_prob else 1
        for phrase in rng.sample(list(lex.characteristics), count):
            start, end = draft.add(phrase)
            draft.add(" ")
            pending.append((ArgumentType.CHARACTERISTICS, (start, end, phrase), None))
    word = rng.choice(lex.problems)
    t_start, t_end = draft.add(word)
    proto = _Proto(EventType.PROBLEM, (t_start, t_end, word))
    proto.args.extend(pending)
    if rng.random() < cfg.argument_probs[ArgumentType.ANATOMY]:
        draft.add(" in the ")
        phrase = rng.choice(lex.anatomy)
        start, end = draft.add(phrase)
        proto.args.append((ArgumentType.ANATOMY, (start, end, phrase), None))
    if rng.random() < cfg.argument_probs[ArgumentType.DURATION]:
        draft.add(" for ")
        phrase = rng.choice(lex.durations)
        start, end = draft.add(phrase)
        proto.args.append((ArgumentType.DURATION, (start, end, phrase), None))
    if rng.random() < cfg.argument_probs[ArgumentType.FREQUENCY]:
        draft.add(" occurring ")
        phrase = rng.choice(lex.frequencies)
        start, end = draft.add(phrase)
        proto.args.append((ArgumentType.FREQUENCY, (start, end, phrase), None))
    if rng.random() < cfg.argument_probs[ArgumentType.CHANGE]:
        label = _weighted_choice(rng, cfg.change_probs)
        word = {"no_change": "unchanged"}.get(label, label)
        draft.add(f", now {word}")
        proto.args.append((ArgumentType.CHANGE, None, label))
    return proto


def _add_drug(draft: _Draft, rng: random.Random, cfg: GenConfig) -> _Proto:
    word = rng.choice(cfg.lexicons.drugs)
    start, end = draft.add(word)
    return _Proto(EventType.DRUG, (start, end, word))


def _problem_sentence(rng, cfg, count: int = 1) -> _Draft:
    """A sentence carrying ``count`` problem events sharing one assertion.

    The frame matches the sampled assertion label, so every problem event in
    the corpus draws its assertion from the configured distribution.
    """
    draft = _Draft()
    assertion = _weighted_choice(rng, cfg.assertion_probs)
    prefix, suffix = rng.choice(_PROBLEM_FRAMES[assertion])
    joiner = "or" if assertion in ("absent", "hypothetical") else "and"
    draft.add(prefix)
    for i in range(count):
        if count > 1 and i == count - 1:
            draft.add(f"{joiner} ")
        draft.events.append(_add_problem(draft, rng, cfg, assertion))
        if i < count - 1:
            draft.add(", ")
    draft.add(suffix)
    return draft


def _free_drug_sentence(rng, cfg) -> _Draft:
    draft = _Draft()
    draft.add(rng.choice(_DRUG_FRAMES))
    draft.events.append(_add_drug(draft, rng, cfg))
    draft.add(".")
    return draft


def _shared_admin_for_block(rng, cfg) -> _Block:
    """One drug treating two problems in a single sentence: two relations."""
    draft = _Draft()
    head = _add_drug(draft, rng, cfg)
    draft.add(" is given for ")
    tail_a = _add_problem(draft, rng, cfg, _weighted_choice(rng, cfg.assertion_probs))
    draft.add(" and ")
    tail_b = _add_problem(draft, rng, cfg, _weighted_choice(rng, cfg.assertion_probs))
    draft.add(".")
    draft.events.extend([head, tail_a, tail_b])
    return _Block(
        drafts=[draft],
        relations=[
            (RelationType.ADMIN_FOR, head, tail_a),
            (RelationType.ADMIN_FOR, head, tail_b),
        ],
    )


def _intra_relation_block(rng, cfg, rel_type: RelationType) -> _Block:
    draft = _Draft()
    relations: list[tuple[RelationType, _Proto, _Proto]] = []
    if rel_type is RelationType.PIP:
        tail = _add_problem(draft, rng, cfg, _weighted_choice(rng, cfg.assertion_probs))
        draft.add(" likely due to ")
        head = _add_problem(draft, rng, cfg, _weighted_choice(rng, cfg.assertion_probs))
        draft.add(".")
        draft.events.extend([tail, head])
        relations.append((RelationType.PIP, head, tail))
    else:
        templates = {
            RelationType.ADMIN_FOR: (" is given for ", True),
            RelationType.NOT_ADMIN_BECAUSE: (" was held because of ", True),
            RelationType.CAUSES: (" attributed to ", False),
            RelationType.IMPROVES: (" improved with ", False),
            RelationType.WORSENS: (" worsened despite ", False),
        }
        middle, drug_first = templates[rel_type]
        if drug_first:
            head = _add_drug(draft, rng, cfg)
            draft.add(middle)
            tail = _add_problem(draft, rng, cfg, _weighted_choice(rng, cfg.assertion_probs))
        else:
            tail = _add_problem(draft, rng, cfg, _weighted_choice(rng, cfg.assertion_probs))
            draft.add(middle)
            head = _add_drug(draft, rng, cfg)
        draft.add(".")
        draft.events.extend([head, tail] if drug_first else [tail, head])
        relations.append((rel_type, head, tail))
    return _Block(drafts=[draft], relations=relations)


_INTER_CLOSERS: dict[RelationType, tuple[str, str]] = {
    RelationType.ADMIN_FOR: ("We will start ", " for this."),
    RelationType.NOT_ADMIN_BECAUSE: ("We will hold ", " for now."),
    RelationType.CAUSES: ("This is likely from ", "."),
    RelationType.IMPROVES: ("This improved after ", "."),
    RelationType.WORSENS: ("This progressed despite ", "."),
}


def _inter_relation_block(rng, cfg, rel_type: RelationType, window_len: int) -> _Block:
    drafts: list[_Draft] = []
    if rng.random() < 0.7:
        header = _Draft()
        header.add(rng.choice(_HEADERS))
        drafts.append(header)

    opener = _Draft()
    opener.add("Imaging revealed " if rng.random() < 0.5 else "Workup confirmed ")
    first_problem = _add_problem(opener, rng, cfg, _weighted_choice(rng, cfg.assertion_probs))
    opener.add(".")
    opener.events.append(first_problem)
    drafts.append(opener)

    for _ in range(window_len - 2):
        filler = _Draft()
        filler.add(rng.choice(_NEUTRAL_SENTENCES))
        drafts.append(filler)

    closer = _Draft()
    if rel_type is RelationType.PIP:
        closer.add("This is consistent with ")
        other = _add_problem(closer, rng, cfg, _weighted_choice(rng, cfg.assertion_probs))
        closer.add(".")
        closer.events.append(other)
        relations = [(RelationType.PIP, other, first_problem)]
    else:
        prefix, suffix = _INTER_CLOSERS[rel_type]
        closer.add(prefix)
        drug = _add_drug(closer, rng, cfg)
        closer.add(suffix)
        closer.events.append(drug)
        relations = [(rel_type, drug, first_problem)]
    drafts.append(closer)
    return _Block(drafts=drafts, relations=relations)


def _sample_window_len(rng, cfg) -> int:
    inter_share = 1.0 - cfg.intra_sentence_fraction
    oversize_given_inter = (
        cfg.oversize_relation_fraction / inter_share if inter_share > 0 else 0.0
    )
    if rng.random() < oversize_given_inter:
        return rng.choice((6, 7))
    return _weighted_choice(rng, {2: 0.5, 3: 0.25, 4: 0.15, 5: 0.1})


def generate_note(note_seed: int, cfg: GenConfig, doc_id: str) -> Document:
    rng = random.Random(note_seed)
    blocks: list[_Block] = []

    n_relations = rng.randint(*cfg.relations_per_note)
    # each relation consumes exactly one pre-drawn intra/inter flag, so the
    # corpus intra fraction tracks the config target even when one sentence
    # carries two relations
    intra_flags = [
        rng.random() < cfg.intra_sentence_fraction for _ in range(n_relations)
    ]
    rel_problems = 0
    rel_drugs = 0
    flag_idx = 0
    while flag_idx < len(intra_flags):
        rel_type = _weighted_choice(rng, cfg.relation_mix)
        if intra_flags[flag_idx]:
            shareable = (
                rel_type is RelationType.ADMIN_FOR
                and flag_idx + 1 < len(intra_flags)
                and intra_flags[flag_idx + 1]
            )
            if shareable and rng.random() < 0.3:
                block = _shared_admin_for_block(rng, cfg)
                flag_idx += 2
            else:
                block = _intra_relation_block(rng, cfg, rel_type)
                flag_idx += 1
        else:
            block = _inter_relation_block(
                rng, cfg, rel_type, _sample_window_len(rng, cfg)
            )
            flag_idx += 1
        blocks.append(block)
        for draft in block.drafts:
            for proto in draft.events:
                if proto.event_type is EventType.PROBLEM:
                    rel_problems += 1
                else:
                    rel_drugs += 1

    used_sentences = sum(len(b.drafts) for b in blocks)
    target_sentences = rng.randint(*cfg.sentences_per_note)
    n_free = max(1, target_sentences - used_sentences)

    plans: list[str] = []
    for _ in range(n_free):
        roll = rng.random()
        plans.append("neutral" if roll < 0.2 else "list" if roll < 0.32 else "single")
    n_lists = plans.count("list")
    n_singles = plans.count("single")

    total_events = rel_problems + rel_drugs + 3 * n_lists + n_singles
    want = cfg.problem_fraction * total_events - rel_problems - 3 * n_lists
    k_problems = int(want)
    if rng.random() < want - k_problems:
        k_problems += 1
    k_problems = max(0, min(n_singles, k_problems))
    single_types = [EventType.PROBLEM] * k_problems + [EventType.DRUG] * (
        n_singles - k_problems
    )
    rng.shuffle(single_types)

    type_cursor = 0
    for plan in plans:
        if plan == "neutral":
            draft = _Draft()
            draft.add(rng.choice(_NEUTRAL_SENTENCES))
            blocks.append(_Block(drafts=[draft]))
        elif plan == "list":
            blocks.append(_Block(drafts=[_problem_sentence(rng, cfg, count=3)]))
        else:
            kind = single_types[type_cursor]
            type_cursor += 1
            draft = (
                _problem_sentence(rng, cfg)
                if kind is EventType.PROBLEM
                else _free_drug_sentence(rng, cfg)
            )
            blocks.append(_Block(drafts=[draft]))

    rng.shuffle(blocks)
    return _assemble(blocks, rng, doc_id)


def _assemble(blocks: list[_Block], rng: random.Random, doc_id: str) -> Document:
    parts: list[str] = []
    pos = 0
    n_drafts = 0
    placed: dict[int, Event] = {}
    temp = 0
    for b_idx, block in enumerate(blocks):
        if parts:
            sep = "\n\n" if rng.random() < 0.1 else "\n"
            parts.append(sep)
            pos += len(sep)
        for d_idx, draft in enumerate(block.drafts):
            if d_idx > 0:
                parts.append("\n")
                pos += 1
            for proto in draft.events:
                t_start, t_end, t_text = proto.trigger
                arguments = []
                for arg_type, span_rel, label in proto.args:
                    if span_rel is None:
                        arguments.append(Argument(arg_type, label=label))
                    else:
                        s, e, text = span_rel
                        arguments.append(
                            Argument(arg_type, span=Span(pos + s, pos + e, text))
                        )
                placed[id(proto)] = Event(
                    f"tmp{temp}",
                    proto.event_type,
                    Span(pos + t_start, pos + t_end, t_text),
                    tuple(arguments),
                )
                temp += 1
            parts.append(draft.text)
            pos += draft.length
            n_drafts += 1
    text = "".join(parts)

    events = document_order(list(placed.values()))
    rename = {e.id: f"E{i}" for i, e in enumerate(events, start=1)}
    events = [replace(e, id=rename[e.id]) for e in events]
    relations = []
    for block in blocks:
        for rel_type, head_proto, tail_proto in block.relations:
            relations.append(
                Relation(
                    rel_type,
                    rename[placed[id(head_proto)].id],
                    rename[placed[id(tail_proto)].id],
                )
            )
    relations.sort(key=lambda r: (rename_order(r.head), rename_order(r.tail), r.rel_type.value))

    sentences = segment_sentences(text)
    if len(sentences) != n_drafts:
        raise RuntimeError(
            f"{doc_id}: template produced {n_drafts} sentences but the splitter "
            f"found {len(sentences)}"
        )
    return Document(
        doc_id=doc_id,
        text=text,
        sentences=tuple(sentences),
        events=tuple(events),
        relations=tuple(relations),
        source="gold",
    )


def rename_order(event_id: str) -> int:
    return int(event_id[1:]) if event_id[1:].isdigit() else 0


def iter_corpus(cfg: GenConfig):
    """Yield the corpus one note at a time; a pure function of the config."""
    cfg.validate()
    master = random.Random(cfg.seed)
    for i in range(cfg.n_notes):
        yield generate_note(master.getrandbits(64), cfg, f"note{i:05d}")


def generate_corpus(cfg: GenConfig) -> list[Document]:
    return list(iter_corpus(cfg))


@dataclass(frozen=True)
class NoiseSpec:
    """Exact error counts injected by :func:`perturb`."""

    drop_events: int = 0
    insert_events: int = 0
    flip_labels: int = 0
    jitter_spans: int = 0


def _note_rng(seed: int, doc_id: str) -> random.Random:
    digest = hashlib.blake2s(doc_id.encode("utf-8"), digest_size=8).digest()
    return random.Random(seed ^ int.from_bytes(digest, "big"))


def perturb(doc: Document, noise: NoiseSpec, seed: int = 0) -> Document:
    """Derive a predicted document with controlled error counts.

    Drops remove events (and any relation touching them), insertions add
    spurious events over untouched words, flips change subtype labels, and
    jitter widens trigger spans by one neighboring word so relaxed matching
    still pairs them. Deterministic given (doc, noise, seed).
    """
    rng = _note_rng(seed, doc.doc_id)
    events = list(doc.events)
    relations = list(doc.relations)

    if noise.drop_events:
        if noise.drop_events > len(events):
            raise ValueError(
                f"cannot drop {noise.drop_events} of {len(events)} events"
            )
        victims = {
            e.id
            for e in rng.sample(sorted(events, key=lambda e: e.id), noise.drop_events)
        }
        events = [e for e in events if e.id not in victims]
        relations = [
            r for r in relations if r.head not in victims and r.tail not in victims
        ]

    if noise.flip_labels:
        labeled = [
            (i, j)
            for i, event in enumerate(events)
            for j, arg in enumerate(event.arguments)
            if arg.label is not None
        ]
        if noise.flip_labels > len(labeled):
            raise ValueError(
                f"cannot flip {noise.flip_labels} of {len(labeled)} labels"
            )
        for i, j in rng.sample(labeled, noise.flip_labels):
            event = events[i]
            arg = event.arguments[j]
            alternatives = sorted(SUBTYPE_VOCAB[arg.arg_type] - {arg.label})
            new_args = list(event.arguments)
            new_args[j] = replace(arg, label=rng.choice(alternatives))
            events[i] = replace(event, arguments=tuple(new_args))

    if noise.jitter_spans:
        candidates = [
            (i, widened)
            for i, event in enumerate(events)
            if (widened := _widen_trigger(doc, event)) is not None
        ]
        if noise.jitter_spans > len(candidates):
            raise ValueError(
                f"cannot jitter {noise.jitter_spans} of {len(candidates)} "
                "widenable triggers"
            )
        for i, widened in rng.sample(candidates, noise.jitter_spans):
            events[i] = replace(events[i], trigger=widened)

    if noise.insert_events:
        taken = [e.trigger for e in events] + [e.trigger for e in doc.events]
        added = 0
        sentence_order = list(range(len(doc.sentences)))
        rng.shuffle(sentence_order)
        for s_idx in sentence_order * 3:
            if added >= noise.insert_events:
                break
            sentence = doc.sentences[s_idx]
            words = [
                m
                for m in re.finditer(r"[A-Za-z]{3,}", sentence.text)
                if not any(
                    Span(
                        sentence.start + m.start(),
                        sentence.start + m.end(),
                        m.group(0),
                    ).overlaps(t)
                    for t in taken
                )
            ]
            if not words:
                continue
            m = rng.choice(words)
            span = Span(sentence.start + m.start(), sentence.start + m.end(), m.group(0))
            taken.append(span)
            event_type = (
                EventType.PROBLEM if rng.random() < 0.66 else EventType.DRUG
            )
            arguments = (
                (Argument(ArgumentType.ASSERTION, label="present"),)
                if event_type is EventType.PROBLEM
                else ()
            )
            events.append(Event(f"X{added + 1}", event_type, span, arguments))
            added += 1
        if added < noise.insert_events:
            raise ValueError(
                f"could not place {noise.insert_events} insertions in {doc.doc_id}"
            )

    return replace(
        doc, events=tuple(events), relations=tuple(relations), source="predicted"
    )


def _widen_trigger(doc: Document, event: Event) -> Span | None:
    """Extend a trigger over one neighboring word, staying inside its sentence."""
    sentence = doc.sentences[sentence_index(doc, event.trigger)]
    left = doc.text[sentence.start : event.trigger.start]
    m = re.search(r"([A-Za-z]+)[ ]+$", left)
    if m:
        new_start = sentence.start + m.start(1)
        return Span(new_start, event.trigger.end, doc.text[new_start : event.trigger.end])
    right = doc.text[event.trigger.end : sentence.end]
    m = re.match(r"[ ]+([A-Za-z]+)", right)
    if m:
        new_end = event.trigger.end + m.end(1)
        return Span(event.trigger.start, new_end, doc.text[event.trigger.start : new_end])
    return None
