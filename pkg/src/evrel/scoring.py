"""Relaxed-match scoring: trigger/argument/relation matching and P/R/F1.

Equivalence rules: triggers match on same event type plus any character
overlap; labeled arguments on type + label + matched parent triggers;
span-only arguments on type + span overlap + matched parent triggers;
relations on matched endpoints + same relation type. The assignment itself
is greedy over golds in document order (largest overlap first, then earliest
start); an optimal-assignment mode is available for auditing. ``strict``
replaces span overlap with span equality everywhere.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .model import (
    ARGUMENT_ORDER,
    Argument,
    ArgumentType,
    Document,
    Event,
    EventType,
    Relation,
    RelationType,
    document_order,
)

EVENTS_OVERALL = "Events overall"
RELATIONS_OVERALL = "Relations overall"
OVERALL = "Overall"


class TextMismatchError(ValueError):
    """Gold and predicted documents carry different note text (TEXT_MISMATCH)."""


class UnalignedCorporaError(ValueError):
    """Gold and predicted corpora do not pair up by doc_id (UNALIGNED_CORPORA)."""


def spans_equivalent(a, b, strict: bool = False) -> bool:
    if strict:
        return a.start == b.start and a.end == b.end
    return a.overlaps(b)


def triggers_equivalent(a: Event, b: Event, strict: bool = False) -> bool:
    """Same event type and overlapping trigger spans."""
    return a.event_type is b.event_type and spans_equivalent(
        a.trigger, b.trigger, strict
    )


@dataclass
class Matching:
    """One-to-one alignment of a predicted document against gold."""

    trigger_pairs: list[tuple[Event, Event]] = field(default_factory=list)
    unmatched_gold: list[Event] = field(default_factory=list)
    unmatched_pred: list[Event] = field(default_factory=list)
    argument_pairs: list[tuple[ArgumentType, Argument, Argument]] = field(
        default_factory=list
    )
    unmatched_gold_args: list[tuple[ArgumentType, Argument]] = field(
        default_factory=list
    )
    unmatched_pred_args: list[tuple[ArgumentType, Argument]] = field(
        default_factory=list
    )
    relation_pairs: list[tuple[Relation, Relation]] = field(default_factory=list)
    unmatched_gold_relations: list[Relation] = field(default_factory=list)
    unmatched_pred_relations: list[Relation] = field(default_factory=list)

    def counts(self) -> dict[str, list[int]]:
        """Per-category [TP, FP, FN]; keys are report row names."""
        out: dict[str, list[int]] = {}

        def bump(key: str, tp=0, fp=0, fn=0) -> None:
            cell = out.setdefault(key, [0, 0, 0])
            cell[0] += tp
            cell[1] += fp
            cell[2] += fn

        for gold, _pred in self.trigger_pairs:
            bump(f"{gold.event_type} trigger", tp=1)
        for event in self.unmatched_gold:
            bump(f"{event.event_type} trigger", fn=1)
        for event in self.unmatched_pred:
            bump(f"{event.event_type} trigger", fp=1)
        for arg_type, _g, _p in self.argument_pairs:
            bump(arg_type.value, tp=1)
        for arg_type, _g in self.unmatched_gold_args:
            bump(arg_type.value, fn=1)
        for arg_type, _p in self.unmatched_pred_args:
            bump(arg_type.value, fp=1)
        for gold_rel, _pred_rel in self.relation_pairs:
            bump(gold_rel.rel_type.value, tp=1)
        for rel in self.unmatched_gold_relations:
            bump(rel.rel_type.value, fn=1)
        for rel in self.unmatched_pred_relations:
            bump(rel.rel_type.value, fp=1)
        return out


def match_documents(
    gold: Document,
    pred: Document,
    strict: bool = False,
    assignment: str = "greedy",
) -> Matching:
    """Align predicted triggers, arguments, and relations against gold."""
    if gold.text != pred.text:
        raise TextMismatchError(
            f"TEXT_MISMATCH: {gold.doc_id!r} vs {pred.doc_id!r}"
        )
    matching = Matching()
    gold_events = document_order(gold.events)
    pred_events = document_order(pred.events)

    if assignment == "greedy":
        pairs = _greedy_triggers(gold_events, pred_events, strict)
    elif assignment == "optimal":
        pairs = _optimal_triggers(gold_events, pred_events, strict)
    else:
        raise ValueError(f"unknown assignment mode {assignment!r}")

    matched_gold = {g.id for g, _ in pairs}
    matched_pred = {p.id for _, p in pairs}
    matching.trigger_pairs = pairs
    matching.unmatched_gold = [g for g in gold_events if g.id not in matched_gold]
    matching.unmatched_pred = [p for p in pred_events if p.id not in matched_pred]

    for gold_event, pred_event in pairs:
        _match_arguments(matching, gold_event, pred_event, strict)
    for event in matching.unmatched_gold:
        for arg in event.arguments:
            matching.unmatched_gold_args.append((arg.arg_type, arg))
    for event in matching.unmatched_pred:
        for arg in event.arguments:
            matching.unmatched_pred_args.append((arg.arg_type, arg))

    _match_relations(matching, gold, pred, pairs)
    return matching


def _greedy_triggers(gold_events, pred_events, strict):
    pairs: list[tuple[Event, Event]] = []
    used: set[str] = set()
    for gold_event in gold_events:
        best = None
        best_key = None
        for pred_event in pred_events:
            if pred_event.id in used:
                continue
            if not triggers_equivalent(gold_event, pred_event, strict):
                continue
            overlap = gold_event.trigger.overlap_size(pred_event.trigger)
            key = (-overlap, pred_event.trigger.start, pred_event.trigger.end)
            if best_key is None or key < best_key:
                best_key = key
                best = pred_event
        if best is not None:
            used.add(best.id)
            pairs.append((gold_event, best))
    return pairs


def _optimal_triggers(gold_events, pred_events, strict):
    """Maximum-cardinality matching via augmenting paths (audit mode)."""
    adjacency = [
        [
            j
            for j, p in enumerate(pred_events)
            if triggers_equivalent(g, p, strict)
        ]
        for g in gold_events
    ]
    pred_owner: dict[int, int] = {}

    def augment(i: int, seen: set[int]) -> bool:
        for j in adjacency[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in pred_owner or augment(pred_owner[j], seen):
                pred_owner[j] = i
                return True
        return False

    for i in range(len(gold_events)):
        augment(i, set())
    return [
        (gold_events[i], pred_events[j]) for j, i in sorted(pred_owner.items(), key=lambda kv: kv[1])
    ]


def _match_arguments(matching, gold_event, pred_event, strict):
    for arg_type in ArgumentType:
        gold_args = list(gold_event.arguments_of(arg_type))
        pred_args = list(pred_event.arguments_of(arg_type))
        used: set[int] = set()
        for gold_arg in gold_args:
            found = None
            found_key = None
            for idx, pred_arg in enumerate(pred_args):
                if idx in used:
                    continue
                if arg_type.is_labeled:
                    if gold_arg.label != pred_arg.label:
                        continue
                    key = (0, idx)
                else:
                    assert gold_arg.span is not None and pred_arg.span is not None
                    if not spans_equivalent(gold_arg.span, pred_arg.span, strict):
                        continue
                    overlap = gold_arg.span.overlap_size(pred_arg.span)
                    key = (-overlap, pred_arg.span.start)
                if found_key is None or key < found_key:
                    found_key = key
                    found = idx
            if found is None:
                matching.unmatched_gold_args.append((arg_type, gold_arg))
            else:
                used.add(found)
                matching.argument_pairs.append(
                    (arg_type, gold_arg, pred_args[found])
                )
        for idx, pred_arg in enumerate(pred_args):
            if idx not in used:
                matching.unmatched_pred_args.append((arg_type, pred_arg))


def _match_relations(matching, gold, pred, trigger_pairs):
    gold_to_pred = {g.id: p.id for g, p in trigger_pairs}
    used: set[int] = set()
    pred_relations = list(pred.relations)
    for gold_rel in gold.relations:
        mapped_head = gold_to_pred.get(gold_rel.head)
        mapped_tail = gold_to_pred.get(gold_rel.tail)
        found = None
        for idx, pred_rel in enumerate(pred_relations):
            if idx in used:
                continue
            if (
                pred_rel.rel_type is gold_rel.rel_type
                and pred_rel.head == mapped_head
                and pred_rel.tail == mapped_tail
            ):
                found = idx
                break
        if found is None:
            matching.unmatched_gold_relations.append(gold_rel)
        else:
            used.add(found)
            matching.relation_pairs.append((gold_rel, pred_relations[found]))
    for idx, pred_rel in enumerate(pred_relations):
        if idx not in used:
            matching.unmatched_pred_relations.append(pred_rel)


@dataclass(frozen=True)
class CategoryScore:
    name: str
    kind: str  # trigger | argument | relation | overall
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


_TRIGGER_ROWS = tuple(f"{t} trigger" for t in (EventType.DRUG, EventType.PROBLEM))
_ARGUMENT_ROWS = tuple(t.value for t in ARGUMENT_ORDER)
_RELATION_ROWS = tuple(t.value for t in RelationType)


@dataclass(frozen=True)
class ScoreReport:
    """Per-category and micro-averaged counts with derived P/R/F1."""

    categories: tuple[CategoryScore, ...]

    def get(self, name: str) -> CategoryScore | None:
        for category in self.categories:
            if category.name == name:
                return category
        return None

    def __getitem__(self, name: str) -> CategoryScore:
        category = self.get(name)
        if category is None:
            raise KeyError(name)
        return category

    @property
    def overall(self) -> CategoryScore:
        return self[OVERALL]

    def to_records(self) -> list[dict]:
        return [c.to_record() for c in self.categories]

    def render_table(self) -> str:
        width = max(len(c.name) for c in self.categories) + 2
        lines = [
            f"{'CATEGORY':<{width}}{'TP':>7}{'FP':>7}{'FN':>7}"
            f"{'P':>8}{'R':>8}{'F1':>8}"
        ]
        for c in self.categories:
            lines.append(
                f"{c.name:<{width}}{c.tp:>7}{c.fp:>7}{c.fn:>7}"
                f"{c.precision:>8.3f}{c.recall:>8.3f}{c.f1:>8.3f}"
            )
        return "\n".join(lines)

    @staticmethod
    def from_counts(counts: dict[str, list[int]]) -> ScoreReport:
        categories: list[CategoryScore] = []

        def total(names) -> tuple[int, int, int]:
            tp = sum(counts.get(n, [0, 0, 0])[0] for n in names)
            fp = sum(counts.get(n, [0, 0, 0])[1] for n in names)
            fn = sum(counts.get(n, [0, 0, 0])[2] for n in names)
            return tp, fp, fn

        for name in _TRIGGER_ROWS:
            if name in counts:
                categories.append(CategoryScore(name, "trigger", *counts[name]))
        for name in _ARGUMENT_ROWS:
            if name in counts:
                categories.append(CategoryScore(name, "argument", *counts[name]))
        categories.append(
            CategoryScore(
                EVENTS_OVERALL, "overall", *total(_TRIGGER_ROWS + _ARGUMENT_ROWS)
            )
        )
        for name in _RELATION_ROWS:
            if name in counts:
                categories.append(CategoryScore(name, "relation", *counts[name]))
        categories.append(
            CategoryScore(RELATIONS_OVERALL, "overall", *total(_RELATION_ROWS))
        )
        all_rows = _TRIGGER_ROWS + _ARGUMENT_ROWS + _RELATION_ROWS
        overall = CategoryScore(OVERALL, "overall", *total(all_rows))
        categories.append(overall)

        # Micro counts must equal the category sums they pool.
        assert overall.tp == sum(c.tp for c in categories if c.kind != "overall")
        assert overall.fp == sum(c.fp for c in categories if c.kind != "overall")
        assert overall.fn == sum(c.fn for c in categories if c.kind != "overall")
        return ScoreReport(categories=tuple(categories))


def _align(gold: list[Document], pred: list[Document]) -> list[tuple[Document, Document]]:
    gold_ids = Counter(d.doc_id for d in gold)
    pred_ids = Counter(d.doc_id for d in pred)
    if max(gold_ids.values(), default=0) > 1 or max(pred_ids.values(), default=0) > 1:
        raise UnalignedCorporaError("UNALIGNED_CORPORA: duplicate doc_id")
    if gold_ids != pred_ids:
        missing = sorted((gold_ids - pred_ids) | (pred_ids - gold_ids))
        raise UnalignedCorporaError(f"UNALIGNED_CORPORA: unpaired doc_id(s) {missing}")
    by_id = {d.doc_id: d for d in pred}
    return [(g, by_id[g.doc_id]) for g in sorted(gold, key=lambda d: d.doc_id)]


def score_pairs(
    pairs,
    strict: bool = False,
    assignment: str = "greedy",
) -> ScoreReport:
    """Score an iterable of aligned (gold, pred) documents; streams."""
    totals: dict[str, list[int]] = {}
    for gold_doc, pred_doc in pairs:
        matching = match_documents(gold_doc, pred_doc, strict, assignment)
        for key, (tp, fp, fn) in matching.counts().items():
            cell = totals.setdefault(key, [0, 0, 0])
            cell[0] += tp
            cell[1] += fp
            cell[2] += fn
    return ScoreReport.from_counts(totals)


def score(
    gold: list[Document],
    pred: list[Document],
    strict: bool = False,
    assignment: str = "greedy",
) -> ScoreReport:
    """Corpus-level scores: counts pooled over all notes, then P/R/F1."""
    return score_pairs(_align(gold, pred), strict, assignment)


def iaa(
    annotator_a: list[Document],
    annotator_b: list[Document],
    strict: bool = False,
) -> ScoreReport:
    """Inter-annotator agreement: one annotator scored against the other.

    The F1 column is the agreement; swapping annotators swaps precision and
    recall and leaves F1 unchanged.
    """
    return score(annotator_a, annotator_b, strict=strict)


def per_note_f1(
    gold: list[Document],
    pred: list[Document],
    category: str = OVERALL,
    strict: bool = False,
) -> list[tuple[str, float]]:
    """Per-note F1 for one report row; the sample unit for significance tests."""
    out = []
    for gold_doc, pred_doc in _align(gold, pred):
        matching = match_documents(gold_doc, pred_doc, strict)
        report = ScoreReport.from_counts(matching.counts())
        row = report.get(category)
        out.append((gold_doc.doc_id, row.f1 if row else 0.0))
    return out
