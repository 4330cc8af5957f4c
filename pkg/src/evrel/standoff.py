"""Reader/writer for paired note-text and standoff annotation files.

Record grammar (tab between the id column and the body, single spaces inside):

    T<id>\t<Type> <start> <end>\t<text>     span (trigger or argument span)
    E<id>\t<EventType>:T<tid> <Arg>:T<aid> ...   event structure
    A<id>\t<ArgName> E<eid> <value>         subtype label attached to an event
    R<id>\t<RelType> Arg1:E<head> Arg2:E<tail>   relation

Repeated argument names on an E-line are disambiguated with numeric suffixes
(Characteristics2, Characteristics3, ...). Offsets count Unicode scalar
values. Parsing is total: the result is either a Document or a
:class:`StandoffParseError` locating every problem, never a silent partial.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .model import (
    ARGUMENT_ORDER,
    AnnotationError,
    Argument,
    ArgumentType,
    Document,
    Event,
    EventType,
    RelationType,
    Relation,
    Span,
    argument_sort_key,
)
from .segmentation import SentenceSplitter, segment_sentences


@dataclass(frozen=True, slots=True)
class StandoffFilePair:
    """In-memory `.txt` + `.ann` contents for one note."""

    text: str
    ann: str


@dataclass(frozen=True, slots=True)
class ParseIssue:
    code: str
    line_no: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line_no}: {self.code}: {self.message}"


class StandoffParseError(ValueError):
    def __init__(self, doc_id: str, issues: list[ParseIssue]):
        self.doc_id = doc_id
        self.issues = issues
        details = "; ".join(str(i) for i in issues[:5])
        more = f" (+{len(issues) - 5} more)" if len(issues) > 5 else ""
        super().__init__(f"{doc_id}: {details}{more}")


class UnwritableSpanError(ValueError):
    """A span's text does not match its offsets (code UNWRITABLE_SPAN)."""


_T_LINE = re.compile(r"^T(\d+)\t(\S+) (\d+) (\d+)\t(.*)$")
_E_LINE = re.compile(r"^E(\d+)\t(.+)$")
_A_LINE = re.compile(r"^A(\d+)\t(\S+) E(\d+) (\S+)$")
_R_LINE = re.compile(r"^R(\d+)\t(\S+) Arg1:E(\d+) Arg2:E(\d+)$")
_SUFFIX = re.compile(r"^([A-Za-z]+?)(\d*)$")


def _column_text(text: str) -> str:
    # The ann text column is line-oriented: newlines/tabs map to spaces.
    return text.replace("\n", " ").replace("\t", " ").replace("\r", " ")


def parse_standoff(
    pair: StandoffFilePair,
    splitter: SentenceSplitter = segment_sentences,
    doc_id: str = "doc",
    source: str = "gold",
) -> Document:
    """Parse a file pair into a Document, reproducing T-line offsets exactly."""
    issues: list[ParseIssue] = []
    spans: dict[str, tuple[str, Span]] = {}
    events: list[Event] = []
    event_args: dict[str, list[tuple[ArgumentType, str, int]]] = {}
    event_meta: dict[str, tuple[EventType, str, int]] = {}
    relations: list[Relation] = []
    labels: list[tuple[str, ArgumentType, str, int]] = []

    for line_no, raw in enumerate(pair.ann.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        kind = line[0]
        if kind == "T":
            _parse_t(line, line_no, pair.text, spans, issues)
        elif kind == "E":
            _parse_e(line, line_no, event_meta, event_args, issues)
        elif kind == "A":
            _parse_a(line, line_no, labels, issues)
        elif kind == "R":
            _parse_r(line, line_no, relations, issues)
        else:
            issues.append(
                ParseIssue("MALFORMED_LINE", line_no, f"unknown record kind {kind!r}")
            )

    for eid, (event_type, trigger_ref, line_no) in event_meta.items():
        trigger = spans.get(trigger_ref)
        if trigger is None:
            issues.append(
                ParseIssue(
                    "DANGLING_REFERENCE", line_no, f"E{eid} trigger {trigger_ref} undefined"
                )
            )
            continue
        args: list[Argument] = []
        for arg_type, span_ref, arg_line in event_args.get(eid, []):
            entry = spans.get(span_ref)
            if entry is None:
                issues.append(
                    ParseIssue(
                        "DANGLING_REFERENCE",
                        arg_line,
                        f"E{eid} argument {span_ref} undefined",
                    )
                )
                continue
            if arg_type.is_labeled:
                label = _take_label(labels, eid, arg_type)
                if label is None:
                    issues.append(
                        ParseIssue(
                            "MISSING_LABEL",
                            arg_line,
                            f"E{eid} has a {arg_type} span but no A-line value",
                        )
                    )
                    continue
                args.append(Argument(arg_type, span=entry[1], label=label))
            else:
                args.append(Argument(arg_type, span=entry[1]))
        for _, arg_type, value, _line in [l for l in labels if l[0] == eid]:
            args.append(Argument(arg_type, label=value))
        labels = [l for l in labels if l[0] != eid]
        events.append(Event(f"E{eid}", event_type, trigger[1], tuple(args)))

    for eid, arg_type, _value, line_no in labels:
        issues.append(
            ParseIssue(
                "DANGLING_REFERENCE", line_no, f"A-line {arg_type} targets missing E{eid}"
            )
        )
    known = {e.id for e in events}
    for rel in relations:
        if rel.head not in known or rel.tail not in known:
            issues.append(
                ParseIssue(
                    "DANGLING_REFERENCE",
                    0,
                    f"relation {rel.rel_type} references undefined event",
                )
            )
    if issues:
        raise StandoffParseError(doc_id, issues)
    return Document(
        doc_id=doc_id,
        text=pair.text,
        sentences=tuple(splitter(pair.text)),
        events=tuple(events),
        relations=tuple(relations),
        source=source,
    )


def _parse_t(line, line_no, text, spans, issues) -> None:
    body = line.split("\t")
    if len(body) >= 2 and ";" in body[1]:
        issues.append(
            ParseIssue(
                "DISCONTINUOUS_SPAN",
                line_no,
                "fragmented spans are not supported; annotate a contiguous span",
            )
        )
        return
    m = _T_LINE.match(line)
    if not m:
        issues.append(ParseIssue("MALFORMED_LINE", line_no, f"bad T-line {line!r}"))
        return
    tid, type_name, start_s, end_s, surface = m.groups()
    start, end = int(start_s), int(end_s)
    if start >= end or end > len(text):
        issues.append(
            ParseIssue("MALFORMED_LINE", line_no, f"bad offsets {start}..{end}")
        )
        return
    actual = text[start:end]
    if _column_text(actual) != surface:
        issues.append(
            ParseIssue(
                "OFFSET_TEXT_MISMATCH",
                line_no,
                f"T{tid} text {surface!r} != note substring {actual!r}",
            )
        )
        return
    if f"T{tid}" in spans:
        issues.append(ParseIssue("MALFORMED_LINE", line_no, f"duplicate id T{tid}"))
        return
    spans[f"T{tid}"] = (type_name, Span(start, end, actual))


def _parse_e(line, line_no, event_meta, event_args, issues) -> None:
    m = _E_LINE.match(line)
    if not m:
        issues.append(ParseIssue("MALFORMED_LINE", line_no, f"bad E-line {line!r}"))
        return
    eid, body = m.groups()
    parts = body.split(" ")
    head = parts[0].split(":")
    if len(head) != 2 or not head[1].startswith("T"):
        issues.append(
            ParseIssue("MALFORMED_LINE", line_no, f"bad event head {parts[0]!r}")
        )
        return
    try:
        event_type = EventType(head[0])
    except ValueError:
        issues.append(
            ParseIssue("MALFORMED_LINE", line_no, f"unknown event type {head[0]!r}")
        )
        return
    if eid in event_meta:
        issues.append(ParseIssue("MALFORMED_LINE", line_no, f"duplicate id E{eid}"))
        return
    event_meta[eid] = (event_type, head[1], line_no)
    for part in parts[1:]:
        if not part:
            continue
        pieces = part.split(":")
        suffix_match = _SUFFIX.match(pieces[0]) if len(pieces) == 2 else None
        if not suffix_match or not pieces[1].startswith("T"):
            issues.append(
                ParseIssue("MALFORMED_LINE", line_no, f"bad argument {part!r}")
            )
            continue
        try:
            arg_type = ArgumentType(suffix_match.group(1))
        except ValueError:
            issues.append(
                ParseIssue(
                    "MALFORMED_LINE", line_no, f"unknown argument name {pieces[0]!r}"
                )
            )
            continue
        event_args.setdefault(eid, []).append((arg_type, pieces[1], line_no))


def _parse_a(line, line_no, labels, issues) -> None:
    m = _A_LINE.match(line)
    if not m:
        issues.append(ParseIssue("MALFORMED_LINE", line_no, f"bad A-line {line!r}"))
        return
    _aid, name, eid, value = m.groups()
    try:
        arg_type = ArgumentType(name)
    except ValueError:
        issues.append(
            ParseIssue("MALFORMED_LINE", line_no, f"unknown attribute name {name!r}")
        )
        return
    if not arg_type.is_labeled:
        issues.append(
            ParseIssue("MALFORMED_LINE", line_no, f"{name} is not a labeled argument")
        )
        return
    try:
        Argument(arg_type, label=value)
    except AnnotationError as exc:
        issues.append(ParseIssue("MALFORMED_LINE", line_no, str(exc)))
        return
    labels.append((eid, arg_type, value, line_no))


def _parse_r(line, line_no, relations, issues) -> None:
    m = _R_LINE.match(line)
    if not m:
        issues.append(ParseIssue("MALFORMED_LINE", line_no, f"bad R-line {line!r}"))
        return
    _rid, name, head, tail = m.groups()
    try:
        rel_type = RelationType(name)
    except ValueError:
        issues.append(
            ParseIssue("MALFORMED_LINE", line_no, f"unknown relation type {name!r}")
        )
        return
    relations.append(Relation(rel_type, f"E{head}", f"E{tail}"))


def _take_label(labels, eid, arg_type) -> str | None:
    for i, (label_eid, label_type, value, _line) in enumerate(labels):
        if label_eid == eid and label_type == arg_type:
            labels.pop(i)
            return value
    return None


def write_standoff(doc: Document, strict: bool = False) -> StandoffFilePair:
    """Render a Document as a file pair with stable document-order ids.

    Writing the same Document twice yields byte-identical output, and
    ``parse_standoff(write_standoff(doc))`` equals ``doc`` up to id renaming.
    With ``strict`` set, schema errors reported by ``validate_document``
    abort the write.
    """
    if strict:
        from .validation import has_errors, validate_document

        violations = validate_document(doc)
        if has_errors(violations):
            n = sum(1 for v in violations if v.severity.value == "error")
            raise UnwritableSpanError(
                f"{doc.doc_id}: {n} schema error(s); refusing to write in strict mode"
            )

    span_ids: dict[tuple[str, int, int], int] = {}
    t_lines: list[str] = []

    def span_ref(type_name: str, span: Span) -> str:
        actual = doc.text[span.start : span.end]
        if actual != span.text:
            raise UnwritableSpanError(
                f"{doc.doc_id}: span [{span.start},{span.end}) text {span.text!r} "
                f"does not match the note"
            )
        key = (type_name, span.start, span.end)
        if key not in span_ids:
            span_ids[key] = len(span_ids) + 1
            t_lines.append(
                f"T{span_ids[key]}\t{type_name} {span.start} {span.end}\t"
                f"{_column_text(span.text)}"
            )
        return f"T{span_ids[key]}"

    event_ids: dict[str, int] = {}
    e_lines: list[str] = []
    a_records: list[tuple[str, int, str]] = []
    ordered = sorted(
        doc.events, key=lambda e: (e.trigger.start, e.trigger.end, e.id)
    )
    for number, event in enumerate(ordered, start=1):
        event_ids[event.id] = number
        parts = [f"{event.event_type}:{span_ref(str(event.event_type), event.trigger)}"]
        counts: dict[ArgumentType, int] = {}
        for arg_type in ARGUMENT_ORDER:
            for arg in sorted(event.arguments_of(arg_type), key=argument_sort_key):
                if arg.span is not None:
                    counts[arg_type] = counts.get(arg_type, 0) + 1
                    suffix = "" if counts[arg_type] == 1 else str(counts[arg_type])
                    parts.append(
                        f"{arg_type}{suffix}:{span_ref(str(arg_type), arg.span)}"
                    )
                if arg.label is not None:
                    a_records.append((str(arg_type), number, arg.label))
        e_lines.append(f"E{number}\t{' '.join(parts)}")

    a_lines = [
        f"A{i}\t{name} E{eid} {value}"
        for i, (name, eid, value) in enumerate(a_records, start=1)
    ]
    rel_sorted = sorted(
        doc.relations,
        key=lambda r: (event_ids.get(r.head, 0), event_ids.get(r.tail, 0), r.rel_type.value),
    )
    r_lines = []
    for i, rel in enumerate(rel_sorted, start=1):
        if rel.head not in event_ids or rel.tail not in event_ids:
            raise UnwritableSpanError(
                f"{doc.doc_id}: relation {rel.rel_type} references a missing event"
            )
        r_lines.append(
            f"R{i}\t{rel.rel_type} Arg1:E{event_ids[rel.head]} Arg2:E{event_ids[rel.tail]}"
        )

    lines = t_lines + e_lines + a_lines + r_lines
    ann = "\n".join(lines) + ("\n" if lines else "")
    return StandoffFilePair(text=doc.text, ann=ann)


def read_pair(
    txt_path: Path,
    ann_path: Path,
    splitter: SentenceSplitter = segment_sentences,
    source: str = "gold",
) -> Document:
    pair = StandoffFilePair(
        text=txt_path.read_text(encoding="utf-8"),
        ann=ann_path.read_text(encoding="utf-8"),
    )
    return parse_standoff(pair, splitter, doc_id=txt_path.stem, source=source)


def iter_corpus_dir(
    corpus_dir: Path,
    splitter: SentenceSplitter = segment_sentences,
    source: str = "gold",
):
    """Yield `.txt`/`.ann` pairs one note at a time, matched by basename."""
    corpus_dir = Path(corpus_dir)
    txt_files = sorted(corpus_dir.glob("*.txt"))
    if not txt_files:
        raise FileNotFoundError(f"no .txt files in {corpus_dir}")
    for txt_path in txt_files:
        ann_path = txt_path.with_suffix(".ann")
        if not ann_path.exists():
            raise FileNotFoundError(f"missing annotation file {ann_path}")
        yield read_pair(txt_path, ann_path, splitter, source)


def read_corpus_dir(
    corpus_dir: Path,
    splitter: SentenceSplitter = segment_sentences,
    source: str = "gold",
) -> list[Document]:
    return list(iter_corpus_dir(corpus_dir, splitter, source))


def write_corpus_dir(docs: list[Document], out_dir: Path, strict: bool = False) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for doc in docs:
        pair = write_standoff(doc, strict=strict)
        (out_dir / f"{doc.doc_id}.txt").write_text(pair.text, encoding="utf-8")
        (out_dir / f"{doc.doc_id}.ann").write_text(pair.ann, encoding="utf-8")
