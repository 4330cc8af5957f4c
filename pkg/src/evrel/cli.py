"""Command-line entry point: validate, score, iaa, sigtest, windows, encode,
decode, and gen subcommands over directories of `.txt`/`.ann` note pairs.

Exit codes: 0 success, 1 validation or score-quality failure, 2 I/O or usage
error. Commands process notes one at a time so peak memory stays independent
of corpus size, and every command that writes files also writes a run
manifest next to its outputs. The default seed comes from EVREL_SEED when
set.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .codec import (
    AnswerParseError,
    answer_letter,
    build_qa_prompt,
    decode_events,
    decode_marker_output,
    encode_events,
    encode_marker_input,
    encode_marker_targets,
    pair_kind_for,
    parse_qa_answer,
)
from .model import Document, Relation
from .scoring import (
    OVERALL,
    ScoreReport,
    TextMismatchError,
    UnalignedCorporaError,
    match_documents,
)
from .significance import DEFAULT_ITERATIONS, MisalignedSamplesError, bootstrap_test
from .standoff import (
    StandoffParseError,
    iter_corpus_dir,
    read_pair,
    write_standoff,
)
from .synth import GenConfig, InvalidConfigError, iter_corpus
from .validation import Severity, validate_document
from .windows import (
    CoverageStats,
    MAX_WINDOW_SENTENCES,
    MAX_WINDOW_TOKENS,
    coverage_report,
    enumerate_candidate_pairs,
    event_sentence_map,
    validity_filter,
    window_for_range,
)

OK, FAIL, USAGE = 0, 1, 2

_INPUT_ERRORS = (
    FileNotFoundError,
    NotADirectoryError,
    OSError,
    StandoffParseError,
    UnalignedCorporaError,
    TextMismatchError,
    json.JSONDecodeError,
)


def _default_seed() -> int:
    return int(os.environ.get("EVREL_SEED", "0"))


def _write_manifest(out_path: Path, command: str, args: argparse.Namespace,
                    started: float, inputs: list[str],
                    extra: dict | None = None) -> None:
    digest_src = json.dumps(
        {k: str(v) for k, v in sorted(vars(args).items()) if k != "func"},
        sort_keys=True,
    )
    manifest = {
        "command": command,
        "inputs": inputs,
        "config_digest": hashlib.sha256(digest_src.encode("utf-8")).hexdigest(),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "elapsed_s": round(time.perf_counter() - started, 3),
    }
    if extra:
        manifest.update(extra)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _iter_doc_pairs(gold_dir: str, pred_dir: str):
    """Aligned (gold, pred) documents, parsed lazily note by note."""
    gold_names = {p.stem for p in Path(gold_dir).glob("*.txt")}
    pred_names = {p.stem for p in Path(pred_dir).glob("*.txt")}
    if not gold_names:
        raise FileNotFoundError(f"no .txt files in {gold_dir}")
    if gold_names != pred_names:
        unpaired = sorted(gold_names ^ pred_names)
        raise UnalignedCorporaError(f"UNALIGNED_CORPORA: unpaired doc_id(s) {unpaired}")
    for name in sorted(gold_names):
        gold = read_pair(
            Path(gold_dir) / f"{name}.txt", Path(gold_dir) / f"{name}.ann"
        )
        pred = read_pair(
            Path(pred_dir) / f"{name}.txt", Path(pred_dir) / f"{name}.ann",
            source="predicted",
        )
        yield gold, pred


def cmd_validate(args) -> int:
    started = time.perf_counter()
    n_errors = n_warnings = n_docs = 0
    lines: list[str] = []
    try:
        for doc in iter_corpus_dir(Path(args.corpus_dir)):
            n_docs += 1
            for v in validate_document(doc):
                if v.severity is Severity.ERROR:
                    n_errors += 1
                else:
                    n_warnings += 1
                line = (
                    f"{doc.doc_id}\t{v.severity}\t{v.code}\t{v.element}\t{v.message}"
                )
                print(line)
                if args.report:
                    lines.append(line)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    print(f"checked {n_docs} note(s): {n_errors} error(s), {n_warnings} warning(s)")
    if args.report:
        out = Path(args.report)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("".join(l + "\n" for l in lines), encoding="utf-8")
        _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "validate",
                        args, started, [args.corpus_dir])
    if n_errors or (args.strict and n_warnings):
        return FAIL
    return OK


def _emit_report(report: ScoreReport, out_arg: str | None, command: str,
                 args, started, inputs) -> None:
    print(report.render_table())
    if out_arg:
        out = Path(out_arg)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(
            json.dumps(report.to_records(), indent=2) + "\n", encoding="utf-8"
        )
        out.with_suffix(".txt").write_text(
            report.render_table() + "\n", encoding="utf-8"
        )
        _write_manifest(out.with_suffix(".manifest.json"), command, args, started,
                        inputs)


def _score_dirs(gold_dir: str, pred_dir: str, strict: bool,
                per_note_path: str | None):
    """One streaming pass producing the corpus report and per-note rows."""
    totals: dict[str, list[int]] = {}
    per_note: list[tuple[str, float]] = []
    for gold_doc, pred_doc in _iter_doc_pairs(gold_dir, pred_dir):
        matching = match_documents(gold_doc, pred_doc, strict=strict)
        counts = matching.counts()
        for key, (tp, fp, fn) in counts.items():
            cell = totals.setdefault(key, [0, 0, 0])
            cell[0] += tp
            cell[1] += fp
            cell[2] += fn
        if per_note_path:
            note_report = ScoreReport.from_counts(counts)
            row = note_report.get(OVERALL)
            per_note.append((gold_doc.doc_id, row.f1 if row else 0.0))
    return ScoreReport.from_counts(totals), per_note


def cmd_score(args) -> int:
    started = time.perf_counter()
    try:
        report, per_note = _score_dirs(
            args.gold_dir, args.pred_dir, args.strict_spans, args.per_note
        )
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    _emit_report(report, args.report, "score", args, started,
                 [args.gold_dir, args.pred_dir])
    if args.per_note:
        out = Path(args.per_note)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(
            "".join(f"{doc_id}\t{f1:.6f}\n" for doc_id, f1 in per_note),
            encoding="utf-8",
        )
    if args.min_f1 is not None and report.overall.f1 < args.min_f1:
        print(f"overall F1 {report.overall.f1:.4f} below threshold {args.min_f1}",
              file=sys.stderr)
        return FAIL
    return OK


def cmd_iaa(args) -> int:
    started = time.perf_counter()
    try:
        report, _ = _score_dirs(args.a_dir, args.b_dir, strict=False,
                                per_note_path=None)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    _emit_report(report, args.report, "iaa", args, started,
                 [args.a_dir, args.b_dir])
    return OK


def _read_per_note_scores(path: str) -> list[tuple[str, float]]:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc_id, value = line.split("\t")
        rows.append((doc_id, float(value)))
    return rows


def cmd_sigtest(args) -> int:
    started = time.perf_counter()
    try:
        a = _read_per_note_scores(args.scores_a)
        b = _read_per_note_scores(args.scores_b)
        result = bootstrap_test(a, b, iterations=args.iterations, seed=args.seed)
    except (MisalignedSamplesError, ValueError, *_INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    record = result.to_record()
    print(json.dumps(record, indent=2))
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
        _write_manifest(out.with_suffix(".manifest.json"), "sigtest", args,
                        started, [args.scores_a, args.scores_b])
    return OK


def cmd_windows(args) -> int:
    started = time.perf_counter()
    stats = CoverageStats()
    n_pairs = 0
    excluded = 0
    sink = open(args.out, "w", encoding="utf-8") if args.out else None
    try:
        for doc in iter_corpus_dir(Path(args.corpus_dir)):
            enumeration = enumerate_candidate_pairs(
                doc, max_sentences=args.max_sent, max_tokens=args.max_tokens
            )
            excluded += enumeration.excluded
            for head, tail, window in enumeration.pairs:
                n_pairs += 1
                if sink:
                    sink.write(json.dumps({
                        "doc_id": doc.doc_id,
                        "head": head.id,
                        "tail": tail.id,
                        "first": window.first,
                        "last": window.last,
                        "token_count": window.token_count,
                        "intra_sentence": window.intra_sentence,
                    }) + "\n")
            stats = stats.merge(coverage_report(
                [doc], max_sentences=args.max_sent, max_tokens=args.max_tokens
            ))
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    finally:
        if sink:
            sink.close()
    print(json.dumps(stats.to_record(), indent=2))
    print(f"candidate pairs: {n_pairs} (excluded oversize: {excluded})")
    if args.out:
        out = Path(args.out)
        out.with_suffix(".coverage.json").write_text(
            json.dumps(stats.to_record(), indent=2) + "\n", encoding="utf-8"
        )
        _write_manifest(out.with_suffix(".manifest.json"), "windows", args,
                        started, [args.corpus_dir])
    return OK


def cmd_encode(args) -> int:
    started = time.perf_counter()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    encoders = {
        "events": _encode_events_doc,
        "marker": _encode_marker_doc,
        "qa": _encode_qa_doc,
    }
    n_records = 0
    try:
        with open(out, "w", encoding="utf-8") as sink:
            for doc in iter_corpus_dir(Path(args.corpus_dir)):
                for record in encoders[args.format](doc, args):
                    sink.write(json.dumps(record) + "\n")
                    n_records += 1
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    _write_manifest(out.with_suffix(".manifest.json"), f"encode:{args.format}",
                    args, started, [args.corpus_dir], {"records": n_records})
    print(f"wrote {n_records} record(s) to {out}")
    return OK


def _encode_events_doc(doc: Document, args) -> list[dict]:
    smap = event_sentence_map(doc)
    by_sentence: dict[int, list] = {}
    for event in doc.events:
        by_sentence.setdefault(smap[event.id], []).append(event)
    return [
        {
            "doc_id": doc.doc_id,
            "sentence": idx,
            "input": sentence.text,
            "target": encode_events(sentence, by_sentence.get(idx, [])),
        }
        for idx, sentence in enumerate(doc.sentences)
    ]


def _unique_windows(doc: Document, args):
    enumeration = enumerate_candidate_pairs(
        doc, max_sentences=args.max_sent, max_tokens=args.max_tokens
    )
    seen: dict[tuple[int, int], object] = {}
    for _head, _tail, window in enumeration.pairs:
        seen.setdefault((window.first, window.last), window)
    return enumeration, [seen[key] for key in sorted(seen)]


def _encode_marker_doc(doc: Document, args) -> list[dict]:
    _enumeration, windows = _unique_windows(doc, args)
    records = []
    for window in windows:
        rendered, issues = encode_marker_input(window)
        valid_relations = [
            rel for rel in doc.relations if validity_filter(window, rel)
        ]
        records.append(
            {
                "doc_id": doc.doc_id,
                "first": window.first,
                "last": window.last,
                "input": rendered,
                "target": encode_marker_targets(window, valid_relations),
                "issues": [str(i) for i in issues],
            }
        )
    return records


def _encode_qa_doc(doc: Document, args) -> list[dict]:
    enumeration, _windows = _unique_windows(doc, args)
    gold = {(rel.head, rel.tail): rel for rel in doc.relations}
    records = []
    for head, tail, window in enumeration.pairs:
        prompt = build_qa_prompt(head, tail, window)
        relation = gold.get((head.id, tail.id))
        if relation is None and prompt.pair_kind.value == "problem_problem":
            relation = gold.get((tail.id, head.id))
        letter = answer_letter(relation, prompt.pair_kind, head, tail)
        records.append(
            {
                "doc_id": doc.doc_id,
                "head": head.id,
                "tail": tail.id,
                "pair_kind": prompt.pair_kind.value,
                "prompt": prompt.text,
                "answer": f"({letter})",
            }
        )
    return records


def cmd_decode(args) -> int:
    started = time.perf_counter()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    decoders = {
        "events": _decode_events_doc,
        "marker": _decode_marker_doc,
        "qa": _decode_qa_doc,
    }
    n_docs = 0
    n_issues = 0
    try:
        outputs_by_doc: dict[str, list[dict]] = {}
        for line in Path(args.outputs).read_text(encoding="utf-8").splitlines():
            if line.strip():
                record = json.loads(line)
                outputs_by_doc.setdefault(record["doc_id"], []).append(record)
        seen_ids: set[str] = set()
        for doc in iter_corpus_dir(Path(args.corpus_dir)):
            seen_ids.add(doc.doc_id)
            predicted, issues = decoders[args.format](
                doc, outputs_by_doc.get(doc.doc_id, [])
            )
            n_docs += 1
            n_issues += len(issues)
            pair = write_standoff(predicted)
            (out_dir / f"{doc.doc_id}.txt").write_text(pair.text, encoding="utf-8")
            (out_dir / f"{doc.doc_id}.ann").write_text(pair.ann, encoding="utf-8")
            _append_issues(out_dir, doc.doc_id, issues, reset=n_docs == 1)
        unknown = sorted(set(outputs_by_doc) - seen_ids)
        if unknown:
            print(f"warning: outputs reference unknown note(s) {unknown}",
                  file=sys.stderr)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    _write_manifest(out_dir / "manifest.json", f"decode:{args.format}", args,
                    started, [args.corpus_dir, args.outputs],
                    {"notes": n_docs, "issues": n_issues})
    print(f"decoded {n_docs} note(s), {n_issues} issue(s)")
    return OK


def _append_issues(out_dir: Path, doc_id: str, issues: list[dict],
                   reset: bool) -> None:
    path = out_dir / "decode_issues.jsonl"
    mode = "w" if reset else "a"
    with open(path, mode, encoding="utf-8") as sink:
        for issue in issues:
            sink.write(json.dumps({"doc_id": doc_id, **issue}) + "\n")


def _decode_events_doc(doc: Document, outputs: list[dict]):
    events = []
    issues = []
    for record in sorted(outputs, key=lambda r: r["sentence"]):
        sentence = doc.sentences[record["sentence"]]
        decoded, decode_issues = decode_events(sentence, record["output"])
        events.extend(decoded)
        issues.extend(
            {"sentence": record["sentence"], "issue": str(i)}
            for i in decode_issues
        )
    renumbered = tuple(
        replace(e, id=f"E{i}") for i, e in enumerate(events, start=1)
    )
    predicted = replace(doc, events=renumbered, relations=(), source="predicted")
    return predicted, issues


def _decode_marker_doc(doc: Document, outputs: list[dict]):
    relations: list[Relation] = []
    issues = []
    for record in sorted(outputs, key=lambda r: (r["first"], r["last"])):
        window = window_for_range(doc, record["first"], record["last"])
        decoded, decode_issues = decode_marker_output(record["output"], window)
        relations.extend(rel for rel in decoded if validity_filter(window, rel))
        issues.extend(
            {"window": [window.first, window.last], "issue": str(i)}
            for i in decode_issues
        )
    predicted = replace(
        doc, relations=tuple(dict.fromkeys(relations)), source="predicted"
    )
    return predicted, issues


def _decode_qa_doc(doc: Document, outputs: list[dict]):
    relations: list[Relation] = []
    issues = []
    for record in sorted(outputs, key=lambda r: (r["head"], r["tail"])):
        head = doc.event_by_id(record["head"])
        tail = doc.event_by_id(record["tail"])
        if head is None or tail is None:
            issues.append({"issue": f"unknown event id in {record}"})
            continue
        try:
            relation = parse_qa_answer(
                record["answer"], pair_kind_for(head, tail), head, tail
            )
        except AnswerParseError as exc:
            issues.append({"head": head.id, "tail": tail.id, "issue": str(exc)})
            continue
        if relation is not None:
            relations.append(relation)
    predicted = replace(
        doc, relations=tuple(dict.fromkeys(relations)), source="predicted"
    )
    return predicted, issues


def cmd_gen(args) -> int:
    started = time.perf_counter()
    out_dir = Path(args.out_dir)
    digest = hashlib.sha256()
    n_docs = 0
    try:
        cfg = GenConfig(seed=args.seed, n_notes=args.n_notes)
        if args.config:
            overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
            cfg = _config_with_overrides(cfg, overrides)
        out_dir.mkdir(parents=True, exist_ok=True)
        for doc in iter_corpus(cfg):
            pair = write_standoff(doc)
            (out_dir / f"{doc.doc_id}.txt").write_text(pair.text, encoding="utf-8")
            (out_dir / f"{doc.doc_id}.ann").write_text(pair.ann, encoding="utf-8")
            digest.update(pair.text.encode("utf-8"))
            digest.update(pair.ann.encode("utf-8"))
            n_docs += 1
    except (InvalidConfigError, TypeError, *_INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    _write_manifest(out_dir / "manifest.json", "gen", args, started, [],
                    {"notes": n_docs, "content_sha256": digest.hexdigest()})
    print(f"generated {n_docs} note(s) in {out_dir}")
    return OK


def _config_with_overrides(cfg: GenConfig, overrides: dict) -> GenConfig:
    simple = {
        k: v
        for k, v in overrides.items()
        if k
        in {
            "n_notes",
            "seed",
            "problem_fraction",
            "intra_sentence_fraction",
            "oversize_relation_fraction",
            "extra_characteristics_prob",
        }
    }
    for key in ("sentences_per_note", "relations_per_note"):
        if key in overrides:
            simple[key] = tuple(overrides[key])
    unknown = set(overrides) - set(simple)
    if unknown:
        raise InvalidConfigError(f"unsupported config key(s): {sorted(unknown)}")
    return replace(cfg, **simple)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evrel",
        description="Clinical event/relation annotation toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a corpus against the schema")
    p.add_argument("corpus_dir")
    p.add_argument("--strict", action="store_true",
                   help="treat warnings as failures")
    p.add_argument("--report", help="write the violation report here")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", help="score predictions against gold")
    p.add_argument("gold_dir")
    p.add_argument("pred_dir")
    p.add_argument("--report", help="write JSON records + text table here")
    p.add_argument("--per-note", help="write per-note overall F1 (TSV) here")
    p.add_argument("--strict-spans", action="store_true",
                   help="require exact span boundaries instead of overlap")
    p.add_argument("--min-f1", type=float, default=None,
                   help="exit 1 if overall F1 falls below this")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("iaa", help="inter-annotator agreement between two sets")
    p.add_argument("a_dir")
    p.add_argument("b_dir")
    p.add_argument("--report")
    p.set_defaults(func=cmd_iaa)

    p = sub.add_parser("sigtest", help="paired bootstrap test on per-note scores")
    p.add_argument("scores_a")
    p.add_argument("scores_b")
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", help="write the result record here")
    p.set_defaults(func=cmd_sigtest)

    p = sub.add_parser("windows", help="enumerate candidate pairs and coverage")
    p.add_argument("corpus_dir")
    p.add_argument("--max-sent", type=int, default=MAX_WINDOW_SENTENCES)
    p.add_argument("--max-tokens", type=int, default=MAX_WINDOW_TOKENS)
    p.add_argument("--out", help="write candidate pairs (JSONL) here")
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("encode", help="render model inputs/targets from gold")
    p.add_argument("--format", choices=("events", "marker", "qa"), required=True)
    p.add_argument("corpus_dir")
    p.add_argument("out")
    p.add_argument("--max-sent", type=int, default=MAX_WINDOW_SENTENCES)
    p.add_argument("--max-tokens", type=int, default=MAX_WINDOW_TOKENS)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="parse model outputs into a predicted corpus")
    p.add_argument("--format", choices=("events", "marker", "qa"), required=True)
    p.add_argument("corpus_dir")
    p.add_argument("outputs", help="JSONL of model outputs")
    p.add_argument("out_dir")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("out_dir")
    p.add_argument("--n-notes", type=int, default=100)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--config", help="JSON file with config overrides")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
