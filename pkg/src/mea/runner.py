"""Batch corpus processing: ingestion, pipeline runs, sampling, error reports."""

from __future__ import annotations

import csv
import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .belief import BeliefLexicon
from .dag import MeaDag, build_mea_dag, dumps_dag, to_dot
from .extraction import ConlluError, ParsedSentence, parse_conllu
from .llm import LlmClient, LlmParseError
from .nature import NatureGraph, NatureNodeId

log = logging.getLogger(__name__)

ERROR_TYPES = (
    "EventLinkingLoss",
    "AserExtractionLoss",
    "WrongSubsequentAction",
    "WordSenseAmbiguity",
    "WrongBelief",
    "WrongPastAction",
    "NegationLoss",
)

ERROR_DISPLAY_NAMES = {
    "EventLinkingLoss": "Event Linking Loss",
    "AserExtractionLoss": "ASER Extraction Loss",
    "WrongSubsequentAction": "Wrong Subsequent Action",
    "WordSenseAmbiguity": "Word Sense Ambiguity",
    "WrongBelief": "Wrong Belief",
    "WrongPastAction": "Wrong Past Action",
    "NegationLoss": "Negation Loss",
}

PATTERN_IDS = tuple(f"P{i}" for i in range(1, 11)) + ("STATE",)

SHORT_SENTENCE_LIMIT = 5  # reviews with fewer sentences than this are "short"


@dataclass
class ReviewRecord:
    review_id: str
    text: str
    sentence_count: int = 0


@dataclass
class CorpusStats:
    total_reviews: int = 0
    reviews_with_events: int = 0
    valid_dags: int = 0
    invalid_both_needs: int = 0
    invalid_no_need: int = 0
    failed_reviews: int = 0
    pattern_counts: dict[str, int] = field(default_factory=lambda: {p: 0 for p in PATTERN_IDS})
    classifier_calls: int = 0
    classifier_cache_hits: int = 0

    def to_json(self) -> dict:
        return {
            "total_reviews": self.total_reviews,
            "reviews_with_events": self.reviews_with_events,
            "valid_dags": self.valid_dags,
            "invalid_both_needs": self.invalid_both_needs,
            "invalid_no_need": self.invalid_no_need,
            "failed_reviews": self.failed_reviews,
            "pattern_counts": {p: self.pattern_counts.get(p, 0) for p in PATTERN_IDS},
            "classifier_calls": self.classifier_calls,
            "classifier_cache_hits": self.classifier_cache_hits,
        }


class ReportValidationError(Exception):
    def __init__(self, offenders: list[str]):
        self.offenders = offenders
        super().__init__("unknown error types: " + ", ".join(offenders))


def ingest_reviews(
    path: str | Path,
    fmt: str,
    failures: list[tuple[str, str]] | None = None,
) -> list[ReviewRecord]:
    """Read a review corpus in snap (key: value blocks) or csv (Id,Text) form.

    Records without usable text are skipped with a warning; when a failures
    list is given they are recorded there for quarantine reporting.
    """
    path = Path(path)
    if fmt == "snap":
        return _ingest_snap(path, failures)
    if fmt == "csv":
        return _ingest_csv(path, failures)
    raise ValueError(f"unknown corpus format {fmt!r}")


def _skip(failures: list[tuple[str, str]] | None, review_id: str, reason: str) -> None:
    log.warning("skipping review %s: %s", review_id, reason)
    if failures is not None:
        failures.append((review_id, reason))


def _ingest_snap(path: Path, failures: list[tuple[str, str]] | None) -> list[ReviewRecord]:
    records: list[ReviewRecord] = []
    block: dict[str, str] = {}
    ordinal = 0

    def flush() -> None:
        nonlocal ordinal, block
        if not block:
            return
        ordinal += 1
        review_id = str(ordinal)
        text = block.get("review/text", "").strip()
        if not text:
            _skip(failures, review_id, "missing review/text field")
        else:
            records.append(ReviewRecord(review_id, text))
        block = {}

    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            flush()
            continue
        key, sep, value = line.partition(":")
        if sep:
            block[key.strip()] = value.strip()
    flush()
    return records


def _ingest_csv(path: Path, failures: list[tuple[str, str]] | None) -> list[ReviewRecord]:
    records: list[ReviewRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "Id" not in reader.fieldnames or "Text" not in reader.fieldnames:
            raise ValueError(f"{path}: csv must have Id and Text columns")
        for row in reader:
            review_id = (row.get("Id") or "").strip()
            text = (row.get("Text") or "").strip()
            if not review_id:
                _skip(failures, "<missing id>", "missing Id value")
                continue
            if not text:
                _skip(failures, review_id, "empty review text")
                continue
            records.append(ReviewRecord(review_id, text))
    return records


def load_parse_dir(
    parse_dir: str | Path,
    failures: list[tuple[str, str]] | None = None,
) -> dict[str, list[ParsedSentence]]:
    """Parse every *.conllu file in a directory, grouping sentences by review.

    Files are named after the review id they carry; a file that fails to parse
    quarantines that review instead of aborting the batch.
    """
    parse_dir = Path(parse_dir)
    by_review: dict[str, list[ParsedSentence]] = {}
    for file in sorted(parse_dir.glob("*.conllu")):
        try:
            sentences = parse_conllu(file)
        except ConlluError as exc:
            _skip(failures, file.stem, f"parse error: {exc}")
            continue
        for sentence in sentences:
            by_review.setdefault(sentence.review_id, []).append(sentence)
    for sentences in by_review.values():
        sentences.sort(key=lambda s: s.sentence_index)
    return by_review


def run_pipeline(
    reviews: Sequence[ReviewRecord],
    parses: dict[str, list[ParsedSentence]],
    graph: NatureGraph,
    lexicon: BeliefLexicon,
    client: LlmClient,
    out_dir: str | Path,
    write_dot: bool = False,
    workers: int = 1,
    failures: list[tuple[str, str]] | None = None,
) -> CorpusStats:
    """Build one graph per review with sentences, write outputs and stats.

    Per-review failures are logged and counted, never abort the batch.
    Classifier verdicts that fail to parse skip just the affected event.
    """
    known_ids = {r.review_id for r in reviews}
    if failures is not None:
        known_ids |= {rid for rid, _ in failures}
    unknown = sorted(set(parses) - known_ids)
    if unknown:
        raise ValueError(f"parse files reference unknown review ids: {', '.join(unknown)}")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if failures is None:
        failures = []

    def classify(text: str):
        try:
            return client.classify_action_event(text)
        except LlmParseError as exc:
            log.warning("unparseable classifier verdict for %r (%r); skipping event", text, exc.raw_response)
            return None

    def build_one(record: ReviewRecord) -> MeaDag | Exception:
        try:
            dag = build_mea_dag(parses[record.review_id], graph, lexicon, classify)
            if dag.events:
                (out_dir / f"{record.review_id}.json").write_text(dumps_dag(dag), encoding="utf-8")
                if write_dot:
                    (out_dir / f"{record.review_id}.dot").write_text(to_dot(dag), encoding="utf-8")
            return dag
        except Exception as exc:  # quarantined per review
            return exc

    stats = CorpusStats(total_reviews=len(reviews))
    work = [r for r in reviews if r.review_id in parses]
    for record in work:
        record.sentence_count = len(parses[record.review_id])

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(build_one, work))

    index_entries = []
    for record, result in zip(work, results):
        if isinstance(result, Exception):
            _skip(failures, record.review_id, f"pipeline error: {result}")
            continue
        if not result.events:
            continue
        stats.reviews_with_events += 1
        for event in result.events:
            stats.pattern_counts[event.pattern_id] = stats.pattern_counts.get(event.pattern_id, 0) + 1
        has_pos = NatureNodeId.NEED_FOOD_POS in result.activated
        has_neg = NatureNodeId.NEED_FOOD_NEG in result.activated
        if result.valid:
            stats.valid_dags += 1
        elif has_pos and has_neg:
            stats.invalid_both_needs += 1
        else:
            stats.invalid_no_need += 1
        index_entries.append(
            {
                "review_id": record.review_id,
                "sentence_count": record.sentence_count,
                "valid": result.valid,
            }
        )

    stats.failed_reviews = len(failures)
    stats.classifier_calls, stats.classifier_cache_hits = client.stats()

    index_entries.sort(key=lambda e: e["review_id"])
    (out_dir / "index.json").write_text(json.dumps(index_entries, indent=2) + "\n", encoding="utf-8")
    (out_dir / "stats.json").write_text(json.dumps(stats.to_json(), indent=2) + "\n", encoding="utf-8")
    if failures:
        lines = [f"{rid}\t{reason}" for rid, reason in failures]
        (out_dir / "failures.log").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return stats


def sample_for_evaluation(index_entries: Sequence[dict], n: int, seed: int) -> dict:
    """Draw a uniform, seeded sample of valid graphs tagged short or long."""
    valid = sorted((e for e in index_entries if e["valid"]), key=lambda e: e["review_id"])
    if n > len(valid):
        raise ValueError(f"requested {n} samples but only {len(valid)} valid graphs exist")
    rng = random.Random(seed)
    chosen = rng.sample(valid, n)
    entries = [
        {
            "review_id": e["review_id"],
            "sentence_count": e["sentence_count"],
            "split": "short" if e["sentence_count"] < SHORT_SENTENCE_LIMIT else "long",
            "annotations": [],
        }
        for e in chosen
    ]
    return {"seed": seed, "n": n, "entries": entries}


def _column_report(entries: list[dict]) -> tuple[dict, dict]:
    incorrect = sum(1 for e in entries if e["annotations"])
    count = len(entries)
    samples = {
        "count": count,
        "incorrect": incorrect,
        "incorrect_pct": round(100.0 * incorrect / count, 1) if count else 0.0,
    }
    type_counts = {t: 0 for t in ERROR_TYPES}
    for entry in entries:
        for ann in entry["annotations"]:
            type_counts[ann["error_type"]] += 1
    total_errors = sum(type_counts.values())
    errors = {
        "count": total_errors,
        "by_type": {
            t: {
                "count": c,
                "pct": round(100.0 * c / total_errors, 1) if total_errors else 0.0,
            }
            for t, c in type_counts.items()
        },
    }
    return samples, errors


def report_errors(manifest: dict) -> dict:
    """Aggregate filled annotations into counts and percentages per column."""
    offenders = []
    for entry in manifest["entries"]:
        for ann in entry.get("annotations", []):
            if ann.get("error_type") not in ERROR_TYPES:
                offenders.append(str(ann.get("error_type")))
    if offenders:
        raise ReportValidationError(offenders)

    entries = manifest["entries"]
    short = [e for e in entries if e["split"] == "short"]
    long_ = [e for e in entries if e["split"] == "long"]
    report: dict = {"samples": {}, "errors": {}}
    for name, subset in (("total", entries), ("short", short), ("long", long_)):
        samples, errors = _column_report(list(subset))
        report["samples"][name] = samples
        report["errors"][name] = errors
    return report


def render_report(report: dict) -> str:
    """Plain-text table: sample accuracy and error distribution per column."""
    cols = ("total", "short", "long")
    headers = {"total": "Test", "short": "Short-Test", "long": "Long-Test"}

    def row(label: str, cells: list[tuple[int, float]]) -> str:
        out = f"{label:<32}"
        for count, pct in cells:
            out += f"{count:>8} {pct:>7.1f}%"
        return out

    lines = [f"{'':<32}" + "".join(f"{headers[c]:>17}" for c in cols)]
    lines.append(
        row("Sample  Incorrect", [(report["samples"][c]["incorrect"], report["samples"][c]["incorrect_pct"]) for c in cols])
    )
    lines.append(row("        Total", [(report["samples"][c]["count"], 100.0 if report["samples"][c]["count"] else 0.0) for c in cols]))
    lines.append("-" * len(lines[0]))
    for error_type in ERROR_TYPES:
        cells = [
            (
                report["errors"][c]["by_type"][error_type]["count"],
                report["errors"][c]["by_type"][error_type]["pct"],
            )
            for c in cols
        ]
        lines.append(row(f"Error   {ERROR_DISPLAY_NAMES[error_type]}", cells))
    lines.append(
        row("        Total", [(report["errors"][c]["count"], 100.0 if report["errors"][c]["count"] else 0.0) for c in cols])
    )
    return "\n".join(lines) + "\n"
