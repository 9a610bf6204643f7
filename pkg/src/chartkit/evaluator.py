"""Spatial benchmark evaluation: pooled box recall plus QA accuracy.

Recall is micro-averaged: matched and total ground-truth boxes are summed
across every item before the single division, so items with many boxes weigh
more. QA accuracy is the mean string-match score over items that carry a
reference answer.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from chartkit.errors import (
    DuplicateQuestionId,
    EmptyBenchmark,
    InvalidBox,
    MalformedJson,
    SchemaViolation,
)
from chartkit.geometry import BBox, match_and_recall
from chartkit.reward import answer_accuracy

log = logging.getLogger(__name__)

KINDS = ("grounding", "qa_grounding")

DEFAULT_IOU_THRESHOLD = 0.3


@dataclass(frozen=True)
class BenchmarkItem:
    question_id: str
    kind: str
    image_ref: str
    question: str
    gt_boxes: tuple[BBox, ...]
    gt_answer: str | None = None
    category: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaViolation("kind", f"unknown kind {self.kind!r}")
        if not self.question_id:
            raise SchemaViolation("question_id", "must be non-empty")
        if not self.gt_boxes:
            raise SchemaViolation("gt_boxes", "must be non-empty")
        if not all(isinstance(b, BBox) for b in self.gt_boxes):
            raise SchemaViolation("gt_boxes", "entries must be boxes")
        if self.kind == "qa_grounding" and not self.gt_answer:
            raise SchemaViolation("gt_answer", "qa_grounding items need a reference answer")
        if self.kind == "grounding" and self.gt_answer is not None:
            raise SchemaViolation("gt_answer", "grounding items must not carry an answer")


@dataclass(frozen=True)
class Breakdown:
    items: int
    total_gt_boxes: int
    matched_gt_boxes: int
    recall: float
    qa_accuracy: float | None = None


@dataclass(frozen=True)
class EvalReport:
    threshold: float
    total_gt_boxes: int
    matched_gt_boxes: int
    recall_at_threshold: float
    qa_accuracy: float | None
    per_kind: dict[str, Breakdown] = field(default_factory=dict)
    per_category: dict[str, Breakdown] = field(default_factory=dict)


Prediction = tuple[Sequence[BBox], str | None]


class _Accum:
    def __init__(self) -> None:
        self.items = 0
        self.total = 0
        self.matched = 0
        self.qa_correct = 0
        self.qa_items = 0

    def breakdown(self) -> Breakdown:
        return Breakdown(
            items=self.items,
            total_gt_boxes=self.total,
            matched_gt_boxes=self.matched,
            recall=self.matched / self.total if self.total else 0.0,
            qa_accuracy=self.qa_correct / self.qa_items if self.qa_items else None,
        )


def evaluate(
    items: Sequence[BenchmarkItem],
    predictions: Mapping[str, Prediction],
    threshold: float = DEFAULT_IOU_THRESHOLD,
) -> EvalReport:
    """Score predictions against a benchmark at one IoU threshold.

    Items missing from `predictions` count as zero boxes and an empty answer,
    so partial runs still produce a comparable report.
    """
    if not items:
        raise EmptyBenchmark("cannot evaluate an empty benchmark")
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    seen: set[str] = set()
    for item in items:
        if item.question_id in seen:
            raise DuplicateQuestionId(item.question_id)
        seen.add(item.question_id)

    overall = _Accum()
    kinds: dict[str, _Accum] = {}
    categories: dict[str, _Accum] = {}

    for item in items:
        boxes, answer = predictions.get(item.question_id, ((), None))
        matched, _ = match_and_recall(list(boxes), list(item.gt_boxes), threshold)
        buckets = [
            overall,
            kinds.setdefault(item.kind, _Accum()),
            categories.setdefault(item.category or "uncategorized", _Accum()),
        ]
        correct = None
        if item.kind == "qa_grounding":
            correct = answer_accuracy(answer or "", item.gt_answer or "")
        for acc in buckets:
            acc.items += 1
            acc.total += len(item.gt_boxes)
            acc.matched += matched
            if correct is not None:
                acc.qa_items += 1
                acc.qa_correct += correct

    top = overall.breakdown()
    return EvalReport(
        threshold=threshold,
        total_gt_boxes=top.total_gt_boxes,
        matched_gt_boxes=top.matched_gt_boxes,
        recall_at_threshold=top.recall,
        qa_accuracy=top.qa_accuracy,
        per_kind={k: kinds[k].breakdown() for k in sorted(kinds)},
        per_category={k: categories[k].breakdown() for k in sorted(categories)},
    )


def _item_from_doc(doc: Any, where: str) -> BenchmarkItem:
    if not isinstance(doc, dict):
        raise SchemaViolation(where, "expected an object")
    allowed = {"question_id", "kind", "image_ref", "question", "gt_boxes", "gt_answer", "category"}
    extra = set(doc) - allowed
    if extra:
        raise SchemaViolation(where, f"unexpected keys {sorted(extra)}")
    boxes_doc = doc.get("gt_boxes")
    if not isinstance(boxes_doc, list) or not boxes_doc:
        raise SchemaViolation(f"{where}.gt_boxes", "expected a non-empty list")
    try:
        boxes = tuple(BBox.from_quad(q) for q in boxes_doc)
    except (InvalidBox, TypeError) as e:
        raise SchemaViolation(f"{where}.gt_boxes", str(e)) from e
    for key in ("question_id", "kind", "image_ref", "question"):
        if not isinstance(doc.get(key), str) or not doc[key]:
            raise SchemaViolation(f"{where}.{key}", "expected a non-empty string")
    try:
        return BenchmarkItem(
            question_id=doc["question_id"],
            kind=doc["kind"],
            image_ref=doc["image_ref"],
            question=doc["question"],
            gt_boxes=boxes,
            gt_answer=doc.get("gt_answer"),
            category=doc.get("category"),
        )
    except SchemaViolation as e:
        raise SchemaViolation(where, str(e)) from e


def load_benchmark(
    path: str | Path, expected_counts: Mapping[str, int] | None = None
) -> list[BenchmarkItem]:
    """Load and validate a benchmark JSONL file.

    Logs the per-kind item counts and pooled box count; when
    `expected_counts` declares {"grounding", "qa_grounding", "gt_boxes"}
    numbers that disagree with the file, a warning names both.
    """
    items: list[BenchmarkItem] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedJson(f"{path}:{lineno}: {e}") from e
            items.append(_item_from_doc(doc, where=f"{path}:{lineno}"))

    counts = {k: sum(1 for i in items if i.kind == k) for k in KINDS}
    total_boxes = sum(len(i.gt_boxes) for i in items)
    log.info(
        "benchmark %s: %d items (%s), %d gt boxes",
        path,
        len(items),
        ", ".join(f"{k}={v}" for k, v in counts.items()),
        total_boxes,
    )
    if expected_counts:
        actual = dict(counts, gt_boxes=total_boxes)
        for key, expected in expected_counts.items():
            got = actual.get(key)
            if got is not None and got != expected:
                log.warning(
                    "benchmark %s: expected %s=%d per manifest, file has %d",
                    path,
                    key,
                    expected,
                    got,
                )
    return items


def load_predictions(path: str | Path) -> dict[str, Prediction]:
    """Load a predictions JSONL file of {question_id, boxes, answer}.

    Invalid predicted boxes are dropped (with a count in the log) rather than
    failing the run: a malformed prediction should score zero, not crash
    evaluation. A repeated question_id keeps the last entry.
    """
    out: dict[str, Prediction] = {}
    dropped = 0
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedJson(f"{path}:{lineno}: {e}") from e
            where = f"{path}:{lineno}"
            if not isinstance(doc, dict) or not isinstance(doc.get("question_id"), str):
                raise SchemaViolation(where, "expected an object with question_id")
            boxes_doc = doc.get("boxes", [])
            if not isinstance(boxes_doc, list):
                raise SchemaViolation(f"{where}.boxes", "expected a list")
            boxes = []
            for quad in boxes_doc:
                try:
                    boxes.append(BBox.from_quad(quad))
                except (InvalidBox, TypeError):
                    dropped += 1
            answer = doc.get("answer")
            if answer is not None and not isinstance(answer, str):
                raise SchemaViolation(f"{where}.answer", "expected a string or null")
            if doc["question_id"] in out:
                log.warning("%s: duplicate prediction for %r, keeping last", where, doc["question_id"])
            out[doc["question_id"]] = (boxes, answer)
    if dropped:
        log.warning("predictions %s: dropped %d invalid predicted boxes", path, dropped)
    return out


def _breakdown_dict(b: Breakdown) -> dict[str, Any]:
    return {
        "items": b.items,
        "total_gt_boxes": b.total_gt_boxes,
        "matched_gt_boxes": b.matched_gt_boxes,
        "recall": b.recall,
        "qa_accuracy": b.qa_accuracy,
    }


def report_to_dict(report: EvalReport) -> dict[str, Any]:
    return {
        "threshold": report.threshold,
        "total_gt_boxes": report.total_gt_boxes,
        "matched_gt_boxes": report.matched_gt_boxes,
        "recall_at_threshold": report.recall_at_threshold,
        "qa_accuracy": report.qa_accuracy,
        "per_kind": {k: _breakdown_dict(v) for k, v in report.per_kind.items()},
        "per_category": {k: _breakdown_dict(v) for k, v in report.per_category.items()},
    }


def format_report_table(report: EvalReport) -> str:
    """Human-readable summary for the terminal."""

    def fmt(v: float | None) -> str:
        return "n/a" if v is None else f"{v:.4f}"

    lines = [
        f"recall@{report.threshold:g}: {report.recall_at_threshold:.4f} "
        f"({report.matched_gt_boxes}/{report.total_gt_boxes} gt boxes)",
        f"qa accuracy: {fmt(report.qa_accuracy)}",
        "",
        f"{'group':<28} {'items':>6} {'boxes':>6} {'recall':>8} {'qa acc':>8}",
    ]
    for label, table in (("kind", report.per_kind), ("category", report.per_category)):
        for key, b in table.items():
            lines.append(
                f"{label + ':' + key:<28} {b.items:>6} {b.total_gt_boxes:>6} "
                f"{b.recall:>8.4f} {fmt(b.qa_accuracy):>8}"
            )
    return "\n".join(lines)
