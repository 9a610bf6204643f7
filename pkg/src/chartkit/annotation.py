"""Dataset records for the three task families, plus their JSONL persistence.

Grounding and chart-to-code questions come from a versioned template registry;
each category has several surface variants and the variant is picked by
content hash, so record text is diverse across a dataset yet fully
reproducible. QA records are parsed out of model output and re-validated here.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, NamedTuple

from chartkit._util import content_hash, sha256_hex
from chartkit.element_map import ElementCategory, LabeledBox
from chartkit.errors import (
    EmptyScript,
    MalformedJson,
    NoParseableContent,
    SchemaViolation,
    UnknownCategory,
)
from chartkit.geometry import BBox
from chartkit.errors import InvalidBox

TASKS = ("qa", "grounding", "chart_to_code")
SCOPES = ("global", "local")
SPLITS = ("sft", "rl")

DEFAULT_TEMPLATE_VERSION = "v1"

# Grounding question surface forms. Placeholders: {subplot}, {text}, {axis}.
# At least two variants per category; selection is by content hash so the
# same element always gets the same wording.
_GROUNDING_TEMPLATES: dict[str, dict[str, tuple[str, ...]]] = {
    "v1": {
        "title": (
            "Where is the title of subplot {subplot}? Answer with a bounding box.",
            "Locate the title of subplot {subplot}. Answer with a bounding box.",
        ),
        "x_axis_name": (
            "Where is the x-axis label of subplot {subplot}? Answer with a bounding box.",
            "Locate the x-axis label of subplot {subplot}. Answer with a bounding box.",
        ),
        "y_axis_name": (
            "Where is the y-axis label of subplot {subplot}? Answer with a bounding box.",
            "Locate the y-axis label of subplot {subplot}. Answer with a bounding box.",
        ),
        "x_tick": (
            'Where is the tick labeled "{text}" on the x-axis "{axis}" of subplot '
            "{subplot}? Answer with a bounding box.",
            'Locate the "{text}" tick of the x-axis "{axis}" in subplot {subplot}. '
            "Answer with a bounding box.",
        ),
        "y_tick": (
            'Where is the tick labeled "{text}" on the y-axis "{axis}" of subplot '
            "{subplot}? Answer with a bounding box.",
            'Locate the "{text}" tick of the y-axis "{axis}" in subplot {subplot}. '
            "Answer with a bounding box.",
        ),
        "legend": (
            'Where is the legend entry "{text}" of subplot {subplot}? Answer with a '
            "bounding box.",
            'Locate the legend entry "{text}" in subplot {subplot}. Answer with a '
            "bounding box.",
        ),
    }
}

# Registered templates for free-form `other` subcategories. Empty by default:
# an `other` box only becomes a record once someone registers wording for it.
_OTHER_TEMPLATES: dict[str, dict[str, tuple[str, ...]]] = {"v1": {}}

_CODE_PROMPTS: dict[str, tuple[str, ...]] = {
    "v1": (
        "Reproduce this chart with Python plotting code. Answer with a single "
        "fenced code block.",
        "Write the plotting code that recreates this chart exactly. Answer with "
        "a single fenced code block.",
    )
}


@dataclass(frozen=True)
class DatasetRecord:
    """One training or evaluation item.

    Exactly one answer payload is populated and it must match the task:
    qa carries text, grounding carries boxes, chart_to_code carries a script.
    """

    record_id: str
    task: str
    image_ref: str
    question: str
    answer_text: str | None = None
    answer_boxes: tuple[BBox, ...] | None = None
    answer_script: str | None = None
    reasoning_scope: str | None = None
    split: str = "sft"
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise SchemaViolation("task", f"unknown task {self.task!r}")
        if self.split not in SPLITS:
            raise SchemaViolation("split", f"unknown split {self.split!r}")
        if not self.record_id:
            raise SchemaViolation("record_id", "must be non-empty")
        if not self.image_ref:
            raise SchemaViolation("image_ref", "must be non-empty")
        if not self.question:
            raise SchemaViolation("question", "must be non-empty")

        payloads = {
            "qa": self.answer_text,
            "grounding": self.answer_boxes,
            "chart_to_code": self.answer_script,
        }
        populated = [k for k, v in payloads.items() if v is not None]
        if populated != [self.task]:
            raise SchemaViolation(
                "answer", f"task {self.task!r} must populate exactly its own payload, got {populated}"
            )
        if self.answer_boxes is not None:
            if len(self.answer_boxes) == 0:
                raise SchemaViolation("answer_boxes", "must be non-empty")
            if not all(isinstance(b, BBox) for b in self.answer_boxes):
                raise SchemaViolation("answer_boxes", "entries must be boxes")
        if self.task == "qa":
            if self.reasoning_scope not in SCOPES:
                raise SchemaViolation(
                    "reasoning_scope", f"qa records need a scope in {SCOPES}, got {self.reasoning_scope!r}"
                )
        elif self.reasoning_scope is not None:
            raise SchemaViolation("reasoning_scope", "only qa records carry a scope")


def compute_record_id(
    task: str, image_ref: str, question: str, payload: str | Iterable[BBox]
) -> str:
    """Content hash over (task, image_ref, question, answer payload)."""
    if isinstance(payload, str):
        payload_doc: Any = payload
    else:
        payload_doc = [b.as_quad() for b in payload]
    return content_hash([task, image_ref, question, payload_doc])


def _pick_variant(version: str, key: str, parts: tuple[str, ...], n: int) -> int:
    # Pure function of (category key, texts/indices, template version) only,
    # so the same element gets the same wording on every machine.
    return int(sha256_hex("|".join((version, key) + parts))[:8], 16) % n


def render_grounding_question(
    subplot_index: int,
    lb: LabeledBox,
    template_set_version: str = DEFAULT_TEMPLATE_VERSION,
) -> tuple[str, int]:
    """Question text and chosen variant index for a labeled element."""
    if template_set_version not in _GROUNDING_TEMPLATES:
        raise ValueError(f"unknown template set version {template_set_version!r}")
    if lb.category is ElementCategory.OTHER:
        registry = _OTHER_TEMPLATES[template_set_version]
        key = lb.subcategory or ""
        if key not in registry:
            raise UnknownCategory(f"no template registered for 'other' category {key!r}")
        variants = registry[key]
        key_name = f"other.{key}"
    else:
        variants = _GROUNDING_TEMPLATES[template_set_version][lb.category.value]
        key_name = lb.category.value
    parts = (str(subplot_index), lb.text, lb.axis or "")
    idx = _pick_variant(template_set_version, key_name, parts, len(variants))
    question = variants[idx].format(subplot=subplot_index, text=lb.text, axis=lb.axis or "")
    return question, idx


def grounding_record(
    map_entry: tuple[int, LabeledBox],
    image_ref: str,
    template_set_version: str = DEFAULT_TEMPLATE_VERSION,
) -> DatasetRecord:
    """Spatial record: templated question, the element's box as the answer."""
    subplot_index, lb = map_entry
    question, variant = render_grounding_question(subplot_index, lb, template_set_version)
    boxes = (lb.box,)
    return DatasetRecord(
        record_id=compute_record_id("grounding", image_ref, question, boxes),
        task="grounding",
        image_ref=image_ref,
        question=question,
        answer_boxes=boxes,
        provenance={
            "template_set_version": template_set_version,
            "template_variant": variant,
            "category": lb.category.value,
            "subplot_index": subplot_index,
        },
    )


def chart_to_code_record(
    script: str,
    image_ref: str,
    template_set_version: str = DEFAULT_TEMPLATE_VERSION,
    prompt_index: int | None = None,
) -> DatasetRecord:
    """Chart-to-code record: fixed reproduction prompt, script verbatim."""
    if not script.strip():
        raise EmptyScript("chart-to-code record needs a non-empty script")
    if template_set_version not in _CODE_PROMPTS:
        raise ValueError(f"unknown template set version {template_set_version!r}")
    prompts = _CODE_PROMPTS[template_set_version]
    if prompt_index is None:
        prompt_index = _pick_variant(template_set_version, "chart_to_code", (script,), len(prompts))
    question = prompts[prompt_index % len(prompts)]
    return DatasetRecord(
        record_id=compute_record_id("chart_to_code", image_ref, question, script),
        task="chart_to_code",
        image_ref=image_ref,
        question=question,
        answer_script=script,
        provenance={
            "template_set_version": template_set_version,
            "template_variant": prompt_index % len(prompts),
        },
    )


def qa_record(
    question: str,
    answer: str,
    reasoning_scope: str,
    image_ref: str,
    provenance: dict[str, Any] | None = None,
) -> DatasetRecord:
    """QA record from an accepted generated pair."""
    return DatasetRecord(
        record_id=compute_record_id("qa", image_ref, question, answer),
        task="qa",
        image_ref=image_ref,
        question=question,
        answer_text=answer,
        reasoning_scope=reasoning_scope,
        provenance=dict(provenance or {}),
    )


class QaPair(NamedTuple):
    question: str
    answer: str
    scope: str


@dataclass
class QaParse:
    """Parsed QA candidates plus counters for everything that was dropped."""

    pairs: list[QaPair]
    dropped_malformed: int = 0
    dropped_truncated: int = 0


MAX_QA_PAIRS = 10


def _find_json_array(text: str) -> list | None:
    try:
        doc = json.loads(text)
        if isinstance(doc, list):
            return doc
    except json.JSONDecodeError:
        pass
    decoder = json.JSONDecoder()
    idx = text.find("[")
    while idx != -1:
        try:
            doc, _ = decoder.raw_decode(text, idx)
        except json.JSONDecodeError:
            doc = None
        if isinstance(doc, list):
            return doc
        idx = text.find("[", idx + 1)
    return None


def parse_qa_generation(model_output: str) -> QaParse:
    """Extract up to MAX_QA_PAIRS (question, answer, scope) triples.

    The required grammar is a JSON array of objects with string fields
    `question` and `answer` plus `scope` in {global, local}. Entries breaking
    the grammar are dropped and counted; entries past the cap are counted as
    truncated. Raises NoParseableContent when nothing usable is found.
    """
    array = _find_json_array(model_output)
    if array is None:
        raise NoParseableContent("no JSON array of QA pairs in model output")

    pairs: list[QaPair] = []
    dropped = 0
    truncated = 0
    for item in array:
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("question"), str)
            or not isinstance(item.get("answer"), str)
            or item.get("scope") not in SCOPES
            or not item["question"].strip()
            or not item["answer"].strip()
        ):
            dropped += 1
            continue
        if len(pairs) >= MAX_QA_PAIRS:
            truncated += 1
            continue
        pairs.append(QaPair(item["question"], item["answer"], item["scope"]))
    if not pairs:
        raise NoParseableContent("no QA pair in model output survived validation")
    return QaParse(pairs=pairs, dropped_malformed=dropped, dropped_truncated=truncated)


_RECORD_FIELDS = (
    "record_id",
    "task",
    "image_ref",
    "question",
    "answer_text",
    "answer_boxes",
    "answer_script",
    "reasoning_scope",
    "split",
    "provenance",
)


def record_to_dict(r: DatasetRecord) -> dict[str, Any]:
    return {
        "record_id": r.record_id,
        "task": r.task,
        "image_ref": r.image_ref,
        "question": r.question,
        "answer_text": r.answer_text,
        "answer_boxes": None if r.answer_boxes is None else [b.as_quad() for b in r.answer_boxes],
        "answer_script": r.answer_script,
        "reasoning_scope": r.reasoning_scope,
        "split": r.split,
        "provenance": r.provenance,
    }


def record_from_dict(doc: dict[str, Any], where: str = "record") -> DatasetRecord:
    if not isinstance(doc, dict):
        raise SchemaViolation(where, "expected an object")
    extra = set(doc) - set(_RECORD_FIELDS)
    if extra:
        raise SchemaViolation(where, f"unexpected keys {sorted(extra)}")
    boxes_doc = doc.get("answer_boxes")
    boxes: tuple[BBox, ...] | None = None
    if boxes_doc is not None:
        if not isinstance(boxes_doc, list):
            raise SchemaViolation(f"{where}.answer_boxes", "expected a list of quadruples")
        try:
            boxes = tuple(BBox.from_quad(q) for q in boxes_doc)
        except (InvalidBox, TypeError) as e:
            raise SchemaViolation(f"{where}.answer_boxes", str(e)) from e
    provenance = doc.get("provenance") or {}
    if not isinstance(provenance, dict):
        raise SchemaViolation(f"{where}.provenance", "expected an object")
    try:
        return DatasetRecord(
            record_id=doc.get("record_id", ""),
            task=doc.get("task", ""),
            image_ref=doc.get("image_ref", ""),
            question=doc.get("question", ""),
            answer_text=doc.get("answer_text"),
            answer_boxes=boxes,
            answer_script=doc.get("answer_script"),
            reasoning_scope=doc.get("reasoning_scope"),
            split=doc.get("split", "sft"),
            provenance=provenance,
        )
    except SchemaViolation as e:
        raise SchemaViolation(where, str(e)) from e


def write_records(records: Iterable[DatasetRecord], path: str | Path) -> int:
    """Write one record per line; returns the line count."""
    path = Path(path)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(record_to_dict(r), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_records(path: str | Path) -> list[DatasetRecord]:
    """Read a record JSONL file, validating every line."""
    out: list[DatasetRecord] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedJson(f"{path}:{lineno}: {e}") from e
            out.append(record_from_dict(doc, where=f"{path}:{lineno}"))
    return out


def with_split(record: DatasetRecord, split: str) -> DatasetRecord:
    """Copy of a record tagged for another split; record_id is unchanged."""
    return dataclasses.replace(record, split=split)
