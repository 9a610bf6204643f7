"""Rollout scoring: format and accuracy rewards, their weighted blend, and
group-relative advantages.

The final reward is a convex combination: accuracy_weight * accuracy +
(1 - accuracy_weight) * format, default weight 0.9. Accuracy depends on the
task: normalized string matching for QA, IoU of the first predicted box for
grounding, and a five-axis judge verdict summed out of 25 for chart-to-code.
Advantages normalize each rollout's final reward against its sampling group
(population std plus a small epsilon).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from chartkit.annotation import TASKS
from chartkit.errors import (
    GroupTooSmall,
    JudgeParseError,
    MalformedJson,
    NoAnswerBlock,
    SchemaViolation,
    UnparseableBox,
)
from chartkit.geometry import BBox, iou
from chartkit.errors import InvalidBox

JUDGE_AXES = ("data", "plot type structure", "axes scales and limits", "text elements", "styling")


@dataclass(frozen=True)
class RolloutResponse:
    task: str
    raw_text: str

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise SchemaViolation("task", f"unknown task {self.task!r}")
        if not isinstance(self.raw_text, str):
            raise SchemaViolation("raw_text", "must be a string (may be empty)")


@dataclass(frozen=True)
class RewardConfig:
    accuracy_weight: float = 0.9
    iou_as_reward: bool = True  # False: binary hit at grounding_iou_threshold
    grounding_iou_threshold: float = 0.3
    judge_max_per_axis: int = 5
    judge_axes: tuple[str, ...] = JUDGE_AXES
    group_std_epsilon: float = 1e-6
    # Optional per-task accuracy_weight override; unlisted tasks use the default.
    task_accuracy_weights: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy_weight <= 1.0:
            raise ValueError(f"accuracy_weight must be in [0,1], got {self.accuracy_weight}")
        if len(self.judge_axes) != 5:
            raise ValueError("judge_axes must name exactly 5 axes")
        if self.group_std_epsilon <= 0:
            raise ValueError("group_std_epsilon must be positive")
        for task, w in self.task_accuracy_weights.items():
            if task not in TASKS or not 0.0 <= w <= 1.0:
                raise ValueError(f"bad per-task weight {task!r}={w}")

    def weight_for(self, task: str | None) -> float:
        if task is None:
            return self.accuracy_weight
        return self.task_accuracy_weights.get(task, self.accuracy_weight)


@dataclass(frozen=True)
class RewardBreakdown:
    accuracy: float
    format: float
    final: float


_SHAPE_RE = re.compile(r"\A\s*<think>(.*?)</think>\s*<answer>(.*?)</answer>\s*\Z", re.DOTALL)
_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
_NUM = r"-?\d+(?:\.\d+)?"
_QUAD_RE = re.compile(rf"\[\s*({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})\s*\]")
_FENCE_RE = re.compile(r"```[A-Za-z0-9_+-]*\n(.*?)```", re.DOTALL)


def _shape_match(raw: str) -> re.Match | None:
    # Exact tag counts forbid nested or repeated blocks that the lazy
    # regex alone would tolerate.
    if (
        raw.count("<think>") != 1
        or raw.count("</think>") != 1
        or raw.count("<answer>") != 1
        or raw.count("</answer>") != 1
    ):
        return None
    return _SHAPE_RE.match(raw)


def format_reward(resp: RolloutResponse) -> int:
    """1 iff the rollout has the required think-then-answer shape.

    Grounding answers must additionally consist of [x1,y1,x2,y2] quadruples
    only; chart-to-code answers must contain exactly one fenced code block.
    Purely syntactic: a quadruple with inverted corners still counts here and
    is rejected later by extraction.
    """
    m = _shape_match(resp.raw_text)
    if m is None:
        return 0
    body = m.group(2)
    if resp.task == "grounding":
        quads = _QUAD_RE.findall(body)
        leftover = _QUAD_RE.sub("", body)
        if not quads or not re.fullmatch(r"[\s,]*", leftover):
            return 0
    elif resp.task == "chart_to_code":
        blocks = _FENCE_RE.findall(body)
        if len(blocks) != 1 or not blocks[0].strip():
            return 0
    return 1


def extract_answer(resp: RolloutResponse) -> str | list[BBox]:
    """Payload of the last <answer> block, parsed for the response's task.

    Best-effort: works even when format_reward is 0, as long as an answer
    block exists and its content parses.
    """
    blocks = _ANSWER_RE.findall(resp.raw_text)
    if not blocks:
        raise NoAnswerBlock("no <answer> block in rollout text")
    body = blocks[-1]
    if resp.task == "grounding":
        quads = _QUAD_RE.findall(body)
        if not quads:
            raise UnparseableBox("no [x1,y1,x2,y2] quadruple in answer")
        boxes = []
        for quad in quads:
            values = [float(v) if "." in v else int(v) for v in quad]
            try:
                boxes.append(BBox.from_quad(values))
            except InvalidBox as e:
                raise UnparseableBox(str(e)) from e
        return boxes
    if resp.task == "chart_to_code":
        fenced = _FENCE_RE.findall(body)
        if fenced:
            return max(fenced, key=len).strip("\n")
        return body.strip()
    return body.strip()


def _normalize_answer(s: str) -> str:
    s = s.strip().casefold()
    while len(s) >= 2 and s[0] in "\"'" and s[-1] in "\"'":
        s = s[1:-1].strip()
    s = s.rstrip(".").strip()
    if s.endswith("%"):
        s = s[:-1].strip()
    return s


def _as_number(s: str) -> float | None:
    try:
        return float(s)
    except ValueError:
        return None


def answer_accuracy(pred_text: str, gt_text: str) -> int:
    """1 iff the two answers agree after normalization.

    Both sides are stripped, case-folded, unquoted, and lose a trailing
    period or percent sign; when both parse as numbers they compare with
    relative tolerance 1e-4 (absolute 1e-6 near zero).
    """
    a = _normalize_answer(pred_text)
    b = _normalize_answer(gt_text)
    na, nb = _as_number(a), _as_number(b)
    if na is not None and nb is not None:
        return int(math.isclose(na, nb, rel_tol=1e-4, abs_tol=1e-6))
    return int(a == b)


def grounding_reward(pred_boxes: Sequence[BBox], gt_box: BBox, cfg: RewardConfig | None = None) -> float:
    """IoU of the first predicted box against the ground truth; 0 with no box."""
    cfg = cfg or RewardConfig()
    if not pred_boxes:
        return 0.0
    value = iou(pred_boxes[0], gt_box)
    if cfg.iou_as_reward:
        return value
    return 1.0 if value >= cfg.grounding_iou_threshold else 0.0


def _find_json_object(text: str) -> dict | None:
    try:
        doc = json.loads(text)
        if isinstance(doc, dict):
            return doc
    except json.JSONDecodeError:
        pass
    decoder = json.JSONDecoder()
    idx = text.find("{")
    while idx != -1:
        try:
            doc, _ = decoder.raw_decode(text, idx)
        except json.JSONDecodeError:
            doc = None
        if isinstance(doc, dict):
            return doc
        idx = text.find("{", idx + 1)
    return None


def code_reward(judge_text: str, cfg: RewardConfig | None = None) -> float:
    """Sum of the five judge axis scores, normalized by 25.

    The verdict must be a JSON object scoring every configured axis with an
    integer; integers outside [0, max] are clamped. A missing object or axis
    raises JudgeParseError rather than silently scoring zero.
    """
    cfg = cfg or RewardConfig()
    doc = _find_json_object(judge_text)
    if doc is None:
        raise JudgeParseError("no JSON object in judge verdict")
    total = 0
    for axis in cfg.judge_axes:
        if axis not in doc:
            raise JudgeParseError(f"judge verdict missing axis {axis!r}")
        v = doc[axis]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
            raise JudgeParseError(f"axis {axis!r} score must be an integer, got {v!r}")
        total += min(max(int(v), 0), cfg.judge_max_per_axis)
    return total / (len(cfg.judge_axes) * cfg.judge_max_per_axis)


def final_reward(
    acc: float, fmt: int, cfg: RewardConfig | None = None, task: str | None = None
) -> RewardBreakdown:
    """Blend accuracy and format into the final per-rollout reward."""
    cfg = cfg or RewardConfig()
    if not 0.0 <= acc <= 1.0:
        raise ValueError(f"accuracy reward must be in [0,1], got {acc}")
    if fmt not in (0, 1):
        raise ValueError(f"format reward must be 0 or 1, got {fmt}")
    a = cfg.weight_for(task)
    return RewardBreakdown(accuracy=acc, format=float(fmt), final=a * acc + (1 - a) * fmt)


def group_advantages(rewards: Sequence[float], cfg: RewardConfig | None = None) -> list[float]:
    """Group-relative advantages: (r - mean) / (population std + epsilon).

    A zero-variance group short-circuits to exact zeros.
    """
    cfg = cfg or RewardConfig()
    n = len(rewards)
    if n < 2:
        raise GroupTooSmall(f"need at least 2 rollouts per group, got {n}")
    for r in rewards:
        if not math.isfinite(r):
            raise ValueError(f"rewards must be finite, got {r}")
    if max(rewards) == min(rewards):
        return [0.0] * n
    mean = math.fsum(rewards) / n
    var = math.fsum((r - mean) ** 2 for r in rewards) / n
    denom = math.sqrt(var) + cfg.group_std_epsilon
    return [(r - mean) / denom for r in rewards]


def format_response(think: str, answer_body: str) -> str:
    """Wrap reasoning and an answer body in the canonical rollout shape."""
    for part in (think, answer_body):
        if any(tag in part for tag in ("<think>", "</think>", "<answer>", "</answer>")):
            raise ValueError("content must not contain think/answer tags")
    return f"<think>{think}</think><answer>{answer_body}</answer>"


def _fmt_coord(v: float) -> str:
    return str(int(v)) if float(v) == int(v) else f"{float(v):.2f}"


def serialize_boxes(boxes: Sequence[BBox]) -> str:
    """Boxes as `[x1, y1, x2, y2]` quadruples, space-separated."""
    if not boxes:
        raise ValueError("need at least one box")
    return " ".join(
        "[{}, {}, {}, {}]".format(*(_fmt_coord(v) for v in b.as_quad())) for b in boxes
    )


def serialize_code_answer(script: str) -> str:
    """Script wrapped in a single fenced block."""
    if "```" in script:
        raise ValueError("script must not contain a fence marker")
    return f"```python\n{script.strip()}\n```"


def _rollout_accuracy(
    task: str,
    raw_text: str,
    gt: dict[str, Any],
    cfg: RewardConfig,
    verdict: str | None,
) -> tuple[float, dict[str, Any]]:
    """Accuracy reward for one rollout plus any error annotations."""
    resp = RolloutResponse(task=task, raw_text=raw_text)
    notes: dict[str, Any] = {}
    if task == "qa":
        try:
            pred = extract_answer(resp)
        except NoAnswerBlock:
            return 0.0, {"extract_error": "no_answer_block"}
        return float(answer_accuracy(pred, gt["gt_answer"])), notes
    if task == "grounding":
        try:
            boxes = extract_answer(resp)
        except (NoAnswerBlock, UnparseableBox) as e:
            return 0.0, {"extract_error": type(e).__name__}
        gt_box = BBox.from_quad(gt["gt_box"])
        return grounding_reward(boxes, gt_box, cfg), notes
    # chart_to_code: judged externally; verdict text supplied per rollout.
    if verdict is None:
        raise SchemaViolation("judge_verdicts", "chart_to_code line without judge verdicts")
    try:
        return code_reward(verdict, cfg), notes
    except JudgeParseError as e:
        return 0.0, {"judge_error": str(e)}


def score_rollout_file(
    in_path: str | Path, out_path: str | Path, cfg: RewardConfig | None = None
) -> int:
    """Score a rollout JSONL file group by group; returns rollout line count.

    Input lines: {"record_id", "task", "rollouts": [text, ...]} plus the task's
    ground truth ("gt_answer" for qa, "gt_box" for grounding, aligned
    "judge_verdicts" for chart_to_code). Output: one line per rollout with
    accuracy, format, final, and the group-relative advantage; judge or
    extraction failures are scored 0 but annotated, never silent.
    """
    cfg = cfg or RewardConfig()
    in_path, out_path = Path(in_path), Path(out_path)
    n_out = 0
    with in_path.open("r", encoding="utf-8") as fin, out_path.open("w", encoding="utf-8") as fout:
        for lineno, line in enumerate(fin, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedJson(f"{in_path}:{lineno}: {e}") from e
            where = f"{in_path}:{lineno}"
            if not isinstance(doc, dict):
                raise SchemaViolation(where, "expected an object")
            task = doc.get("task")
            if task not in TASKS:
                raise SchemaViolation(where, f"unknown task {task!r}")
            rollouts = doc.get("rollouts")
            if not isinstance(rollouts, list) or not all(isinstance(r, str) for r in rollouts):
                raise SchemaViolation(where, "rollouts must be a list of strings")
            if task == "qa" and not isinstance(doc.get("gt_answer"), str):
                raise SchemaViolation(where, "qa line needs gt_answer")
            if task == "grounding":
                if not isinstance(doc.get("gt_box"), list):
                    raise SchemaViolation(where, "grounding line needs gt_box")
                try:
                    BBox.from_quad(doc["gt_box"])
                except (InvalidBox, TypeError) as e:
                    raise SchemaViolation(where, f"gt_box: {e}") from e
            verdicts = doc.get("judge_verdicts")
            if task == "chart_to_code":
                if not isinstance(verdicts, list) or len(verdicts) != len(rollouts):
                    raise SchemaViolation(where, "judge_verdicts must align with rollouts")

            rows = []
            for i, text in enumerate(rollouts):
                verdict = verdicts[i] if task == "chart_to_code" else None
                acc, notes = _rollout_accuracy(task, text, doc, cfg, verdict)
                fmt = format_reward(RolloutResponse(task=task, raw_text=text))
                breakdown = final_reward(acc, fmt, cfg, task=task)
                rows.append((breakdown, notes))
            advantages = group_advantages([b.final for b, _ in rows], cfg)
            for i, ((breakdown, notes), adv) in enumerate(zip(rows, advantages)):
                out_doc: dict[str, Any] = {
                    "record_id": doc.get("record_id"),
                    "rollout_index": i,
                    "accuracy": breakdown.accuracy,
                    "format": breakdown.format,
                    "final": breakdown.final,
                    "advantage": adv,
                }
                out_doc.update(notes)
                fout.write(json.dumps(out_doc, ensure_ascii=False) + "\n")
                n_out += 1
    return n_out
