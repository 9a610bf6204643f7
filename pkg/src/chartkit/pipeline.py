"""Dataset construction pipeline: images in, SFT and RL record splits out.

Stages per image: ingested, chart_filtered, coded, rendered,
distortion_filtered, evolved, located, qa_generated, qa_verified, curated.
The manifest is the ledger of how far each image got; stages only move
forward, so a crashed run can be re-driven from the same manifest and will
redo nothing that already completed. With the client in replay or stub mode
the whole run is a pure function of inputs and cache.

Every piece of randomness is derived from one root seed and a stage label, so
two runs over the same inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import random
import re
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from chartkit import annotation, element_map
from chartkit._util import derive_seed, sha256_hex
from chartkit.errors import (
    EvolutionFailed,
    InsufficientRecords,
    MalformedJson,
    NoAnswerBlock,
    NoCodeBlock,
    SchemaViolation,
    UnknownCategory,
    UnparseableBox,
)
from chartkit.model_client import Message, ModelClient, ModelRequest
from chartkit.prompts import PROMPT_VERSION, prompt_fingerprint, prompt_text, render
from chartkit.reward import (
    RolloutResponse,
    answer_accuracy,
    code_reward,
    extract_answer,
    grounding_reward,
)

log = logging.getLogger(__name__)

STAGES = (
    "ingested",
    "chart_filtered",
    "coded",
    "rendered",
    "distortion_filtered",
    "evolved",
    "located",
    "qa_generated",
    "qa_verified",
    "curated",
)

STATUSES = ("ok", "dropped", "failed")

# Example scripts shown to the evolution prompt: everything runs through
# standard artists (set_title, set_xlabel, legend) so locations are
# recoverable from the live figure.
EVOLVE_SEED_EXAMPLES = (
    """\
import matplotlib.pyplot as plt

fig, ax = plt.subplots()
ax.bar(["a", "b"], [1, 2])
ax.set_title("Counts")
ax.set_xlabel("Bucket")
ax.set_ylabel("Value")
ax.legend(["series"])
""",
    """\
import matplotlib.pyplot as plt

fig, (left, right) = plt.subplots(1, 2)
left.plot([0, 1], [0, 1], label="up")
left.set_title("Up")
left.set_xlabel("x")
left.set_ylabel("y")
left.legend()
right.scatter([0, 1], [1, 0], label="down")
right.set_title("Down")
right.set_xlabel("x")
right.legend()
""",
)


class Manifest:
    """Per-image stage ledger, persisted as one JSON document."""

    def __init__(self, path: str | Path, root_seed: int = 0, template_set_version: str = "v1"):
        self.path = Path(path)
        self.root_seed = root_seed
        self.template_set_version = template_set_version
        self.prompt_fingerprint = prompt_fingerprint()
        self.prompt_version = PROMPT_VERSION
        self.images: dict[str, dict[str, Any]] = {}
        self.qa_counters: dict[str, int] = {}
        self.notes: dict[str, Any] = {}

    # -- ledger --------------------------------------------------------------

    def add_image(self, image_id: str, source: str) -> None:
        if image_id not in self.images:
            self.images[image_id] = {
                "source": source,
                "stage": "ingested",
                "status": "ok",
                "detail": None,
            }

    def stage_index(self, image_id: str) -> int:
        return STAGES.index(self.images[image_id]["stage"])

    def advance(self, image_id: str, stage: str, status: str = "ok", detail: str | None = None) -> None:
        """Move an image forward; moving backwards is a bug, not a request."""
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        if status not in STATUSES:
            raise ValueError(f"unknown status {status!r}")
        entry = self.images[image_id]
        new, old = STAGES.index(stage), STAGES.index(entry["stage"])
        if new < old:
            raise ValueError(
                f"stage regression for {image_id}: {entry['stage']} -> {stage}"
            )
        entry["stage"] = stage
        entry["status"] = status
        entry["detail"] = detail

    def mark_failed(self, image_id: str, detail: str) -> None:
        self.images[image_id]["status"] = "failed"
        self.images[image_id]["detail"] = detail

    def ids_ready_for(self, stage: str) -> list[str]:
        """Images sitting exactly one stage before `stage`, still ok."""
        prev = STAGES[STAGES.index(stage) - 1]
        return sorted(
            i
            for i, e in self.images.items()
            if e["stage"] == prev and e["status"] == "ok"
        )

    def ids_at(self, stage: str, status: str = "ok") -> list[str]:
        return sorted(
            i
            for i, e in self.images.items()
            if e["stage"] == stage and e["status"] == status
        )

    def ids_at_or_past(self, stage: str) -> list[str]:
        idx = STAGES.index(stage)
        return sorted(
            i
            for i, e in self.images.items()
            if e["status"] == "ok" and STAGES.index(e["stage"]) >= idx
        )

    def counters(self) -> dict[str, int]:
        out = {stage: 0 for stage in STAGES}
        for e in self.images.values():
            # An image at stage k has completed every stage up to k.
            for s in STAGES[: STAGES.index(e["stage"]) + 1]:
                out[s] += 1
        return out

    def bump(self, counter: str, by: int = 1) -> None:
        self.qa_counters[counter] = self.qa_counters.get(counter, 0) + by

    # -- persistence ---------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": 1,
            "root_seed": self.root_seed,
            "template_set_version": self.template_set_version,
            "prompt_version": self.prompt_version,
            "prompt_fingerprint": self.prompt_fingerprint,
            "images": {k: self.images[k] for k in sorted(self.images)},
            "counters": self.counters(),
            "qa_counters": {k: self.qa_counters[k] for k in sorted(self.qa_counters)},
            "notes": self.notes,
        }

    def save(self) -> None:
        """Atomic write: readers see the old or the new ledger, never half."""
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(self.to_dict(), fh, indent=2, ensure_ascii=False)
                fh.write("\n")
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str | Path) -> "Manifest":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise MalformedJson(f"{path}: {e}") from e
        m = cls(
            path,
            root_seed=doc.get("root_seed", 0),
            template_set_version=doc.get("template_set_version", "v1"),
        )
        images = doc.get("images", {})
        if not isinstance(images, dict):
            raise SchemaViolation(str(path), "images must be an object")
        for image_id, entry in images.items():
            if entry.get("stage") not in STAGES or entry.get("status") not in STATUSES:
                raise SchemaViolation(f"{path}:{image_id}", "bad stage or status")
        m.images = images
        m.qa_counters = doc.get("qa_counters", {})
        m.notes = doc.get("notes", {})
        return m


@dataclass
class PipelineConfig:
    out_dir: Path
    seed: int = 0
    per_category: int = 3
    difficulty_attempts: int = 8
    rl_size: int | None = None  # default: half the curated records
    weight_mode: str = "one_minus_p"
    template_set_version: str = "v1"
    bridge_cmd: tuple[str, ...] = ("chart-bridge",)
    bridge_timeout_s: float = 60.0
    probe_temperature: float = 0.7
    # Pass-probability binarization per task for difficulty probes.
    probe_pass_thresholds: Mapping[str, float] = field(
        default_factory=lambda: {"qa": 1.0, "grounding": 0.3, "chart_to_code": 0.6}
    )

    def __post_init__(self) -> None:
        self.out_dir = Path(self.out_dir)
        if self.weight_mode not in ("one_minus_p", "p"):
            raise ValueError(f"unknown weight_mode {self.weight_mode!r}")
        if self.difficulty_attempts < 1:
            raise ValueError("difficulty_attempts must be >= 1")


@dataclass(frozen=True)
class RenderOutcome:
    """Parsed single-line JSON result from a bridge invocation."""

    status: str  # ok | error | timeout
    image_path: str | None
    locations_path: str | None
    image_width: int | None
    image_height: int | None
    stderr_excerpt: str


def parse_render_result(stdout: str) -> RenderOutcome:
    line = stdout.strip().splitlines()[-1] if stdout.strip() else ""
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedJson(f"bridge stdout is not JSON: {line[:200]!r}") from e
    if not isinstance(doc, dict) or doc.get("status") not in ("ok", "error", "timeout"):
        raise SchemaViolation("bridge", f"bad RenderResult: {line[:200]!r}")
    return RenderOutcome(
        status=doc["status"],
        image_path=doc.get("image_path"),
        locations_path=doc.get("locations_path"),
        image_width=doc.get("image_width"),
        image_height=doc.get("image_height"),
        stderr_excerpt=doc.get("stderr_excerpt", ""),
    )


def run_bridge(
    bridge_cmd: Sequence[str],
    script_path: Path,
    out_dir: Path,
    timeout_s: float,
    emit_locations: bool,
) -> RenderOutcome:
    """Invoke the render bridge on one script and parse its result line."""
    out_dir.mkdir(parents=True, exist_ok=True)
    argv = list(bridge_cmd) + [
        "--script",
        str(script_path),
        "--out",
        str(out_dir),
        "--timeout",
        str(int(timeout_s)),
    ]
    if emit_locations:
        argv.append("--emit-locations")
    try:
        proc = subprocess.run(
            argv,
            capture_output=True,
            text=True,
            timeout=timeout_s + 30,  # the bridge enforces the real limit
        )
    except subprocess.TimeoutExpired:
        return RenderOutcome("timeout", None, None, None, None, "bridge process hung")
    except FileNotFoundError as e:
        return RenderOutcome("error", None, None, None, None, f"bridge not found: {e}")
    try:
        return parse_render_result(proc.stdout)
    except (MalformedJson, SchemaViolation):
        excerpt = (proc.stderr or proc.stdout)[-400:]
        return RenderOutcome("error", None, None, None, None, excerpt)


def _extract_code_block(text: str) -> str:
    """Longest fenced block wins; concatenating blocks is never right."""
    blocks = re.findall(r"```[A-Za-z0-9_+-]*\n(.*?)```", text, re.DOTALL)
    blocks = [b for b in blocks if b.strip()]
    if not blocks:
        raise NoCodeBlock("model response contains no fenced code block")
    return max(blocks, key=len)


class Pipeline:
    def __init__(self, client: ModelClient, cfg: PipelineConfig, manifest: Manifest | None = None):
        self.client = client
        self.cfg = cfg
        self.out = cfg.out_dir
        manifest_path = self.out / "manifest.json"
        if manifest is not None:
            self.manifest = manifest
        elif manifest_path.exists():
            self.manifest = Manifest.load(manifest_path)
        else:
            self.manifest = Manifest(
                manifest_path,
                root_seed=cfg.seed,
                template_set_version=cfg.template_set_version,
            )
        for sub in ("images", "scripts", "renders", "evolved", "locations", "qa", "splits"):
            (self.out / sub).mkdir(parents=True, exist_ok=True)

    # -- small helpers -------------------------------------------------------

    def _image_path(self, image_id: str) -> Path:
        return self.out / "images" / f"{image_id}.png"

    def _image_ref(self, image_id: str) -> str:
        return f"images/{image_id}.png"

    def _script_path(self, image_id: str) -> Path:
        return self.out / "scripts" / f"{image_id}.py"

    def _evolved_path(self, image_id: str) -> Path:
        return self.out / "evolved" / f"{image_id}.py"

    def _locations_path(self, image_id: str) -> Path:
        return self.out / "locations" / f"{image_id}.json"

    def _qa_path(self, image_id: str) -> Path:
        return self.out / "qa" / f"{image_id}.json"

    def _ask(self, purpose: str, text: str, image: str | None = None, **kw: Any) -> str:
        req = ModelRequest(
            purpose=purpose, messages=(Message("user", text, image),), **kw
        )
        return self.client.complete(req).text

    # -- stages --------------------------------------------------------------

    def ingest(self, sources: Iterable[str | Path]) -> list[str]:
        """Copy source images in; the image id is the content hash, so
        re-ingesting the same file is a no-op."""
        ids = []
        for src in sorted(Path(s) for s in sources):
            try:
                data = src.read_bytes()
            except OSError as e:
                log.warning("skipping unreadable image %s: %s", src, e)
                continue
            image_id = sha256_hex(data)[:16]
            dest = self._image_path(image_id)
            if not dest.exists():
                dest.write_bytes(data)
            self.manifest.add_image(image_id, str(src))
            ids.append(image_id)
        self.manifest.save()
        return ids

    def filter_charts(self) -> None:
        for image_id in self.manifest.ids_ready_for("chart_filtered"):
            source = self.manifest.images[image_id]["source"]
            try:
                verdict = self._ask("filter", prompt_text("filter"), source).strip().lower()
            except Exception as e:  # client errors isolate to the image
                self.manifest.mark_failed(image_id, f"filter: {e}")
                continue
            if verdict == "chart":
                self.manifest.advance(image_id, "chart_filtered")
            elif verdict == "non-chart":
                self.manifest.advance(image_id, "chart_filtered", "dropped", "non-chart")
            else:
                self.manifest.mark_failed(image_id, f"filter verdict {verdict!r}")
        self.manifest.save()

    def chart_to_code(self) -> None:
        for image_id in self.manifest.ids_ready_for("coded"):
            try:
                text = self._ask(
                    "chart_to_code", prompt_text("chart_to_code"), self._image_ref(image_id)
                )
                script = _extract_code_block(text)
            except NoCodeBlock as e:
                self.manifest.mark_failed(image_id, str(e))
                continue
            except Exception as e:
                self.manifest.mark_failed(image_id, f"chart_to_code: {e}")
                continue
            self._script_path(image_id).write_text(script, encoding="utf-8")
            self.manifest.advance(image_id, "coded")
        self.manifest.save()

    def render_reproductions(self) -> None:
        for image_id in self.manifest.ids_ready_for("rendered"):
            outcome = run_bridge(
                self.cfg.bridge_cmd,
                self._script_path(image_id),
                self.out / "renders" / image_id,
                self.cfg.bridge_timeout_s,
                emit_locations=False,
            )
            if outcome.status == "ok":
                self.manifest.advance(image_id, "rendered")
            else:
                # Render failure means the reproduction is unusable; the
                # distortion filter would drop it anyway, so drop here
                # without spending a client call.
                self.manifest.advance(
                    image_id, "rendered", "dropped", f"render {outcome.status}: {outcome.stderr_excerpt[:120]}"
                )
        self.manifest.save()

    def filter_distorted(self) -> None:
        for image_id in self.manifest.ids_ready_for("distortion_filtered"):
            render_png = self.out / "renders" / image_id / "chart.png"
            source = self.manifest.images[image_id]["source"]
            req = ModelRequest(
                purpose="filter",
                messages=(
                    Message("user", prompt_text("distortion"), source),
                    Message("user", "Reproduction:", str(render_png)),
                ),
            )
            try:
                verdict = self.client.complete(req).text.strip().lower()
            except Exception as e:
                self.manifest.mark_failed(image_id, f"distortion filter: {e}")
                continue
            if verdict == "faithful":
                self.manifest.advance(image_id, "distortion_filtered")
            elif verdict == "distorted":
                self.manifest.advance(image_id, "distortion_filtered", "dropped", "distorted")
            else:
                self.manifest.mark_failed(image_id, f"distortion verdict {verdict!r}")
        self.manifest.save()

    def evolve(self) -> None:
        examples = "\n\n".join(f"```python\n{ex}```" for ex in EVOLVE_SEED_EXAMPLES)
        for image_id in self.manifest.ids_ready_for("evolved"):
            script = self._script_path(image_id).read_text(encoding="utf-8")
            try:
                evolved, locations_raw, retries = self._evolve_one(image_id, script, examples)
            except EvolutionFailed as e:
                self.manifest.mark_failed(image_id, str(e))
                continue
            except Exception as e:
                self.manifest.mark_failed(image_id, f"evolve: {e}")
                continue
            self._evolved_path(image_id).write_text(evolved, encoding="utf-8")
            self.manifest.advance(image_id, "evolved", detail=f"retries={retries}")
            # The accepted dry run already produced a validated locations
            # file; stamp our image id into it and the image is located.
            located = element_map.parse_location_file(locations_raw)
            located = dataclasses.replace(located, image_id=image_id)
            self._locations_path(image_id).write_bytes(element_map.serialize_location_map(located))
            self.manifest.advance(image_id, "located")
        self.manifest.save()

    def _evolve_one(self, image_id: str, script: str, examples: str) -> tuple[str, bytes, int]:
        """Evolve with up to 2 repair retries; returns (script, locations, retries)."""
        prompt = render("evolve", script=script, examples=examples)
        error_text = None
        for attempt in range(3):
            if error_text is not None:
                prompt = (
                    render("evolve", script=script, examples=examples)
                    + f"\n\nYour previous attempt failed with:\n{error_text}\nFix it."
                )
            try:
                evolved = _extract_code_block(self._ask("evolve", prompt, self._image_ref(image_id)))
            except NoCodeBlock as e:
                error_text = str(e)
                continue
            workdir = self.out / "renders" / f"{image_id}.evolve{attempt}"
            outcome = run_bridge(
                self.cfg.bridge_cmd,
                self._write_candidate(image_id, attempt, evolved),
                workdir,
                self.cfg.bridge_timeout_s,
                emit_locations=True,
            )
            if outcome.status == "ok" and outcome.locations_path:
                try:
                    raw = Path(outcome.locations_path).read_bytes()
                    element_map.parse_location_file(raw)
                except Exception as e:
                    error_text = f"locations file invalid: {e}"
                    continue
                return evolved, raw, attempt
            error_text = outcome.stderr_excerpt or f"bridge status {outcome.status}"
        raise EvolutionFailed(f"{image_id}: no valid evolved script after 3 attempts: {error_text}")

    def _write_candidate(self, image_id: str, attempt: int, script: str) -> Path:
        path = self.out / "renders" / f"{image_id}.evolve{attempt}.py"
        path.write_text(script, encoding="utf-8")
        return path

    def generate_and_verify_qa(self) -> None:
        for image_id in self.manifest.ids_ready_for("qa_generated"):
            script = self._evolved_path(image_id).read_text(encoding="utf-8")
            try:
                qa_text = self._ask(
                    "qa_generate", render("qa_generate", script=script), self._image_ref(image_id)
                )
                parsed = annotation.parse_qa_generation(qa_text)
            except Exception as e:
                self.manifest.mark_failed(image_id, f"qa_generate: {e}")
                continue
            self.manifest.bump("dropped_malformed", parsed.dropped_malformed)
            self.manifest.bump("dropped_truncated", parsed.dropped_truncated)
            self.manifest.advance(image_id, "qa_generated")

            pairs_doc = [
                {"question": p.question, "answer": p.answer, "scope": p.scope}
                for p in parsed.pairs
            ]
            try:
                verdict_text = self._ask(
                    "verify", render("verify", pairs=pairs_doc), self._image_ref(image_id)
                )
                verdicts = json.loads(verdict_text) if verdict_text.strip().startswith("[") else None
            except Exception as e:
                self.manifest.mark_failed(image_id, f"verify: {e}")
                continue
            if not isinstance(verdicts, list) or len(verdicts) != len(parsed.pairs):
                # Alignment is load-bearing: with it broken we cannot tell
                # which verdict belongs to which pair, so the batch goes.
                self.manifest.bump("misaligned_batches")
                self.manifest.advance(
                    image_id, "qa_verified", detail="qa batch rejected: verdict misalignment"
                )
                self._qa_path(image_id).write_text(
                    json.dumps({"accepted": [], "rejected": len(parsed.pairs)}, ensure_ascii=False)
                    + "\n",
                    encoding="utf-8",
                )
                continue
            accepted = []
            for pair, verdict in zip(parsed.pairs, verdicts):
                if not isinstance(verdict, dict) or not all(
                    isinstance(verdict.get(k), bool)
                    for k in ("groundable", "answerable", "correct")
                ):
                    self.manifest.bump("malformed_verdicts")
                    continue
                if not verdict["groundable"]:
                    self.manifest.bump("hallucinated")
                elif not verdict["answerable"]:
                    self.manifest.bump("unanswerable")
                elif not verdict["correct"]:
                    self.manifest.bump("incorrect")
                else:
                    accepted.append(pair)
            self._qa_path(image_id).write_text(
                json.dumps(
                    {
                        "accepted": [
                            {"question": p.question, "answer": p.answer, "scope": p.scope}
                            for p in accepted
                        ],
                        "rejected": len(parsed.pairs) - len(accepted),
                    },
                    ensure_ascii=False,
                )
                + "\n",
                encoding="utf-8",
            )
            self.manifest.advance(image_id, "qa_verified")
        self.manifest.save()

    # -- records -------------------------------------------------------------

    def build_records(self) -> list[annotation.DatasetRecord]:
        """All dataset records for images that finished verification."""
        records: list[annotation.DatasetRecord] = []
        for image_id in self.manifest.ids_at_or_past("qa_verified"):
            image_ref = self._image_ref(image_id)
            located = element_map.parse_location_file(self._locations_path(image_id).read_bytes())
            seed = derive_seed(self.manifest.root_seed, f"sample:{image_id}")
            for entry in element_map.sample_elements(located, self.cfg.per_category, seed):
                try:
                    records.append(
                        annotation.grounding_record(entry, image_ref, self.cfg.template_set_version)
                    )
                except UnknownCategory:
                    self.manifest.bump("unregistered_other")
            script = self._script_path(image_id).read_text(encoding="utf-8")
            records.append(
                annotation.chart_to_code_record(script, image_ref, self.cfg.template_set_version)
            )
            qa_doc = json.loads(self._qa_path(image_id).read_text(encoding="utf-8"))
            for pair in qa_doc["accepted"]:
                records.append(
                    annotation.qa_record(
                        pair["question"], pair["answer"], pair["scope"], image_ref,
                        provenance={"prompt_fingerprint": self.manifest.prompt_fingerprint},
                    )
                )
        # Drop exact duplicates (same content hash) while keeping order.
        seen: set[str] = set()
        unique = []
        for r in records:
            if r.record_id in seen:
                self.manifest.bump("duplicate_records")
                continue
            seen.add(r.record_id)
            unique.append(r)
        return unique

    # -- difficulty ----------------------------------------------------------

    def estimate_difficulty(self, record: annotation.DatasetRecord, attempts: int | None = None) -> float:
        """Pass probability over K probe attempts; failures count as wrong."""
        k = attempts or self.cfg.difficulty_attempts
        if k < 1:
            raise ValueError("attempts must be >= 1")
        correct = 0
        for i in range(k):
            # The attempt index is part of the prompt so each probe has its
            # own idempotency key and the replay cache keeps all K samples.
            text = render("difficulty_probe", question=record.question) + f"\n[sample {i}]"
            try:
                out = self._ask(
                    "difficulty_probe",
                    text,
                    record.image_ref,
                    temperature=self.cfg.probe_temperature,
                )
            except Exception:
                self.manifest.bump("probe_failures")
                continue
            if self._probe_passes(record, out):
                correct += 1
        return correct / k

    def _probe_passes(self, record: annotation.DatasetRecord, probe_text: str) -> bool:
        threshold = self.cfg.probe_pass_thresholds.get(record.task, 1.0)
        resp = RolloutResponse(task=record.task, raw_text=probe_text)
        try:
            pred = extract_answer(resp)
        except (NoAnswerBlock, UnparseableBox):
            return False
        if record.task == "qa":
            return bool(answer_accuracy(pred, record.answer_text or ""))
        if record.task == "grounding":
            return grounding_reward(pred, record.answer_boxes[0]) >= threshold
        # chart_to_code: ask the judge to grade the probe's code.
        try:
            verdict = self._ask(
                "judge",
                render("judge", reference=record.answer_script or "", candidate=pred),
            )
            return code_reward(verdict) >= threshold
        except Exception:
            return False

    # -- curation ------------------------------------------------------------

    def curate_splits(
        self,
        records: Sequence[annotation.DatasetRecord],
        difficulties: Mapping[str, float],
        rl_size: int | None = None,
        seed: int | None = None,
    ) -> tuple[list[annotation.DatasetRecord], list[annotation.DatasetRecord]]:
        """SFT = everything; RL = difficulty-weighted sample without replacement."""
        sft = list(records)
        if not sft:
            raise InsufficientRecords("no records to curate")
        n = rl_size if rl_size is not None else (self.cfg.rl_size or max(1, len(sft) // 2))
        if n > len(sft):
            raise InsufficientRecords(f"rl_size {n} exceeds record count {len(sft)}")
        weights = []
        for r in sft:
            p = difficulties.get(r.record_id, 0.0)
            w = (1.0 - p) if self.cfg.weight_mode == "one_minus_p" else p
            weights.append(max(0.01, w))
        rng = random.Random(
            seed if seed is not None else derive_seed(self.manifest.root_seed, "curate")
        )
        picked = weighted_sample_indices(weights, n, rng)
        rl = [annotation.with_split(sft[i], "rl") for i in picked]
        return sft, rl

    # -- driver --------------------------------------------------------------

    def run(self, sources: Iterable[str | Path]) -> dict[str, Any]:
        """Drive every stage and write splits; returns a small summary."""
        self.ingest(sources)
        self.filter_charts()
        self.chart_to_code()
        self.render_reproductions()
        self.filter_distorted()
        self.evolve()
        self.generate_and_verify_qa()

        records = self.build_records()
        difficulties = {r.record_id: self.estimate_difficulty(r) for r in records}
        sft, rl = self.curate_splits(records, difficulties)
        annotation.write_records(sft, self.out / "splits" / "sft.jsonl")
        annotation.write_records(rl, self.out / "splits" / "rl.jsonl")
        (self.out / "splits" / "difficulty.json").write_text(
            json.dumps({k: difficulties[k] for k in sorted(difficulties)}, indent=2) + "\n"
        )
        for image_id in self.manifest.ids_at_or_past("qa_verified"):
            self.manifest.advance(image_id, "curated")
        self.manifest.save()
        return {
            "records": len(sft),
            "rl_records": len(rl),
            "images": self.manifest.counters(),
            "qa_counters": dict(self.manifest.qa_counters),
        }


def weighted_sample_indices(weights: Sequence[float], n: int, rng: random.Random) -> list[int]:
    """Weighted sampling without replacement (top-n by the u^(1/w) key trick).

    Selection probabilities follow successive weighted draws; equal weights
    degenerate to uniform sampling. Deterministic for a seeded rng.
    """
    if n > len(weights):
        raise InsufficientRecords(f"cannot draw {n} of {len(weights)}")
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    keyed = []
    for i, w in enumerate(weights):
        u = rng.random()
        keyed.append((u ** (1.0 / w), i))
    keyed.sort(key=lambda t: (-t[0], t[1]))
    return [i for _, i in keyed[:n]]
