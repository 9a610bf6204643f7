"""Parent-side render driver: one subprocess per job, wall-clock enforced."""

from __future__ import annotations

import dataclasses
import json
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

STDERR_EXCERPT_CHARS = 400


@dataclass(frozen=True)
class RenderResult:
    status: str  # ok | error | timeout
    image_path: str | None = None
    locations_path: str | None = None
    image_width: int | None = None
    image_height: int | None = None
    stderr_excerpt: str = ""

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def render(
    script_path: str | Path,
    workdir: str | Path,
    timeout_s: float = 60.0,
    emit_locations: bool = False,
    image_id: str | None = None,
) -> RenderResult:
    """Run one script in a sandboxed child; never raises for script faults."""
    script_path = Path(script_path)
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    argv = [
        sys.executable,
        "-m",
        "chartbridge._harness",
        "--script",
        str(script_path),
        "--workdir",
        str(workdir),
        "--cpu-seconds",
        str(int(timeout_s) + 10),
    ]
    if emit_locations:
        argv.append("--emit-locations")
    if image_id:
        argv += ["--image-id", image_id]

    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout_s)
    except subprocess.TimeoutExpired:
        return RenderResult("timeout", stderr_excerpt=f"no result within {timeout_s:g}s")
    if proc.returncode != 0:
        excerpt = (proc.stderr or proc.stdout or "nonzero exit").strip()
        return RenderResult("error", stderr_excerpt=excerpt[-STDERR_EXCERPT_CHARS:])

    image = workdir / "chart.png"
    meta_path = workdir / "meta.json"
    if not image.exists() or not meta_path.exists():
        return RenderResult("error", stderr_excerpt="harness exited 0 without artifacts")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    if meta.get("image_width", 0) <= 0 or meta.get("image_height", 0) <= 0:
        return RenderResult("error", stderr_excerpt=f"bad image dimensions: {meta}")

    locations = workdir / "locations.json"
    return RenderResult(
        status="ok",
        image_path=str(image),
        locations_path=str(locations) if emit_locations and locations.exists() else None,
        image_width=meta["image_width"],
        image_height=meta["image_height"],
    )
