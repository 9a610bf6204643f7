"""Child-process program: run one plotting script and dump its artifacts.

This is the inside of the sandbox. The parent (runner) enforces the wall
clock; here we pin the backend, DPI, and RNG seeds for reproducible output,
close off the network, cap CPU as a backstop, and confine writes to the work
directory. Untrusted script text runs only in this process, never in the
parent.

Exit 0 with chart.png (+ locations.json + meta.json) in the workdir, or a
nonzero exit with the failure on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import socket
import sys
from pathlib import Path

RENDER_DPI = 100


class _NetworkOff(socket.socket):
    def __init__(self, *a, **kw):
        raise OSError("network access is disabled inside the render sandbox")


def _lock_down(workdir: Path, cpu_seconds: int) -> None:
    os.chdir(workdir)
    socket.socket = _NetworkOff  # type: ignore[misc]
    try:
        import resource

        resource.setrlimit(resource.RLIMIT_CPU, (cpu_seconds, cpu_seconds))
    except (ImportError, ValueError, OSError):
        pass  # best effort; the parent's wall clock still rules
    random.seed(0)
    try:
        import numpy

        numpy.random.seed(0)
    except ImportError:
        pass


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--script", required=True)
    ap.add_argument("--workdir", required=True)
    ap.add_argument("--image-id", default=None)
    ap.add_argument("--cpu-seconds", type=int, default=70)
    ap.add_argument("--emit-locations", action="store_true")
    args = ap.parse_args()

    script_path = Path(args.script).resolve()
    workdir = Path(args.workdir).resolve()
    workdir.mkdir(parents=True, exist_ok=True)
    script_text = script_path.read_text(encoding="utf-8")

    import matplotlib

    matplotlib.use("Agg", force=True)
    matplotlib.rcParams["figure.dpi"] = RENDER_DPI
    matplotlib.rcParams["savefig.dpi"] = "figure"

    _lock_down(workdir, args.cpu_seconds)

    glb = {"__name__": "__main__", "__file__": str(script_path)}
    exec(compile(script_text, str(script_path), "exec"), glb)

    import matplotlib.pyplot as plt

    nums = plt.get_fignums()
    if not nums:
        print("script created no figure", file=sys.stderr)
        return 1
    fig = plt.figure(nums[-1])
    fig.canvas.draw()
    fig.savefig(workdir / "chart.png", dpi="figure")
    width, height = fig.canvas.get_width_height()

    if args.emit_locations:
        from chartbridge.extract import extract_locations

        doc = extract_locations(fig, args.image_id or script_path.stem)
        (workdir / "locations.json").write_text(
            json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    (workdir / "meta.json").write_text(
        json.dumps({"image_width": int(width), "image_height": int(height)}) + "\n",
        encoding="utf-8",
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
