"""chart-bridge executable.

Exit codes: 0 rendered ok, 1 script or harness error, 124 timeout. Stdout is
exactly one JSON line describing the result either way.
"""

from __future__ import annotations

import argparse
import json
import sys

from chartbridge.runner import render

EXIT_BY_STATUS = {"ok": 0, "error": 1, "timeout": 124}


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="chart-bridge")
    ap.add_argument("--script", required=True, help="plotting script to execute")
    ap.add_argument("--out", required=True, help="work directory for artifacts")
    ap.add_argument("--timeout", type=float, default=60.0)
    ap.add_argument("--emit-locations", action="store_true")
    ap.add_argument("--image-id", default=None)
    args = ap.parse_args(argv)

    result = render(
        args.script,
        args.out,
        timeout_s=args.timeout,
        emit_locations=args.emit_locations,
        image_id=args.image_id,
    )
    print(json.dumps(result.to_dict()))
    return EXIT_BY_STATUS[result.status]


if __name__ == "__main__":
    sys.exit(main())
