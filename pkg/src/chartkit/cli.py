"""Command-line front end.

Exit codes: 0 success, 1 operational failure, 2 usage errors (argparse).
"""

from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
from pathlib import Path

from chartkit import evaluator, reward
from chartkit.errors import ChartkitError
from chartkit.model_client import ModelClient
from chartkit.pipeline import Manifest, Pipeline, PipelineConfig, run_bridge

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _cmd_build_dataset(args: argparse.Namespace) -> int:
    images = sorted(
        p for p in Path(args.images).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not images:
        print(f"error: no images under {args.images}", file=sys.stderr)
        return 1
    cfg = PipelineConfig(
        out_dir=Path(args.out),
        seed=args.seed,
        bridge_cmd=tuple(shlex.split(args.bridge_cmd)),
        rl_size=args.rl_size,
        weight_mode=args.weight_mode,
        per_category=args.per_category,
    )
    with ModelClient(mode=args.mode, cache_dir=args.cache_dir) as client:
        summary = Pipeline(client, cfg).run(images)
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    outcome = run_bridge(
        tuple(shlex.split(args.bridge_cmd)),
        Path(args.script),
        Path(args.out),
        args.timeout,
        emit_locations=args.emit_locations,
    )
    print(
        json.dumps(
            {
                "status": outcome.status,
                "image_path": outcome.image_path,
                "locations_path": outcome.locations_path,
                "image_width": outcome.image_width,
                "image_height": outcome.image_height,
                "stderr_excerpt": outcome.stderr_excerpt,
            }
        )
    )
    return 0 if outcome.status == "ok" else 1


def _cmd_reward(args: argparse.Namespace) -> int:
    n = reward.score_rollout_file(args.rollouts, args.out)
    print(f"scored {n} rollouts -> {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    bench = evaluator.load_benchmark(args.benchmark)
    preds = evaluator.load_predictions(args.predictions)
    report = evaluator.evaluate(bench, preds, threshold=args.threshold)
    print(evaluator.format_report_table(report))
    if args.json:
        Path(args.json).write_text(
            json.dumps(evaluator.report_to_dict(report), indent=2) + "\n", encoding="utf-8"
        )
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    manifest = Manifest.load(Path(args.out) / "manifest.json")
    doc = manifest.to_dict()
    print(json.dumps({"counters": doc["counters"], "qa_counters": doc["qa_counters"]}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chartkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build-dataset", help="run the dataset pipeline over an image directory")
    b.add_argument("--images", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--mode", choices=("stub", "live", "replay"), default="stub")
    b.add_argument("--cache-dir", default=None)
    b.add_argument("--bridge-cmd", default="chart-bridge")
    b.add_argument("--rl-size", type=int, default=None)
    b.add_argument("--weight-mode", choices=("one_minus_p", "p"), default="one_minus_p")
    b.add_argument("--per-category", type=int, default=3)
    b.set_defaults(fn=_cmd_build_dataset)

    r = sub.add_parser("render", help="render one script through the bridge")
    r.add_argument("--script", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--timeout", type=int, default=60)
    r.add_argument("--emit-locations", action="store_true")
    r.add_argument("--bridge-cmd", default="chart-bridge")
    r.set_defaults(fn=_cmd_render)

    w = sub.add_parser("reward", help="score a rollout file")
    w.add_argument("--rollouts", required=True)
    w.add_argument("--out", required=True)
    w.set_defaults(fn=_cmd_reward)

    e = sub.add_parser("evaluate", help="score predictions against a benchmark")
    e.add_argument("--benchmark", required=True)
    e.add_argument("--predictions", required=True)
    e.add_argument("--threshold", type=float, default=evaluator.DEFAULT_IOU_THRESHOLD)
    e.add_argument("--json", default=None, help="also write the report as JSON here")
    e.set_defaults(fn=_cmd_evaluate)

    s = sub.add_parser("stats", help="print manifest counters for a dataset directory")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_stats)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        return args.fn(args)
    except ChartkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
