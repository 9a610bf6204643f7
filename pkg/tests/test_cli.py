"""CLI tests running main() in process."""

import json
import sys
from pathlib import Path

import pytest

from chartkit.cli import main

STUB_BRIDGE = Path(__file__).parent / "stub_bridge.py"
BRIDGE_CMD = f"{sys.executable} {STUB_BRIDGE}"


def test_no_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 2


def test_unknown_mode_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["build-dataset", "--images", str(tmp_path), "--out", str(tmp_path), "--mode", "psychic"])
    assert e.value.code == 2


def test_render_ok(tmp_path, capsys):
    script = tmp_path / "s.py"
    script.write_text("x = 1\n")
    rc = main(
        ["render", "--script", str(script), "--out", str(tmp_path / "o"),
         "--bridge-cmd", BRIDGE_CMD, "--emit-locations"]
    )
    assert rc == 0
    doc = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert doc["status"] == "ok"
    assert doc["locations_path"]


def test_render_failure_exit_one(tmp_path, capsys):
    script = tmp_path / "s.py"
    script.write_text("BRIDGE_FAIL = True\n")
    rc = main(["render", "--script", str(script), "--out", str(tmp_path / "o"), "--bridge-cmd", BRIDGE_CMD])
    assert rc == 1


def test_reward_round_trip(tmp_path, capsys):
    rollouts = tmp_path / "rollouts.jsonl"
    line = {
        "record_id": "r1",
        "task": "qa",
        "gt_answer": "4",
        "rollouts": [
            "<think>t</think><answer>4</answer>",
            "<think>t</think><answer>5</answer>",
        ],
    }
    rollouts.write_text(json.dumps(line) + "\n")
    out = tmp_path / "scores.jsonl"
    rc = main(["reward", "--rollouts", str(rollouts), "--out", str(out)])
    assert rc == 0
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(rows) == 2
    assert rows[0]["final"] == 1.0
    assert "scored 2 rollouts" in capsys.readouterr().out


def test_reward_missing_file_exit_one(tmp_path, capsys):
    rc = main(["reward", "--rollouts", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_evaluate_prints_table_and_writes_json(tmp_path, capsys):
    bench = tmp_path / "bench.jsonl"
    bench.write_text(
        "\n".join(
            [
                json.dumps(
                    {"question_id": "q1", "kind": "grounding", "image_ref": "img.png", "question": "Where is the title?", "gt_boxes": [[0, 0, 10, 10]]}
                ),
                json.dumps(
                    {
                        "question_id": "q2",
                        "kind": "qa_grounding",
                        "image_ref": "img.png",
                        "question": "How many bars?",
                        "gt_boxes": [[20, 20, 30, 30]],
                        "gt_answer": "7",
                    }
                ),
            ]
        )
        + "\n"
    )
    preds = tmp_path / "preds.jsonl"
    preds.write_text(
        "\n".join(
            [
                json.dumps({"question_id": "q1", "boxes": [[0, 0, 10, 10]], "answer": None}),
                json.dumps({"question_id": "q2", "boxes": [[20, 20, 30, 30]], "answer": "7"}),
            ]
        )
        + "\n"
    )
    report_path = tmp_path / "report.json"
    rc = main(
        ["evaluate", "--benchmark", str(bench), "--predictions", str(preds), "--json", str(report_path)]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "recall@0.3" in out
    doc = json.loads(report_path.read_text())
    assert doc["recall_at_threshold"] == 1.0
    assert doc["qa_accuracy"] == 1.0


def test_build_dataset_and_stats(tmp_path, capsys):
    images = tmp_path / "imgs"
    images.mkdir()
    for name in ("a.png", "b.png"):
        (images / name).write_bytes(b"\x89PNG\r\n\x1a\n" + name.encode())
    (images / "notes.txt").write_text("ignored")
    out = tmp_path / "data"
    rc = main(
        ["build-dataset", "--images", str(images), "--out", str(out),
         "--bridge-cmd", BRIDGE_CMD, "--rl-size", "5", "--seed", "3"]
    )
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["images"]["curated"] == 2
    assert (out / "splits" / "sft.jsonl").exists()
    assert len((out / "splits" / "rl.jsonl").read_text().splitlines()) == 5

    rc = main(["stats", "--out", str(out)])
    assert rc == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["counters"]["curated"] == 2


def test_build_dataset_empty_dir_fails(tmp_path, capsys):
    images = tmp_path / "imgs"
    images.mkdir()
    rc = main(["build-dataset", "--images", str(images), "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "no images" in capsys.readouterr().err
