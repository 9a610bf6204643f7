import json

import pytest

from chartkit import annotation as an
from chartkit.element_map import ElementCategory, LabeledBox
from chartkit.errors import (
    EmptyScript,
    NoParseableContent,
    SchemaViolation,
    UnknownCategory,
)
from chartkit.geometry import BBox


def title_box(text="Revenue"):
    return LabeledBox(BBox(100, 10, 300, 30), text, ElementCategory.TITLE)


class TestDatasetRecord:
    def test_payload_exclusivity(self):
        with pytest.raises(SchemaViolation):
            an.DatasetRecord(
                record_id="r",
                task="qa",
                image_ref="i",
                question="q",
                answer_text="a",
                answer_script="code",
                reasoning_scope="global",
            )

    def test_payload_must_match_task(self):
        with pytest.raises(SchemaViolation):
            an.DatasetRecord(record_id="r", task="qa", image_ref="i", question="q", answer_script="s")

    def test_qa_requires_scope(self):
        with pytest.raises(SchemaViolation):
            an.DatasetRecord(record_id="r", task="qa", image_ref="i", question="q", answer_text="a")

    def test_non_qa_forbids_scope(self):
        with pytest.raises(SchemaViolation):
            an.DatasetRecord(
                record_id="r",
                task="grounding",
                image_ref="i",
                question="q",
                answer_boxes=(BBox(0, 0, 1, 1),),
                reasoning_scope="global",
            )

    def test_empty_boxes_rejected(self):
        with pytest.raises(SchemaViolation):
            an.DatasetRecord(record_id="r", task="grounding", image_ref="i", question="q", answer_boxes=())


class TestGroundingRecord:
    def test_title_golden(self):
        r = an.grounding_record((0, title_box()), "img-001.png")
        assert r.question == "Where is the title of subplot 0? Answer with a bounding box."
        assert r.task == "grounding"
        assert [b.as_quad() for b in r.answer_boxes] == [[100, 10, 300, 30]]
        assert r.record_id == "8db4f872cb1c9223"
        assert r.provenance["template_set_version"] == "v1"

    def test_tick_embeds_text_and_axis(self):
        lb = LabeledBox(BBox(80, 420, 120, 435), "2020", ElementCategory.X_TICK, axis="Year")
        r = an.grounding_record((1, lb), "img-001.png")
        assert (
            r.question
            == 'Where is the tick labeled "2020" on the x-axis "Year" of subplot 1? Answer with a bounding box.'
        )
        assert r.record_id == "3c24edd7bb7f4d43"

    def test_unregistered_other_category(self):
        lb = LabeledBox(BBox(0, 0, 5, 5), "", ElementCategory.OTHER, subcategory="colorbar")
        with pytest.raises(UnknownCategory):
            an.grounding_record((0, lb), "img.png")

    def test_deterministic(self):
        a = an.grounding_record((0, title_box()), "img.png")
        b = an.grounding_record((0, title_box()), "img.png")
        assert a == b

    def test_variant_depends_on_content_not_image(self):
        a = an.grounding_record((0, title_box()), "img-a.png")
        b = an.grounding_record((0, title_box()), "img-b.png")
        assert a.question == b.question
        assert a.record_id != b.record_id

    def test_both_variants_reachable(self):
        variants = set()
        for sp in range(6):
            for text in ("Revenue", "Cost", "Sales", "Altitude"):
                _, v = an.render_grounding_question(sp, title_box(text))
                variants.add(v)
        assert variants == {0, 1}

    def test_unknown_template_version(self):
        with pytest.raises(ValueError):
            an.grounding_record((0, title_box()), "img.png", template_set_version="v999")


class TestChartToCodeRecord:
    SCRIPT = "import matplotlib.pyplot as plt\nplt.plot([1,2])\n"

    def test_verbatim_script(self):
        r = an.chart_to_code_record(self.SCRIPT, "img-001.png")
        assert r.answer_script == self.SCRIPT
        assert r.task == "chart_to_code"
        assert r.record_id == "9107dec39d9f5aa1"
        assert (
            r.question
            == "Write the plotting code that recreates this chart exactly. Answer with a single fenced code block."
        )

    def test_empty_script(self):
        with pytest.raises(EmptyScript):
            an.chart_to_code_record("   \n", "img.png")

    def test_content_hash_stable(self):
        a = an.chart_to_code_record(self.SCRIPT, "img.png")
        b = an.chart_to_code_record(self.SCRIPT, "img.png")
        assert a.record_id == b.record_id

    def test_explicit_prompt_index(self):
        r = an.chart_to_code_record(self.SCRIPT, "img.png", prompt_index=0)
        assert r.question.startswith("Reproduce this chart")


class TestQaRecord:
    def test_unicode_preserved(self):
        r = an.qa_record("Quelle est la valeur maximale en 2020 ?", "42", "global", "img.png")
        assert r.question.startswith("Quelle")

    def test_scope_required(self):
        with pytest.raises(SchemaViolation):
            an.qa_record("q", "a", "sideways", "img.png")


class TestParseQaGeneration:
    def make_pairs(self, n):
        return [{"question": f"q{i}", "answer": f"a{i}", "scope": "global" if i % 2 else "local"} for i in range(n)]

    def test_clean_ten(self):
        parsed = an.parse_qa_generation(json.dumps(self.make_pairs(10)))
        assert len(parsed.pairs) == 10
        assert parsed.dropped_malformed == 0 and parsed.dropped_truncated == 0

    def test_twelve_truncated(self):
        parsed = an.parse_qa_generation(json.dumps(self.make_pairs(12)))
        assert len(parsed.pairs) == 10
        assert parsed.dropped_truncated == 2

    def test_malformed_entries_dropped(self):
        docs = self.make_pairs(3)
        docs.insert(1, {"question": "q", "answer": "a", "scope": "diagonal"})
        docs.insert(2, {"question": "", "answer": "a", "scope": "global"})
        docs.insert(3, "not an object")
        parsed = an.parse_qa_generation(json.dumps(docs))
        assert len(parsed.pairs) == 3
        assert parsed.dropped_malformed == 3

    def test_array_inside_prose(self):
        text = "Sure, here you go:\n```json\n" + json.dumps(self.make_pairs(2)) + "\n```\nDone."
        assert len(an.parse_qa_generation(text).pairs) == 2

    def test_no_json(self):
        with pytest.raises(NoParseableContent):
            an.parse_qa_generation("I could not produce questions.")

    def test_empty_array(self):
        with pytest.raises(NoParseableContent):
            an.parse_qa_generation("[]")

    def test_all_malformed(self):
        with pytest.raises(NoParseableContent):
            an.parse_qa_generation(json.dumps([{"question": 5}]))


class TestJsonlRoundTrip:
    def records(self):
        return [
            an.grounding_record((0, title_box()), "img-1.png"),
            an.chart_to_code_record("plt.plot([1])\n", "img-1.png"),
            an.qa_record("What is the max?", "42", "global", "img-1.png"),
            an.qa_record("Trend?", "up", "local", "img-2.png"),
        ]

    def test_round_trip_exact(self, tmp_path):
        records = self.records()
        path = tmp_path / "data.jsonl"
        n = an.write_records(records, path)
        assert n == 4
        assert an.read_records(path) == records

    def test_field_order_fixed(self, tmp_path):
        path = tmp_path / "data.jsonl"
        an.write_records(self.records()[:1], path)
        doc = json.loads(path.read_text().splitlines()[0])
        assert list(doc) == [
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
        ]

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "data.jsonl"
        an.write_records(self.records()[:1], path)
        doc = json.loads(path.read_text())
        doc["surprise"] = 1
        path.write_text(json.dumps(doc) + "\n")
        with pytest.raises(SchemaViolation):
            an.read_records(path)

    def test_invalid_box_line_flagged(self, tmp_path):
        path = tmp_path / "data.jsonl"
        an.write_records(self.records()[:1], path)
        doc = json.loads(path.read_text())
        doc["answer_boxes"] = [[9, 9, 1, 1]]
        path.write_text(json.dumps(doc) + "\n")
        with pytest.raises(SchemaViolation) as exc:
            an.read_records(path)
        assert ":1" in str(exc.value)

    def test_with_split_keeps_record_id(self):
        r = self.records()[0]
        rl = an.with_split(r, "rl")
        assert rl.split == "rl" and rl.record_id == r.record_id
