"""Versioned prompt assets for every model-backed pipeline step.

Prompts are plain format strings pinned by a fingerprint hash that travels in
record provenance, so a dataset names the exact wording that produced it.
Response grammars demanded here (one word, fenced block, JSON array/object)
are the grammars the corresponding parsers enforce.
"""

from __future__ import annotations

import json
from typing import Any

from chartkit._util import sha256_hex

PROMPT_VERSION = "v1"

PURPOSES = (
    "filter",
    "chart_to_code",
    "evolve",
    "qa_generate",
    "verify",
    "judge",
    "difficulty_probe",
)

_PROMPTS: dict[str, str] = {
    "filter": (
        "Look at the attached image. Decide whether it is a data chart (bar, line, "
        "scatter, pie, heatmap, or similar plot of data) or not. "
        "Respond with exactly one word: chart or non-chart."
    ),
    "chart_to_code": (
        "Write a complete Python matplotlib script that reproduces the attached "
        "chart as closely as possible: same plot type, data values, axis labels, "
        "ticks, legend, and title. The script must save the figure to chart.png. "
        "Respond with exactly one fenced Python code block and nothing else."
    ),
    "evolve": (
        "Below is a matplotlib script that renders a chart, followed by example "
        "scripts whose figures expose their elements (titles, axis labels, ticks, "
        "legends) through standard matplotlib artists. Rewrite the script in the "
        "same style so every chart element is created through the standard APIs "
        "(set_title, set_xlabel, tick labels, legend) and nothing is drawn as raw "
        "text or pixels. Keep the rendered output visually identical. "
        "Respond with exactly one fenced Python code block.\n\n"
        "Script:\n```python\n{script}\n```\n\nExamples:\n{examples}"
    ),
    "distortion": (
        "The first image is an original chart; the second is a reproduction "
        "rendered from generated code. Decide whether the reproduction is a "
        "faithful rendering of the original (same plot type and overall content) "
        "or visually distorted/broken. Respond with exactly one word: faithful "
        "or distorted."
    ),
    "qa_generate": (
        "Study the attached chart and its source script:\n```python\n{script}\n```\n"
        "Write up to 10 question-answer pairs about the chart. Cover both "
        "questions needing the whole chart (scope \"global\") and questions about "
        "a single element (scope \"local\"). Answers must be short and verifiable "
        "from the chart alone. Respond with a JSON array of objects, each exactly "
        "{{\"question\": str, \"answer\": str, \"scope\": \"global\"|\"local\"}}."
    ),
    "verify": (
        "Check the candidate question-answer pairs below against the attached "
        "chart. For each pair decide: groundable (the question refers only to "
        "elements that exist in the chart), answerable (the chart contains enough "
        "information to answer), correct (the given answer is right). "
        "Respond with a JSON array the same length and order as the input, each "
        "entry exactly {{\"groundable\": bool, \"answerable\": bool, \"correct\": "
        "bool}}.\n\nPairs:\n{pairs}"
    ),
    "judge": (
        "Compare the candidate plotting code against the reference script for the "
        "same chart. Grade the candidate from 0 to 5 on each axis: data, plot "
        "type structure, axes scales and limits, text elements, styling. "
        "Respond with a JSON object whose keys are exactly those five axis names "
        "and whose values are integers 0-5.\n\nReference:\n```python\n{reference}\n```\n\n"
        "Candidate:\n```python\n{candidate}\n```"
    ),
    "difficulty_probe": (
        "Answer the question about the attached chart. Think first, then answer. "
        "Respond as <think>your reasoning</think><answer>your answer</answer>.\n\n"
        "Question: {question}"
    ),
}


def prompt_text(purpose: str) -> str:
    if purpose not in _PROMPTS:
        raise KeyError(f"unknown prompt purpose {purpose!r}")
    return _PROMPTS[purpose]


def render(purpose: str, **slots: Any) -> str:
    """Fill a prompt's slots; JSON-encodes non-string values."""
    encoded = {
        k: v if isinstance(v, str) else json.dumps(v, ensure_ascii=False)
        for k, v in slots.items()
    }
    return prompt_text(purpose).format(**encoded)


def prompt_fingerprint() -> str:
    """Short hash pinning the whole prompt set, for provenance."""
    blob = PROMPT_VERSION + "\x00" + "\x00".join(f"{k}={_PROMPTS[k]}" for k in sorted(_PROMPTS))
    return sha256_hex(blob)[:12]
