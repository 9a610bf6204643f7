"""Element-location maps: the JSON contract between the renderer and dataset code.

A location file records, per subplot, where each chart element landed in the
rendered image: the title, axis names, tick labels (keyed by the axis-label
text, falling back to "x-axis"/"y-axis" when the axis has no label), legend
entries, and an ``other`` mapping for anything exotic. Coordinates are image
pixels with a top-left origin; the renderer owns the y-flip, so files arrive
already flipped and this module never transforms coordinates.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterator, Mapping, Sequence

from chartkit.errors import BoxOutOfBounds, InvalidBox, MalformedJson, SchemaViolation
from chartkit.geometry import BBox


class ElementCategory(str, Enum):
    TITLE = "title"
    X_AXIS_NAME = "x_axis_name"
    Y_AXIS_NAME = "y_axis_name"
    X_TICK = "x_tick"
    Y_TICK = "y_tick"
    LEGEND = "legend"
    OTHER = "other"


# Sampling and serialization both follow this order; keep it stable.
CATEGORY_ORDER: tuple[ElementCategory, ...] = tuple(ElementCategory)

_SUBPLOT_KEYS = (
    "subplot_index",
    "title",
    "x_axis_names",
    "y_axis_names",
    "x_axis_ticks",
    "y_axis_ticks",
    "legend_items",
    "other",
)
_DOC_KEYS = ("image_id", "image_width", "image_height", "subplots")
_LABELED_KEYS = {"box", "text", "category"}


@dataclass(frozen=True)
class LabeledBox:
    box: BBox
    text: str
    category: ElementCategory
    axis: str | None = None  # axis-label key for tick boxes
    subcategory: str | None = None  # free-form key for `other` boxes


@dataclass(frozen=True)
class SubplotElements:
    subplot_index: int
    title: LabeledBox | None
    x_axis_names: tuple[LabeledBox, ...]
    y_axis_names: tuple[LabeledBox, ...]
    x_axis_ticks: Mapping[str, tuple[LabeledBox, ...]]
    y_axis_ticks: Mapping[str, tuple[LabeledBox, ...]]
    legend_items: tuple[LabeledBox, ...]
    other: Mapping[str, tuple[LabeledBox, ...]]


@dataclass(frozen=True)
class ElementLocationMap:
    image_id: str
    image_width: int
    image_height: int
    subplots: tuple[SubplotElements, ...]


def _fail(path: str, reason: str) -> None:
    raise SchemaViolation(path, reason)


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _parse_labeled(
    obj: Any,
    path: str,
    category: ElementCategory,
    width: int,
    height: int,
    axis: str | None = None,
    subcategory: str | None = None,
) -> LabeledBox:
    if not isinstance(obj, dict):
        _fail(path, "expected an object with 'box' and 'text'")
    extra = set(obj) - _LABELED_KEYS
    if extra:
        _fail(path, f"unexpected keys {sorted(extra)}")
    if "box" not in obj:
        _fail(path, "missing 'box'")
    if "text" not in obj:
        _fail(path, "missing 'text'")

    quad = obj["box"]
    if not isinstance(quad, list) or len(quad) != 4 or not all(_is_num(v) for v in quad):
        _fail(f"{path}.box", "expected [x_min, y_min, x_max, y_max] numbers")
    try:
        box = BBox.from_quad(quad)
    except InvalidBox as e:
        raise SchemaViolation(f"{path}.box", str(e)) from e
    if box.x_min < 0 or box.y_min < 0 or box.x_max > width or box.y_max > height:
        raise BoxOutOfBounds(
            f"{path}.box",
            f"{quad} outside image bounds {width}x{height}",
        )

    text = obj["text"]
    if not isinstance(text, str):
        _fail(f"{path}.text", "expected a string")
    if "category" in obj and obj["category"] != category.value:
        _fail(f"{path}.category", f"expected {category.value!r}, got {obj['category']!r}")
    return LabeledBox(box=box, text=text, category=category, axis=axis, subcategory=subcategory)


def _parse_labeled_list(
    obj: Any,
    path: str,
    category: ElementCategory,
    width: int,
    height: int,
    axis: str | None = None,
    subcategory: str | None = None,
) -> tuple[LabeledBox, ...]:
    if not isinstance(obj, list):
        _fail(path, "expected a list")
    return tuple(
        _parse_labeled(item, f"{path}[{i}]", category, width, height, axis, subcategory)
        for i, item in enumerate(obj)
    )


def _parse_tick_map(
    obj: Any, path: str, category: ElementCategory, width: int, height: int
) -> dict[str, tuple[LabeledBox, ...]]:
    if not isinstance(obj, dict):
        _fail(path, "expected an object keyed by axis name")
    out: dict[str, tuple[LabeledBox, ...]] = {}
    for key, val in obj.items():
        if not key:
            _fail(path, "axis-name key must be non-empty")
        out[key] = _parse_labeled_list(val, f"{path}.{key}", category, width, height, axis=key)
    return out


def _parse_subplot(obj: Any, path: str, width: int, height: int) -> SubplotElements:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    idx = obj.get("subplot_index")
    if not _is_int(idx) or idx < 0:
        _fail(f"{path}.subplot_index", "expected a non-negative integer")

    title_raw = obj.get("title")
    title = (
        None
        if title_raw is None
        else _parse_labeled(title_raw, f"{path}.title", ElementCategory.TITLE, width, height)
    )
    x_names = _parse_labeled_list(
        obj.get("x_axis_names", []), f"{path}.x_axis_names", ElementCategory.X_AXIS_NAME, width, height
    )
    y_names = _parse_labeled_list(
        obj.get("y_axis_names", []), f"{path}.y_axis_names", ElementCategory.Y_AXIS_NAME, width, height
    )
    x_ticks = _parse_tick_map(
        obj.get("x_axis_ticks", {}), f"{path}.x_axis_ticks", ElementCategory.X_TICK, width, height
    )
    y_ticks = _parse_tick_map(
        obj.get("y_axis_ticks", {}), f"{path}.y_axis_ticks", ElementCategory.Y_TICK, width, height
    )
    legend = _parse_labeled_list(
        obj.get("legend_items", []), f"{path}.legend_items", ElementCategory.LEGEND, width, height
    )

    other_raw = obj.get("other", {})
    if not isinstance(other_raw, dict):
        _fail(f"{path}.other", "expected an object keyed by category name")
    other: dict[str, tuple[LabeledBox, ...]] = {}
    for key, val in other_raw.items():
        if not key:
            _fail(f"{path}.other", "category key must be non-empty")
        other[key] = _parse_labeled_list(
            val, f"{path}.other.{key}", ElementCategory.OTHER, width, height, subcategory=key
        )
    # Unknown subplot keys are kept rather than dropped: they become `other`
    # categories so files from newer emitters still parse.
    for key, val in obj.items():
        if key in _SUBPLOT_KEYS:
            continue
        if key in other:
            _fail(f"{path}.{key}", "collides with an existing 'other' category")
        other[key] = _parse_labeled_list(
            val, f"{path}.{key}", ElementCategory.OTHER, width, height, subcategory=key
        )

    return SubplotElements(
        subplot_index=idx,
        title=title,
        x_axis_names=x_names,
        y_axis_names=y_names,
        x_axis_ticks=x_ticks,
        y_axis_ticks=y_ticks,
        legend_items=legend,
        other=other,
    )


def parse_location_file(raw: bytes | str) -> ElementLocationMap:
    """Parse and validate an element-location JSON document."""
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedJson(f"not valid UTF-8: {e}") from e
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise MalformedJson(f"not valid JSON: {e}") from e

    if not isinstance(doc, dict):
        _fail("$", "expected a top-level object")
    for key in doc:
        if key not in _DOC_KEYS:
            _fail(f"$.{key}", "unexpected document key")

    image_id = doc.get("image_id")
    if not isinstance(image_id, str) or not image_id:
        _fail("$.image_id", "expected a non-empty string")
    width = doc.get("image_width")
    height = doc.get("image_height")
    if not _is_int(width) or width <= 0:
        _fail("$.image_width", "expected a positive integer")
    if not _is_int(height) or height <= 0:
        _fail("$.image_height", "expected a positive integer")

    subplots_raw = doc.get("subplots")
    if not isinstance(subplots_raw, list):
        _fail("$.subplots", "expected a list")
    subplots = tuple(
        _parse_subplot(sp, f"$.subplots[{i}]", width, height)
        for i, sp in enumerate(subplots_raw)
    )
    return ElementLocationMap(
        image_id=image_id, image_width=width, image_height=height, subplots=subplots
    )


def _labeled_doc(lb: LabeledBox) -> dict[str, Any]:
    return {"box": lb.box.as_quad(), "text": lb.text, "category": lb.category.value}


def _subplot_doc(sp: SubplotElements) -> dict[str, Any]:
    return {
        "subplot_index": sp.subplot_index,
        "title": None if sp.title is None else _labeled_doc(sp.title),
        "x_axis_names": [_labeled_doc(b) for b in sp.x_axis_names],
        "y_axis_names": [_labeled_doc(b) for b in sp.y_axis_names],
        "x_axis_ticks": {k: [_labeled_doc(b) for b in v] for k, v in sp.x_axis_ticks.items()},
        "y_axis_ticks": {k: [_labeled_doc(b) for b in v] for k, v in sp.y_axis_ticks.items()},
        "legend_items": [_labeled_doc(b) for b in sp.legend_items],
        "other": {k: [_labeled_doc(b) for b in v] for k, v in sp.other.items()},
    }


def serialize_location_map(m: ElementLocationMap) -> bytes:
    """Canonical UTF-8 encoding: fixed key order, two-space indent, newline at EOF.

    parse_location_file(serialize_location_map(m)) == m for every valid map.
    """
    doc = {
        "image_id": m.image_id,
        "image_width": m.image_width,
        "image_height": m.image_height,
        "subplots": [_subplot_doc(sp) for sp in m.subplots],
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _category_pool(sp: SubplotElements, category: ElementCategory) -> Iterator[LabeledBox]:
    if category is ElementCategory.TITLE:
        if sp.title is not None:
            yield sp.title
    elif category is ElementCategory.X_AXIS_NAME:
        yield from sp.x_axis_names
    elif category is ElementCategory.Y_AXIS_NAME:
        yield from sp.y_axis_names
    elif category is ElementCategory.X_TICK:
        for boxes in sp.x_axis_ticks.values():
            yield from boxes
    elif category is ElementCategory.Y_TICK:
        for boxes in sp.y_axis_ticks.values():
            yield from boxes
    elif category is ElementCategory.LEGEND:
        yield from sp.legend_items
    else:
        for boxes in sp.other.values():
            yield from boxes


def iter_elements(m: ElementLocationMap) -> Iterator[tuple[int, LabeledBox]]:
    """All labeled boxes in (category order, subplot order, document order)."""
    for category in CATEGORY_ORDER:
        for sp in m.subplots:
            for lb in _category_pool(sp, category):
                yield sp.subplot_index, lb


def sample_elements(
    m: ElementLocationMap, per_category: int, seed: int
) -> list[tuple[int, LabeledBox]]:
    """Draw up to per_category elements of each category, uniformly, seeded.

    The draw is without replacement within a category; output order is
    category enumeration order, then draw order. Same seed, same output.
    """
    if per_category < 1:
        raise ValueError(f"per_category must be >= 1, got {per_category}")
    rng = random.Random(seed)
    out: list[tuple[int, LabeledBox]] = []
    for category in CATEGORY_ORDER:
        pool = [
            (sp.subplot_index, lb)
            for sp in m.subplots
            for lb in _category_pool(sp, category)
        ]
        if not pool:
            continue
        out.extend(rng.sample(pool, min(per_category, len(pool))))
    return out
