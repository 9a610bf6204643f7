"""Chart element location extraction from a live matplotlib figure.

Everything comes from artist window extents on the drawn canvas, flipped to
top-left-origin image coordinates with y_img = image_height - y_canvas. Text
fields are the artists' texts verbatim. The emitted document follows the
element-location schema the primary toolkit validates: per-subplot title,
axis names, tick maps keyed by the axis-label text (falling back to
"x-axis"/"y-axis" when the label is empty), and legend entries.
"""

from __future__ import annotations

from typing import Any


def flipped_box(artist, renderer, image_width: float, image_height: float) -> list[float] | None:
    """Artist extent as [x0, y0, x1, y1] image-pixel coordinates.

    Clamped to the image bounds; returns None when nothing of the artist
    remains inside the image (a clamp that empties the box).
    """
    bb = artist.get_window_extent(renderer=renderer)
    x0 = max(0.0, min(image_width, bb.x0))
    x1 = max(0.0, min(image_width, bb.x1))
    # The canvas origin is bottom-left; images count y from the top.
    y0 = max(0.0, min(image_height, image_height - bb.y1))
    y1 = max(0.0, min(image_height, image_height - bb.y0))
    if x1 - x0 <= 0 or y1 - y0 <= 0:
        return None
    return [round(x0, 2), round(y0, 2), round(x1, 2), round(y1, 2)]


def _labeled(box: list[float], text: str, category: str) -> dict[str, Any]:
    return {"box": box, "text": text, "category": category}


def _tick_boxes(tick_labels, renderer, w, h, category: str) -> list[dict[str, Any]]:
    out = []
    for tick in tick_labels:
        text = tick.get_text()
        if not tick.get_visible() or not text.strip():
            continue
        box = flipped_box(tick, renderer, w, h)
        if box is not None:
            out.append(_labeled(box, text, category))
    return out


def extract_subplot(ax, index: int, renderer, w: float, h: float) -> dict[str, Any]:
    sp: dict[str, Any] = {
        "subplot_index": index,
        "title": None,
        "x_axis_names": [],
        "y_axis_names": [],
        "x_axis_ticks": {},
        "y_axis_ticks": {},
        "legend_items": [],
        "other": {},
    }

    if ax.title.get_text():
        box = flipped_box(ax.title, renderer, w, h)
        if box is not None:
            sp["title"] = _labeled(box, ax.title.get_text(), "title")

    xlabel = ax.xaxis.label
    x_axis_name = xlabel.get_text() if xlabel.get_text() else "x-axis"
    if xlabel.get_text():
        box = flipped_box(xlabel, renderer, w, h)
        if box is not None:
            sp["x_axis_names"].append(_labeled(box, xlabel.get_text(), "x_axis_name"))

    ylabel = ax.yaxis.label
    y_axis_name = ylabel.get_text() if ylabel.get_text() else "y-axis"
    if ylabel.get_text():
        box = flipped_box(ylabel, renderer, w, h)
        if box is not None:
            sp["y_axis_names"].append(_labeled(box, ylabel.get_text(), "y_axis_name"))

    x_ticks = _tick_boxes(ax.get_xticklabels(), renderer, w, h, "x_tick")
    if x_ticks:
        sp["x_axis_ticks"][x_axis_name] = x_ticks
    y_ticks = _tick_boxes(ax.get_yticklabels(), renderer, w, h, "y_tick")
    if y_ticks:
        sp["y_axis_ticks"][y_axis_name] = y_ticks

    legend = ax.get_legend()
    if legend is not None:
        for text_artist in legend.get_texts():
            text = text_artist.get_text()
            if not text.strip():
                continue
            box = flipped_box(text_artist, renderer, w, h)
            if box is not None:
                sp["legend_items"].append(_labeled(box, text, "legend"))
    return sp


def extract_locations(fig, image_id: str) -> dict[str, Any]:
    """Element-location document for a drawn figure."""
    renderer = fig.canvas.get_renderer()
    w, h = fig.canvas.get_width_height()
    return {
        "image_id": image_id,
        "image_width": int(w),
        "image_height": int(h),
        "subplots": [
            extract_subplot(ax, i, renderer, float(w), float(h))
            for i, ax in enumerate(fig.axes)
        ],
    }
