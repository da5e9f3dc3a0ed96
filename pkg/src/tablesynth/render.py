"""Rasterize a layout + profile into an RGB image.

Draw order is backgrounds, then text, then borders.  The box-glyph
rasterizer paints exact per-glyph advance boxes (no anti-aliasing) so
pixel-level assertions are possible; the real-font backend draws text
through PIL and is for visual output only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from PIL import Image, ImageDraw, ImageFont

from .errors import CanvasOverflow
from .layout import DEFAULT_METRICS, LayoutResult
from .model import Rect, round_half_up
from .styling import CellStyle, StyleProfile

DEFAULT_MARGIN = 8
DEFAULT_MAX_DIM = 4096
PAGE_COLOR = (255, 255, 255)


@dataclass
class Canvas:
    width: int
    height: int
    image: Image.Image

    def pixel(self, x: int, y: int) -> Tuple[int, int, int]:
        return self.image.getpixel((x, y))

    def save_png(self, path) -> None:
        self.image.save(path, format="PNG")

    def png_bytes(self) -> bytes:
        import io
        buf = io.BytesIO()
        self.image.save(buf, format="PNG")
        return buf.getvalue()


class BoxGlyphRasterizer:
    """Paints the advance box of every non-whitespace glyph at full
    coverage in the text colour."""

    backend = "box-glyph"

    def __init__(self, metrics=DEFAULT_METRICS):
        self.metrics = metrics

    def draw_line(self, draw: ImageDraw.ImageDraw, text: str, box: Rect,
                  style: CellStyle) -> None:
        x = box.x
        lh = box.h
        y0 = round_half_up(box.y)
        y1 = round_half_up(box.y + lh)
        for ch in text:
            adv = self.metrics.advance(style.font_family, style.font_size, ch)
            if not ch.isspace():
                x0 = round_half_up(x)
                x1 = round_half_up(x + adv)
                if x1 > x0 and y1 > y0:
                    draw.rectangle([x0, y0, x1 - 1, y1 - 1], fill=style.text_color)
            x += adv


class RealFontRasterizer:
    """Draws text with a PIL font.  Layout still uses the pluggable
    metrics, so glyph shapes are approximate; intended for human viewing."""

    backend = "real-font"

    def __init__(self, font_path: Optional[str] = None):
        self.font_path = font_path
        self._cache = {}

    def _font(self, size: float):
        key = round_half_up(size)
        if key not in self._cache:
            if self.font_path:
                self._cache[key] = ImageFont.truetype(self.font_path, key)
            else:
                self._cache[key] = ImageFont.load_default()
        return self._cache[key]

    def draw_line(self, draw: ImageDraw.ImageDraw, text: str, box: Rect,
                  style: CellStyle) -> None:
        draw.text((round_half_up(box.x), round_half_up(box.y)), text,
                  fill=style.text_color, font=self._font(style.font_size))


def _stroke_h(draw, y: float, x_start: float, x_end: float,
              thickness: float, color) -> None:
    t = max(1, round_half_up(thickness))
    y0 = round_half_up(y - thickness / 2.0)
    x0 = round_half_up(x_start)
    x1 = round_half_up(x_end)
    if x1 > x0:
        draw.rectangle([x0, y0, x1 - 1, y0 + t - 1], fill=color)


def _stroke_v(draw, x: float, y_start: float, y_end: float,
              thickness: float, color) -> None:
    t = max(1, round_half_up(thickness))
    x0 = round_half_up(x - thickness / 2.0)
    y0 = round_half_up(y_start)
    y1 = round_half_up(y_end)
    if y1 > y0:
        draw.rectangle([x0, y0, x0 + t - 1, y1 - 1], fill=color)


def _dash_intervals(start: float, end: float, gap: float) -> List[Tuple[float, float]]:
    # equal on/off pattern anchored at the segment start
    if gap <= 0:
        return [(start, end)]
    out = []
    pos = start
    while pos < end:
        out.append((pos, min(pos + gap, end)))
        pos += 2 * gap
    return out


def _boundary_index(values: Sequence[float], pos: float) -> int:
    best, dist = 0, abs(values[0] - pos)
    for i, v in enumerate(values):
        d = abs(v - pos)
        if d < dist:
            best, dist = i, d
    return best


def _inner_h_drawn(profile: StyleProfile, idx: int) -> bool:
    inner = profile.inner_border
    if inner.mode in ("full", "no-vertical"):
        return True
    if inner.mode == "partial-horizontal" and inner.mask:
        return inner.mask[(idx - 1) % len(inner.mask)]
    return False


def _inner_v_drawn(profile: StyleProfile, idx: int) -> bool:
    inner = profile.inner_border
    if inner.mode in ("full", "no-horizontal"):
        return True
    if inner.mode == "partial-vertical" and inner.mask:
        return inner.mask[(idx - 1) % len(inner.mask)]
    return False


def _outer_h_drawn(profile: StyleProfile) -> bool:
    return profile.outer_border.mode in ("full", "no-sides")


def _outer_v_drawn(profile: StyleProfile) -> bool:
    return profile.outer_border.mode in ("full", "no-top-bottom")


def visible_rulings(layout: LayoutResult, profile: StyleProfile) -> List:
    """Logical ruling segments that the border modes leave visible (before
    dashing / double-stroke expansion)."""
    out = []
    for seg in layout.rulings:
        if seg.orientation == "h":
            idx = _boundary_index(layout.row_ys, seg.position)
            if idx == 0 or idx == len(layout.row_ys) - 1:
                if _outer_h_drawn(profile):
                    out.append(seg)
            elif _inner_h_drawn(profile, idx):
                out.append(seg)
        else:
            idx = _boundary_index(layout.col_xs, seg.position)
            if idx == 0 or idx == len(layout.col_xs) - 1:
                if _outer_v_drawn(profile):
                    out.append(seg)
            elif _inner_v_drawn(profile, idx):
                out.append(seg)
    return out


def render_table(layout: LayoutResult, profile: StyleProfile,
                 content: Sequence[Sequence[str]],
                 grid_cells,
                 rasterizer=None,
                 margin: int = DEFAULT_MARGIN,
                 page_color: Tuple[int, int, int] = PAGE_COLOR,
                 max_dim: int = DEFAULT_MAX_DIM) -> Canvas:
    """Rasterize one table.  grid_cells is the cell list matching the
    layout's per-cell sequences (anchors are needed for style resolution)."""
    if rasterizer is None:
        rasterizer = BoxGlyphRasterizer()

    width = round_half_up(layout.table_box.w) + 2 * margin
    height = round_half_up(layout.table_box.h) + 2 * margin
    if width > max_dim or height > max_dim:
        raise CanvasOverflow(f"{width}x{height} exceeds {max_dim}")

    img = Image.new("RGB", (width, height), page_color)
    draw = ImageDraw.Draw(img)

    styles = [profile.resolve(c.row, c.col) for c in grid_cells]

    # backgrounds
    for i, cbox in enumerate(layout.cell_boxes):
        bg = styles[i].background
        if bg is None:
            continue
        r = cbox.translated(margin, margin).rounded()
        if r.w > 0 and r.h > 0:
            draw.rectangle([int(r.x), int(r.y), int(r.x2) - 1, int(r.y2) - 1],
                           fill=bg)

    # text
    for i, boxes in enumerate(layout.line_boxes):
        for line_text, lbox in zip(content[i], boxes):
            rasterizer.draw_line(draw, line_text, lbox.translated(margin, margin),
                                 styles[i])

    # borders
    outer = profile.outer_border
    inner = profile.inner_border
    y_first, y_last = layout.row_ys[0], layout.row_ys[-1]
    x_first, x_last = layout.col_xs[0], layout.col_xs[-1]
    for seg in layout.rulings:
        if seg.orientation == "h":
            idx = _boundary_index(layout.row_ys, seg.position)
            is_outer = idx == 0 or idx == len(layout.row_ys) - 1
            if is_outer:
                if not _outer_h_drawn(profile):
                    continue
                offs = [0.0]
                if outer.line_type == "double-solid":
                    # second stroke one thickness away, outside the table
                    offs.append(-2 * outer.thickness if idx == 0
                                else 2 * outer.thickness)
                for off in offs:
                    _stroke_h(draw, seg.position + margin + off,
                              seg.start + margin, seg.end + margin,
                              outer.thickness, outer.color)
            else:
                if not _inner_h_drawn(profile, idx):
                    continue
                pieces = [(seg.start, seg.end)] if inner.line_type == "solid" \
                    else _dash_intervals(seg.start, seg.end, inner.dash_gap)
                for a, b in pieces:
                    _stroke_h(draw, seg.position + margin, a + margin, b + margin,
                              inner.thickness, inner.color)
        else:
            idx = _boundary_index(layout.col_xs, seg.position)
            is_outer = idx == 0 or idx == len(layout.col_xs) - 1
            if is_outer:
                if not _outer_v_drawn(profile):
                    continue
                offs = [0.0]
                if outer.line_type == "double-solid":
                    offs.append(-2 * outer.thickness if idx == 0
                                else 2 * outer.thickness)
                for off in offs:
                    _stroke_v(draw, seg.position + margin + off,
                              seg.start + margin, seg.end + margin,
                              outer.thickness, outer.color)
            else:
                if not _inner_v_drawn(profile, idx):
                    continue
                pieces = [(seg.start, seg.end)] if inner.line_type == "solid" \
                    else _dash_intervals(seg.start, seg.end, inner.dash_gap)
                for a, b in pieces:
                    _stroke_v(draw, seg.position + margin, a + margin, b + margin,
                              inner.thickness, inner.color)

    return Canvas(width=width, height=height, image=img)
