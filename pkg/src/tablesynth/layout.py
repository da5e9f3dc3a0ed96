"""Deterministic 2D layout: text lines -> blocks -> aligned boxes -> cells.

Regular cells and cells merged in a single direction size their rows and
columns bottom-up; merged cells inherit their extent top-down from the
rows/columns they cover.  When a merged cell's block does not fit, the
constituent rows (or columns) grow proportionally until it does.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import UnresolvableAttribute
from .ingest import GridBoundaries, LineSegment
from .model import GridCell, Rect, TableGrid
from .styling import CellStyle, StyleProfile


def _is_wide(ch: str) -> bool:
    cp = ord(ch)
    return (0x1100 <= cp <= 0x115F or 0x2E80 <= cp <= 0xA4CF
            or 0xAC00 <= cp <= 0xD7A3 or 0xF900 <= cp <= 0xFAFF
            or 0xFE30 <= cp <= 0xFE4F or 0xFF00 <= cp <= 0xFF60
            or 0xFFE0 <= cp <= 0xFFE6 or 0x20000 <= cp <= 0x2FA1F)


@dataclass(frozen=True)
class FixedFontMetrics:
    """Font-file-free metrics: fixed advances per glyph class.

    Latin/digits/punctuation advance 0.6 x size, CJK 1.0 x size,
    line height 1.2 x size.
    """
    latin_factor: float = 0.6
    wide_factor: float = 1.0
    height_factor: float = 1.2

    def advance(self, family: str, size: float, ch: str) -> float:
        return size * (self.wide_factor if _is_wide(ch) else self.latin_factor)

    def line_height(self, family: str, size: float) -> float:
        return size * self.height_factor

    def line_width(self, family: str, size: float, text: str) -> float:
        return sum(self.advance(family, size, ch) for ch in text)


DEFAULT_METRICS = FixedFontMetrics()


@dataclass(frozen=True)
class BlockMeasure:
    width: float
    height: float
    line_boxes: Tuple[Rect, ...]  # relative to block origin


def measure_text_block(lines: Sequence[str], style: CellStyle,
                       metrics=DEFAULT_METRICS) -> BlockMeasure:
    """Stack text lines into a block; empty input yields a 0x0 block."""
    if not lines:
        return BlockMeasure(0.0, 0.0, ())
    lh = metrics.line_height(style.font_family, style.font_size)
    widths = [metrics.line_width(style.font_family, style.font_size, ln)
              for ln in lines]
    n = len(lines)
    height = n * lh + (n - 1) * style.line_spacing
    align = style.intra_block_align
    if align == "indent":
        width = style.intra_block_indent + max(widths)
    else:
        width = max(widths)
    boxes = []
    for i, w in enumerate(widths):
        if align == "left":
            x = 0.0
        elif align == "right":
            x = width - w
        elif align == "center":
            x = (width - w) / 2.0
        elif align == "indent":
            x = style.intra_block_indent
        else:
            raise UnresolvableAttribute(f"intra_block_align {align!r}")
        boxes.append(Rect(x, i * (lh + style.line_spacing), w, lh))
    return BlockMeasure(width, height, tuple(boxes))


@dataclass(frozen=True)
class LayoutResult:
    table_box: Rect
    row_ys: Tuple[float, ...]
    col_xs: Tuple[float, ...]
    cell_boxes: Tuple[Rect, ...]
    aligned_boxes: Tuple[Rect, ...]
    block_boxes: Tuple[Rect, ...]
    line_boxes: Tuple[Tuple[Rect, ...], ...]
    rulings: Tuple[LineSegment, ...]

    @property
    def boundaries(self) -> GridBoundaries:
        return GridBoundaries(self.row_ys, self.col_xs)


def _effective_size(block: BlockMeasure, style: CellStyle) -> Tuple[float, float]:
    """Block extent plus any alignment indent, for row/column sizing."""
    w = block.width
    h = block.height
    if style.h_align in ("indent-left", "indent-right"):
        w += style.h_indent
    if style.v_align in ("indent-top", "indent-bottom"):
        h += style.v_indent
    return w, h


def _place(block_extent: float, box_pos: float, box_extent: float,
           align: str, indent: float) -> float:
    if align in ("left", "top"):
        return box_pos
    if align in ("right", "bottom"):
        return box_pos + box_extent - block_extent
    if align == "center":
        return box_pos + (box_extent - block_extent) / 2.0
    if align in ("indent-left", "indent-top"):
        return box_pos + indent
    if align in ("indent-right", "indent-bottom"):
        return box_pos + box_extent - block_extent - indent
    raise UnresolvableAttribute(f"alignment {align!r}")


def solve_layout(grid: TableGrid, content: Sequence[Sequence[str]],
                 profile: StyleProfile, metrics=DEFAULT_METRICS) -> LayoutResult:
    n_rows, n_cols = grid.n_rows, grid.n_cols
    cells = grid.cells
    styles = [profile.resolve(c.row, c.col) for c in cells]
    blocks = [measure_text_block(content[i], styles[i], metrics)
              for i in range(len(cells))]

    # bottom-up pass: aligned extents per row/column from qualifying cells
    row_styles = [profile.resolve_row(r) for r in range(n_rows)]
    col_styles = [profile.resolve_col(c) for c in range(n_cols)]
    aligned_h = [metrics.line_height(rs.font_family, rs.font_size)
                 for rs in row_styles]
    aligned_w = [cs.font_size for cs in col_styles]
    for i, cell in enumerate(cells):
        ew, eh = _effective_size(blocks[i], styles[i])
        if cell.row_span == 1:
            aligned_h[cell.row] = max(aligned_h[cell.row], eh)
        if cell.col_span == 1:
            aligned_w[cell.col] = max(aligned_w[cell.col], ew)

    row_pads = [(rs.padding_top, rs.padding_bottom) for rs in row_styles]
    col_pads = [(cs.padding_left, cs.padding_right) for cs in col_styles]
    row_h = [aligned_h[r] + row_pads[r][0] + row_pads[r][1] for r in range(n_rows)]
    col_w = [aligned_w[c] + col_pads[c][0] + col_pads[c][1] for c in range(n_cols)]

    # top-down pass with proportional growth for overflowing merged cells
    for i, cell in enumerate(cells):
        ew, eh = _effective_size(blocks[i], styles[i])
        if cell.row_span > 1:
            span = range(cell.row, cell.row + cell.row_span)
            avail = sum(row_h[r] for r in span) \
                - styles[i].padding_top - styles[i].padding_bottom
            if eh > avail:
                deficit = eh - avail
                total = sum(row_h[r] for r in span)
                for r in span:
                    grow = deficit * (row_h[r] / total)
                    row_h[r] += grow
                    aligned_h[r] += grow
        if cell.col_span > 1:
            span = range(cell.col, cell.col + cell.col_span)
            avail = sum(col_w[c] for c in span) \
                - styles[i].padding_left - styles[i].padding_right
            if ew > avail:
                deficit = ew - avail
                total = sum(col_w[c] for c in span)
                for c in span:
                    grow = deficit * (col_w[c] / total)
                    col_w[c] += grow
                    aligned_w[c] += grow

    row_ys = [0.0]
    for r in range(n_rows):
        row_ys.append(row_ys[-1] + row_h[r])
    col_xs = [0.0]
    for c in range(n_cols):
        col_xs.append(col_xs[-1] + col_w[c])
    table_box = Rect(0.0, 0.0, col_xs[-1], row_ys[-1])

    cell_boxes: List[Rect] = []
    aligned_boxes: List[Rect] = []
    block_boxes: List[Rect] = []
    line_boxes: List[Tuple[Rect, ...]] = []
    for i, cell in enumerate(cells):
        style = styles[i]
        block = blocks[i]
        x = col_xs[cell.col]
        y = row_ys[cell.row]
        w = col_xs[cell.col + cell.col_span] - x
        h = row_ys[cell.row + cell.row_span] - y
        cbox = Rect(x, y, w, h)

        if cell.row_span == 1:
            ay = y + row_pads[cell.row][0]
            ah = aligned_h[cell.row]
        else:
            ay = y + style.padding_top
            ah = h - style.padding_top - style.padding_bottom
        if cell.col_span == 1:
            ax = x + col_pads[cell.col][0]
            aw = aligned_w[cell.col]
        else:
            ax = x + style.padding_left
            aw = w - style.padding_left - style.padding_right
        abox = Rect(ax, ay, max(0.0, aw), max(0.0, ah))

        bx = _place(block.width, abox.x, abox.w, style.h_align, style.h_indent)
        by = _place(block.height, abox.y, abox.h, style.v_align, style.v_indent)
        bbox = Rect(bx, by, block.width, block.height)

        cell_boxes.append(cbox)
        aligned_boxes.append(abox)
        block_boxes.append(bbox)
        line_boxes.append(tuple(lb.translated(bx, by) for lb in block.line_boxes))

    rulings = compute_rulings(grid, row_ys, col_xs,
                              inner_thickness=profile.inner_border.thickness,
                              outer_thickness=profile.outer_border.thickness)

    return LayoutResult(table_box=table_box,
                        row_ys=tuple(row_ys), col_xs=tuple(col_xs),
                        cell_boxes=tuple(cell_boxes),
                        aligned_boxes=tuple(aligned_boxes),
                        block_boxes=tuple(block_boxes),
                        line_boxes=tuple(line_boxes),
                        rulings=tuple(rulings))


def compute_rulings(grid: TableGrid, row_ys: Sequence[float],
                    col_xs: Sequence[float],
                    inner_thickness: float = 1.0,
                    outer_thickness: float = 1.0) -> List[LineSegment]:
    """Full bordered ruling set: outer boundary plus every internal divider
    piece that does not cross a merged cell.  Border modes filter this set
    at render time."""
    n_rows, n_cols = grid.n_rows, grid.n_cols
    x0, x1 = col_xs[0], col_xs[-1]
    y0, y1 = row_ys[0], row_ys[-1]
    rulings = [
        LineSegment("h", y0, x0, x1, outer_thickness),
        LineSegment("h", y1, x0, x1, outer_thickness),
        LineSegment("v", x0, y0, y1, outer_thickness),
        LineSegment("v", x1, y0, y1, outer_thickness),
    ]

    owner: Dict[Tuple[int, int], int] = {}
    for i, cell in enumerate(grid.cells):
        for r in range(cell.row, cell.row + cell.row_span):
            for c in range(cell.col, cell.col + cell.col_span):
                owner[(r, c)] = i

    for bi in range(1, n_rows):
        run_start = None
        for c in range(n_cols + 1):
            separated = (c < n_cols and owner[(bi - 1, c)] != owner[(bi, c)])
            if separated and run_start is None:
                run_start = c
            elif not separated and run_start is not None:
                rulings.append(LineSegment("h", row_ys[bi],
                                           col_xs[run_start], col_xs[c],
                                           inner_thickness))
                run_start = None
    for bi in range(1, n_cols):
        run_start = None
        for r in range(n_rows + 1):
            separated = (r < n_rows and owner[(r, bi - 1)] != owner[(r, bi)])
            if separated and run_start is None:
                run_start = r
            elif not separated and run_start is not None:
                rulings.append(LineSegment("v", col_xs[bi],
                                           row_ys[run_start], row_ys[r],
                                           inner_thickness))
                run_start = None
    return rulings
