"""Ground-truth emission: canonical structure markup and annotation
records (JSON Lines)."""
from __future__ import annotations

import html as html_mod
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BoxOutOfBounds
from .ingest import _is_cjk
from .layout import LayoutResult
from .model import (GridCell, Rect, TableGrid, spanning_cell_count)


def _cell_token(cell: GridCell, tag: str) -> str:
    attrs = ""
    if cell.row_span > 1:
        attrs += f' rowspan="{cell.row_span}"'
    if cell.col_span > 1:
        attrs += f' colspan="{cell.col_span}"'
    return f"<{tag}{attrs}>"


def _header_prefix_rows(grid: TableGrid) -> int:
    """Longest leading run of rows whose anchored cells are all headers,
    provided no header cell is anchored outside that run; 0 otherwise."""
    header_rows = set()
    body_rows = set()
    for c in grid.cells:
        (header_rows if c.is_header else body_rows).add(c.row)
    if not header_rows or header_rows & body_rows:
        return 0
    k = max(header_rows) + 1
    if any(r < k for r in body_rows):
        return 0
    return k


def structure_tokens(grid: TableGrid) -> List[str]:
    """Canonical content-free token sequence for the grid."""
    rows: Dict[int, List[GridCell]] = {}
    for c in grid.cells:
        rows.setdefault(c.row, []).append(c)
    k = _header_prefix_rows(grid)
    tokens = ["<table>"]

    def emit_rows(row_range, in_thead: bool):
        for r in row_range:
            tokens.append("<tr>")
            for cell in rows.get(r, []):
                tag = "td" if (in_thead or not cell.is_header) else "th"
                tokens.append(_cell_token(cell, tag))
                tokens.append(f"</{tag}>")
            tokens.append("</tr>")

    if k > 0:
        tokens.append("<thead>")
        emit_rows(range(k), True)
        tokens.append("</thead>")
        tokens.append("<tbody>")
        emit_rows(range(k, grid.n_rows), False)
        tokens.append("</tbody>")
    else:
        emit_rows(range(grid.n_rows), False)
    tokens.append("</table>")
    return tokens


def emit_structure_markup(grid: TableGrid,
                          content: Optional[Sequence[Sequence[str]]] = None) -> str:
    """Serialize a grid (optionally with cell text) to canonical markup.

    Deterministic: row-major cells, spans as attributes, header rows in a
    thead only when all leading-row cells are headers.
    """
    rows: Dict[int, List[Tuple[GridCell, int]]] = {}
    for i, c in enumerate(grid.cells):
        rows.setdefault(c.row, []).append((c, i))
    k = _header_prefix_rows(grid)
    parts = ["<table>"]

    def cell_text(i: int) -> str:
        if content is None:
            return ""
        return "<br>".join(html_mod.escape(ln) for ln in content[i])

    def emit_rows(row_range, in_thead: bool):
        for r in row_range:
            parts.append("<tr>")
            for cell, i in rows.get(r, []):
                tag = "td" if (in_thead or not cell.is_header) else "th"
                parts.append(_cell_token(cell, tag))
                parts.append(cell_text(i))
                parts.append(f"</{tag}>")
            parts.append("</tr>")

    if k > 0:
        parts.append("<thead>")
        emit_rows(range(k), True)
        parts.append("</thead>")
        parts.append("<tbody>")
        emit_rows(range(k, grid.n_rows), False)
        parts.append("</tbody>")
    else:
        emit_rows(range(grid.n_rows), False)
    parts.append("</table>")
    return "".join(parts)


def content_tokens(lines: Sequence[str]) -> List[str]:
    """Per-character tokens for CJK runs, per-word tokens for
    space-delimited script runs."""
    tokens: List[str] = []
    for line in lines:
        word = ""
        for ch in line:
            if _is_cjk(ch):
                if word:
                    tokens.append(word)
                    word = ""
                tokens.append(ch)
            elif ch.isspace():
                if word:
                    tokens.append(word)
                    word = ""
            else:
                word += ch
        if word:
            tokens.append(word)
    return tokens


def text_from_tokens(tokens: Sequence[str]) -> str:
    """Inverse-ish of content_tokens: space between word tokens, none
    around CJK tokens."""
    out = ""
    for tok in tokens:
        if not out:
            out = tok
        elif _is_cjk(out[-1]) or (tok and _is_cjk(tok[0])):
            out += tok
        else:
            out += " " + tok
    return out


@dataclass(frozen=True)
class AnnotationRecord:
    image_file: str
    structure: Tuple[str, ...]
    cells: Tuple[dict, ...]  # {"tokens":[...], "bbox":[x,y,w,h], "lines":[[...],...]}
    meta: dict

    def to_json_line(self) -> str:
        obj = {
            "file": self.image_file,
            "structure": list(self.structure),
            "cells": [{"tokens": c["tokens"], "bbox": c["bbox"],
                       "lines": c["lines"]} for c in self.cells],
            "meta": self.meta,
        }
        return json.dumps(obj, ensure_ascii=False)


def record_from_json(obj: dict) -> AnnotationRecord:
    return AnnotationRecord(
        image_file=obj["file"],
        structure=tuple(obj["structure"]),
        cells=tuple(obj["cells"]),
        meta=dict(obj.get("meta", {})))


def emit_annotation(layout: LayoutResult, grid: TableGrid,
                    content: Sequence[Sequence[str]], meta: dict,
                    image_file: str, margin: int = 8) -> AnnotationRecord:
    """Build the annotation record for one rendered table.

    All boxes are integers in image coordinates (origin top-left).  A
    containment violation after rounding is surfaced as BoxOutOfBounds.
    """
    img_w = layout.table_box.rounded().w + 2 * margin
    img_h = layout.table_box.rounded().h + 2 * margin
    image_box = Rect(0, 0, img_w, img_h)

    cells = []
    for i, cell in enumerate(grid.cells):
        cbox = layout.cell_boxes[i].translated(margin, margin).rounded()
        if not image_box.contains(cbox):
            raise BoxOutOfBounds(f"cell {i} box {cbox} outside image {image_box}")
        line_boxes = []
        for lbox in layout.line_boxes[i]:
            lb = lbox.translated(margin, margin).rounded()
            if not cbox.contains(lb):
                raise BoxOutOfBounds(
                    f"text line box {lb} escapes cell box {cbox} (cell {i})")
            line_boxes.append([int(lb.x), int(lb.y), int(lb.w), int(lb.h)])
        cells.append({
            "tokens": content_tokens(content[i]),
            "bbox": [int(cbox.x), int(cbox.y), int(cbox.w), int(cbox.h)],
            "lines": line_boxes,
        })

    full_meta = {"spanningCellCount": spanning_cell_count(grid)}
    full_meta.update(meta)
    return AnnotationRecord(image_file=image_file,
                            structure=tuple(structure_tokens(grid)),
                            cells=tuple(cells),
                            meta=full_meta)


def markup_from_record(record: AnnotationRecord, with_content: bool) -> str:
    """Reassemble markup from a record's structure tokens (and cell text)."""
    parts: List[str] = []
    cell_idx = 0
    for tok in record.structure:
        parts.append(tok)
        is_cell = tok.startswith("<td") or (
            tok.startswith("<th") and not tok.startswith("<thead"))
        if is_cell:
            if with_content and cell_idx < len(record.cells):
                parts.append(html_mod.escape(
                    text_from_tokens(record.cells[cell_idx]["tokens"])))
            cell_idx += 1
    return "".join(parts)
