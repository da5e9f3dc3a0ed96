"""Core domain types: grids, cells, rectangles, source tables.

All types are immutable after construction and safe to share between
threads.  Cells are kept row-major by top-left anchor so serialization
is deterministic.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple


def round_half_up(x: float) -> int:
    """Round to nearest integer, ties away from zero toward +inf."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise ValueError(f"negative extent: {self}")

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def contains(self, other: "Rect", tol: float = 0.0) -> bool:
        return (other.x >= self.x - tol and other.y >= self.y - tol
                and other.x2 <= self.x2 + tol and other.y2 <= self.y2 + tol)

    def contains_point(self, px: float, py: float) -> bool:
        return self.x <= px <= self.x2 and self.y <= py <= self.y2

    def iou(self, other: "Rect") -> float:
        ix = max(0.0, min(self.x2, other.x2) - max(self.x, other.x))
        iy = max(0.0, min(self.y2, other.y2) - max(self.y, other.y))
        inter = ix * iy
        union = self.w * self.h + other.w * other.h - inter
        if union <= 0:
            return 0.0
        return inter / union

    def rounded(self) -> "Rect":
        x0 = round_half_up(self.x)
        y0 = round_half_up(self.y)
        x1 = round_half_up(self.x2)
        y1 = round_half_up(self.y2)
        return Rect(x0, y0, x1 - x0, y1 - y0)

    def translated(self, dx: float, dy: float) -> "Rect":
        return Rect(self.x + dx, self.y + dy, self.w, self.h)

    def as_xywh(self) -> List[int]:
        r = self.rounded()
        return [int(r.x), int(r.y), int(r.w), int(r.h)]


@dataclass(frozen=True)
class GridCell:
    row: int
    col: int
    row_span: int = 1
    col_span: int = 1
    is_header: bool = False

    def __post_init__(self):
        if self.row < 0 or self.col < 0:
            raise ValueError(f"negative anchor: {self}")
        if self.row_span < 1 or self.col_span < 1:
            raise ValueError(f"span must be >= 1: {self}")

    @property
    def is_spanning(self) -> bool:
        return self.row_span > 1 or self.col_span > 1


@dataclass(frozen=True)
class TableGrid:
    n_rows: int
    n_cols: int
    cells: Tuple[GridCell, ...]

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("grid must have at least one row and column")
        ordered = tuple(sorted(self.cells, key=lambda c: (c.row, c.col)))
        object.__setattr__(self, "cells", ordered)


# One entry per GridCell, same order as TableGrid.cells; each entry is the
# ordered list of text lines of that cell.
CellContent = List[List[str]]


def validate_grid(grid: TableGrid) -> List[str]:
    """Check the tiling invariant; returns [] when the grid is valid.

    Each violation names the offending lattice position.
    """
    violations: List[str] = []
    coverage = [[0] * grid.n_cols for _ in range(grid.n_rows)]
    for cell in grid.cells:
        if cell.row + cell.row_span > grid.n_rows or cell.col + cell.col_span > grid.n_cols:
            violations.append(
                f"cell at ({cell.row},{cell.col}) span {cell.row_span}x{cell.col_span}"
                f" exceeds {grid.n_rows}x{grid.n_cols} lattice")
            continue
        for r in range(cell.row, cell.row + cell.row_span):
            for c in range(cell.col, cell.col + cell.col_span):
                coverage[r][c] += 1
    for r in range(grid.n_rows):
        for c in range(grid.n_cols):
            if coverage[r][c] == 0:
                violations.append(f"position ({r},{c}) uncovered")
            elif coverage[r][c] > 1:
                violations.append(f"position ({r},{c}) covered {coverage[r][c]} times")
    return violations


def spanning_cell_count(grid: TableGrid) -> int:
    return sum(1 for c in grid.cells if c.is_spanning)


def has_merged_both(grid: TableGrid) -> bool:
    """True when some cell spans in both directions."""
    return any(c.row_span > 1 and c.col_span > 1 for c in grid.cells)


def spanning_bucket(count: int) -> str:
    """Reporting bucket key for a spanning-cell count: '0'..'3' or '4+'."""
    return str(count) if count < 4 else "4+"


@dataclass(frozen=True)
class SourceTable:
    grid: TableGrid
    content: Tuple[Tuple[str, ...], ...]
    provenance: str = ""
    extracted_style: Optional[object] = None  # StyleProfile, kept loose to avoid a cycle

    def __post_init__(self):
        norm = tuple(tuple(lines) for lines in self.content)
        object.__setattr__(self, "content", norm)
        if len(norm) != len(self.grid.cells):
            raise ValueError(
                f"content has {len(norm)} entries for {len(self.grid.cells)} cells")


def content_as_lists(table: SourceTable) -> CellContent:
    return [list(lines) for lines in table.content]


# --- canonical JSON schema -------------------------------------------------
# {"nRows":int,"nCols":int,"cells":[{"row":..,"col":..,"rowSpan":..,
#  "colSpan":..,"isHeader":bool,"lines":[...]},...]}

def table_to_json(table: SourceTable) -> dict:
    cells = []
    for cell, lines in zip(table.grid.cells, table.content):
        cells.append({
            "row": cell.row,
            "col": cell.col,
            "rowSpan": cell.row_span,
            "colSpan": cell.col_span,
            "isHeader": cell.is_header,
            "lines": list(lines),
        })
    return {"nRows": table.grid.n_rows, "nCols": table.grid.n_cols, "cells": cells}


def table_from_json(obj: dict, provenance: str = "") -> SourceTable:
    cells = []
    content = []
    for c in obj["cells"]:
        cells.append(GridCell(row=c["row"], col=c["col"],
                              row_span=c.get("rowSpan", 1),
                              col_span=c.get("colSpan", 1),
                              is_header=bool(c.get("isHeader", False))))
        content.append(list(c.get("lines", [])))
    order = sorted(range(len(cells)), key=lambda i: (cells[i].row, cells[i].col))
    grid = TableGrid(obj["nRows"], obj["nCols"], tuple(cells[i] for i in order))
    return SourceTable(grid=grid, content=tuple(tuple(content[i]) for i in order),
                       provenance=provenance)


def table_to_json_str(table: SourceTable) -> str:
    return json.dumps(table_to_json(table), ensure_ascii=False)
