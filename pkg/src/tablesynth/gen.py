"""Random source-table generation for demos and test corpora."""
from __future__ import annotations

import random
from typing import List, Optional, Tuple

from .model import GridCell, SourceTable, TableGrid
from .styling import (CategoryDescriptor, CellStyle, InnerBorder, OuterBorder,
                      StyleProfile)

CJK_VOCAB = "应收账款货币资金合计年度报告股东权益营业收入负债现金流量表利润净额"
LATIN_VOCAB = ["total", "net", "cash", "equity", "assets", "income", "rate",
               "Q1", "Q2", "2022", "2023", "10,450", "3.14", "87%", "1,200"]


def random_grid(rng: random.Random, max_rows: int = 6, max_cols: int = 6,
                merge_attempts: int = 4) -> TableGrid:
    """Valid random grid: start from unit cells, merge random rectangles of
    currently-unmerged unit cells."""
    n_rows = rng.randint(1, max_rows)
    n_cols = rng.randint(1, max_cols)
    owner = [[(r, c) for c in range(n_cols)] for r in range(n_rows)]
    spans = {}
    for _ in range(merge_attempts):
        if n_rows * n_cols < 2:
            break
        r = rng.randrange(n_rows)
        c = rng.randrange(n_cols)
        rs = rng.randint(1, min(3, n_rows - r))
        cs = rng.randint(1, min(3, n_cols - c))
        if rs == 1 and cs == 1:
            continue
        region = [(rr, cc) for rr in range(r, r + rs) for cc in range(c, c + cs)]
        if any(owner[rr][cc] != (rr, cc) or (rr, cc) in spans for rr, cc in region):
            continue
        for rr, cc in region:
            owner[rr][cc] = (r, c)
        # keep every internal boundary visible to line-based inference:
        # a merge must not swallow a full row or column divider
        visible = all(any(owner[br - 1][cc] != owner[br][cc] for cc in range(n_cols))
                      for br in range(1, n_rows)) and \
                  all(any(owner[rr][bc - 1] != owner[rr][bc] for rr in range(n_rows))
                      for bc in range(1, n_cols))
        if not visible:
            for rr, cc in region:
                owner[rr][cc] = (rr, cc)
            continue
        spans[(r, c)] = (rs, cs)
    cells = []
    for r in range(n_rows):
        for c in range(n_cols):
            if owner[r][c] != (r, c):
                continue
            if (r, c) in spans:
                rs, cs = spans[(r, c)]
            else:
                rs = cs = 1
            cells.append(GridCell(row=r, col=c, row_span=rs, col_span=cs,
                                  is_header=(r == 0 and rng.random() < 0.3)))
    # header flag must cover whole leading rows or none for canonical markup
    if any(c.is_header for c in cells):
        header_ok = all(c.is_header for c in cells if c.row == 0) and \
            all(c.row_span == 1 or not c.is_header for c in cells)
        if not header_ok:
            cells = [GridCell(c.row, c.col, c.row_span, c.col_span, False)
                     for c in cells]
        else:
            cells = [GridCell(c.row, c.col, c.row_span, c.col_span, c.row == 0)
                     for c in cells]
    return TableGrid(n_rows, n_cols, tuple(cells))


def random_line(rng: random.Random, cjk: bool) -> str:
    if cjk:
        n = rng.randint(2, 6)
        return "".join(rng.choice(CJK_VOCAB) for _ in range(n))
    n = rng.randint(1, 3)
    return " ".join(rng.choice(LATIN_VOCAB) for _ in range(n))


def random_source_table(rng: random.Random, max_rows: int = 6,
                        max_cols: int = 6, provenance: str = "",
                        empty_cell_prob: float = 0.05) -> SourceTable:
    grid = random_grid(rng, max_rows, max_cols)
    cjk = rng.random() < 0.5
    content = []
    for cell in grid.cells:
        if rng.random() < empty_cell_prob:
            content.append(())
            continue
        n_lines = rng.choices((1, 2, 3), weights=(70, 20, 10))[0]
        content.append(tuple(random_line(rng, cjk) for _ in range(n_lines)))
    return SourceTable(grid=grid, content=tuple(content), provenance=provenance)


def default_bordered_profile() -> StyleProfile:
    return StyleProfile.build(
        base=CellStyle(font_size=10.0, padding_left=4.0, padding_right=4.0,
                       padding_top=2.0, padding_bottom=2.0),
        outer_border=OuterBorder(mode="full"),
        inner_border=InnerBorder(mode="full"),
        name="default-bordered")


def default_descriptors() -> List[CategoryDescriptor]:
    """Small built-in category set: one financial category keyed on common
    CJK accounting terms plus a generic fallback, each with bordered and
    borderless candidates."""
    bordered = default_bordered_profile()
    borderless = StyleProfile.build(
        base=CellStyle(font_size=10.0, h_align="right", padding_left=6.0,
                       padding_right=6.0),
        outer_border=OuterBorder(mode="no-sides", thickness=1.5),
        inner_border=InnerBorder(mode="no-vertical"),
        name="open-rows")
    bare = StyleProfile.build(
        base=CellStyle(font_size=11.0, h_align="center"),
        outer_border=OuterBorder(mode="none"),
        inner_border=InnerBorder(mode="none"),
        name="bare")
    shaded = StyleProfile.build(
        base=CellStyle(font_size=10.0),
        row_overrides={0: {"background": (230, 230, 230)}},
        outer_border=OuterBorder(mode="full", line_type="double-solid"),
        inner_border=InnerBorder(mode="partial-horizontal",
                                 mask=(True, False)),
        name="shaded-header")
    return [
        CategoryDescriptor(
            category_id="financial",
            keywords=(("应收账款", 5.0), ("货币资金", 5.0), ("合计", 2.0),
                      ("total", 1.0), ("assets", 1.0)),
            profiles=(bordered, borderless, shaded)),
        CategoryDescriptor(
            category_id="generic",
            keywords=(),
            profiles=(bordered, borderless, bare),
            fallback=True),
    ]
