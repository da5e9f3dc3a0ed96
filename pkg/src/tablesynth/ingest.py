"""Source-table ingestion.

Two producers are supported: structured markup (table/thead/tbody/tr/td/th
with rowspan/colspan) and ruling-line + text-span geometry as emitted by
PDF parsers for bordered tables.
"""
from __future__ import annotations

from dataclasses import dataclass
from html.parser import HTMLParser
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .errors import (EmptyTable, InconsistentSpans, MalformedMarkup,
                     NonRectangularSpan, NoOuterBoundary, OrphanText)
from .model import GridCell, Rect, SourceTable, TableGrid, validate_grid

# Fraction of a shared lattice edge a segment must cover to count as a
# separator between two neighbouring positions.
COVERAGE_FRACTION = 0.8


@dataclass(frozen=True)
class LineSegment:
    orientation: str  # "h" | "v"
    position: float   # coordinate on the perpendicular axis
    start: float
    end: float
    thickness: float = 1.0

    def __post_init__(self):
        if self.orientation not in ("h", "v"):
            raise ValueError(f"bad orientation {self.orientation!r}")
        if self.start >= self.end:
            raise ValueError(f"start must precede end: {self}")
        if self.thickness <= 0:
            raise ValueError(f"thickness must be positive: {self}")


@dataclass(frozen=True)
class TextSpan:
    box: Rect
    text: str
    font_size: Optional[float] = None
    font_family: Optional[str] = None
    color: Optional[Tuple[int, int, int]] = None


@dataclass(frozen=True)
class GridBoundaries:
    row_ys: Tuple[float, ...]
    col_xs: Tuple[float, ...]

    def __post_init__(self):
        for vals, name in ((self.row_ys, "row_ys"), (self.col_xs, "col_xs")):
            if len(vals) < 2:
                raise ValueError(f"{name} needs at least 2 coordinates")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} not strictly increasing: {vals}")

    @property
    def n_rows(self) -> int:
        return len(self.row_ys) - 1

    @property
    def n_cols(self) -> int:
        return len(self.col_xs) - 1


# --- markup parsing --------------------------------------------------------

class _TableMarkupParser(HTMLParser):
    """Collects rows of (tag, rowspan, colspan, lines, in_thead) tuples."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.rows: List[List[tuple]] = []
        self.in_thead = False
        self._row: Optional[List[tuple]] = None
        self._cell_attrs: Optional[tuple] = None
        self._text_parts: List[str] = []
        self._open: List[str] = []
        self.saw_table = False

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        if tag == "table":
            self.saw_table = True
            self._open.append(tag)
        elif tag == "thead":
            self.in_thead = True
            self._open.append(tag)
        elif tag == "tbody":
            self._open.append(tag)
        elif tag == "tr":
            if self._row is not None:
                raise MalformedMarkup("nested <tr>")
            self._row = []
            self._open.append(tag)
        elif tag in ("td", "th"):
            if self._row is None:
                raise MalformedMarkup(f"<{tag}> outside a row")
            if self._cell_attrs is not None:
                raise MalformedMarkup(f"nested <{tag}>")
            a = dict(attrs)
            try:
                rs = int(a.get("rowspan", 1))
                cs = int(a.get("colspan", 1))
            except (TypeError, ValueError):
                raise MalformedMarkup("non-integer span attribute")
            if rs < 1 or cs < 1:
                raise MalformedMarkup("span attribute < 1")
            self._cell_attrs = (tag, rs, cs, self.in_thead)
            self._text_parts = []
            self._open.append(tag)
        elif tag == "br":
            if self._cell_attrs is not None:
                self._text_parts.append("\n")
        # any other nested markup inside cells is flattened to text

    def handle_endtag(self, tag):
        tag = tag.lower()
        if tag in ("table", "thead", "tbody", "tr", "td", "th"):
            if not self._open or self._open[-1] != tag:
                raise MalformedMarkup(f"unbalanced </{tag}>")
            self._open.pop()
        if tag in ("td", "th"):
            t, rs, cs, in_thead = self._cell_attrs
            text = "".join(self._text_parts)
            lines = [ln.strip() for ln in text.split("\n")]
            if lines == [""]:
                lines = []
            self._row.append((t, rs, cs, lines, in_thead))
            self._cell_attrs = None
            self._text_parts = []
        elif tag == "tr":
            self.rows.append(self._row)
            self._row = None
        elif tag == "thead":
            self.in_thead = False

    def handle_data(self, data):
        if self._cell_attrs is not None:
            self._text_parts.append(data)

    def close(self):
        super().close()
        if self._open:
            raise MalformedMarkup(f"unclosed tags: {self._open}")


def parse_markup_table(source: str, provenance: str = "") -> SourceTable:
    """Parse one markup table element into a SourceTable.

    Raises MalformedMarkup, InconsistentSpans or EmptyTable.
    """
    parser = _TableMarkupParser()
    try:
        parser.feed(source)
        parser.close()
    except MalformedMarkup:
        raise
    except Exception as exc:  # html.parser internal failures
        raise MalformedMarkup(str(exc))
    if not parser.saw_table:
        raise MalformedMarkup("no <table> element")
    rows = parser.rows
    if not rows:
        raise EmptyTable("table has no rows")

    n_rows = len(rows)
    occupied: Dict[Tuple[int, int], int] = {}  # lattice pos -> cell index
    cells: List[GridCell] = []
    content: List[List[str]] = []
    for r, row in enumerate(rows):
        cursor = 0
        for tag, rs, cs, lines, in_thead in row:
            while (r, cursor) in occupied:
                cursor += 1
            if r + rs > n_rows:
                raise InconsistentSpans(
                    f"cell at row {r} col {cursor} rowspan {rs} exceeds {n_rows} rows")
            idx = len(cells)
            for rr in range(r, r + rs):
                for cc in range(cursor, cursor + cs):
                    if (rr, cc) in occupied:
                        raise InconsistentSpans(
                            f"span overlap at ({rr},{cc})")
                    occupied[(rr, cc)] = idx
            cells.append(GridCell(row=r, col=cursor, row_span=rs, col_span=cs,
                                  is_header=(tag == "th" or in_thead)))
            content.append(lines)
            cursor += cs

    n_cols = max(c + 1 for _, c in occupied)
    # ragged rows leave uncovered lattice positions
    for r in range(n_rows):
        for c in range(n_cols):
            if (r, c) not in occupied:
                raise InconsistentSpans(f"position ({r},{c}) uncovered")

    order = sorted(range(len(cells)), key=lambda i: (cells[i].row, cells[i].col))
    grid = TableGrid(n_rows, n_cols, tuple(cells[i] for i in order))
    return SourceTable(grid=grid,
                       content=tuple(tuple(content[i]) for i in order),
                       provenance=provenance)


# --- line-geometry ingestion ----------------------------------------------

def snap_boundaries(values: Sequence[float], tol: float) -> List[float]:
    """Single-linkage clustering of coordinates; each cluster -> its mean."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    if not values:
        return []
    vals = sorted(values)
    out: List[float] = []
    cluster = [vals[0]]
    for v in vals[1:]:
        if v - cluster[-1] <= tol:
            cluster.append(v)
        else:
            out.append(sum(cluster) / len(cluster))
            cluster = [v]
    out.append(sum(cluster) / len(cluster))
    return out


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return (0x2E80 <= cp <= 0x9FFF or 0xF900 <= cp <= 0xFAFF
            or 0x3000 <= cp <= 0x303F or 0xFF00 <= cp <= 0xFFEF
            or 0x20000 <= cp <= 0x2FA1F)


def join_fragments(parts: Sequence[str]) -> str:
    """Concatenate left-to-right fragments: space-joined for scripts with
    spaces, no separator when either side is CJK."""
    out = ""
    for part in parts:
        if not out:
            out = part
            continue
        if not part:
            continue
        if _is_cjk(out[-1]) or _is_cjk(part[0]):
            out += part
        else:
            out += " " + part
    return out


def _group_lines(spans: List[TextSpan]) -> List[List[TextSpan]]:
    """Group spans of one cell into text lines (top-to-bottom, then
    left-to-right).  Two spans share a line when their vertical overlap is
    >= 50% of the shorter box height."""
    remaining = sorted(spans, key=lambda s: (s.box.y, s.box.x))
    lines: List[List[TextSpan]] = []
    for span in remaining:
        placed = False
        for line in lines:
            ref = line[0]
            ov = min(span.box.y2, ref.box.y2) - max(span.box.y, ref.box.y)
            shorter = min(span.box.h, ref.box.h)
            if shorter > 0 and ov >= 0.5 * shorter:
                line.append(span)
                placed = True
                break
        if not placed:
            lines.append([span])
    for line in lines:
        line.sort(key=lambda s: s.box.x)
    lines.sort(key=lambda ln: min(s.box.y for s in ln))
    return lines


def infer_grid_from_lines(lines: Sequence[LineSegment],
                          texts: Sequence[TextSpan],
                          tol: float = 2.0,
                          provenance: str = "") -> SourceTable:
    """Deduce structure and content of a bordered table from its ruling
    lines and extracted text spans."""
    h_lines = [l for l in lines if l.orientation == "h"]
    v_lines = [l for l in lines if l.orientation == "v"]
    if not h_lines or not v_lines:
        raise NoOuterBoundary("need both horizontal and vertical lines")

    row_ys = snap_boundaries([l.position for l in h_lines], tol)
    col_xs = snap_boundaries([l.position for l in v_lines], tol)
    if len(row_ys) < 2 or len(col_xs) < 2:
        raise NoOuterBoundary("fewer than two distinct boundaries on an axis")

    def nearest(vals: List[float], x: float) -> Optional[int]:
        best, dist = None, None
        for i, v in enumerate(vals):
            d = abs(v - x)
            if dist is None or d < dist:
                best, dist = i, d
        return best if dist is not None and dist <= tol else None

    # bucket segments by snapped boundary index
    h_at: Dict[int, List[LineSegment]] = {}
    for l in h_lines:
        i = nearest(row_ys, l.position)
        if i is not None:
            h_at.setdefault(i, []).append(l)
    v_at: Dict[int, List[LineSegment]] = {}
    for l in v_lines:
        i = nearest(col_xs, l.position)
        if i is not None:
            v_at.setdefault(i, []).append(l)

    def covered(segs: List[LineSegment], a: float, b: float) -> float:
        """Fraction of [a,b] covered by the union of segments (with tol slack)."""
        if b <= a:
            return 1.0
        ivals = sorted((max(a, s.start - tol), min(b, s.end + tol))
                       for s in segs)
        total, cur_a, cur_b = 0.0, None, None
        for s0, s1 in ivals:
            if s1 <= s0:
                continue
            if cur_b is None or s0 > cur_b:
                if cur_b is not None:
                    total += cur_b - cur_a
                cur_a, cur_b = s0, s1
            else:
                cur_b = max(cur_b, s1)
        if cur_b is not None:
            total += cur_b - cur_a
        return total / (b - a)

    x0, x1 = col_xs[0], col_xs[-1]
    y0, y1 = row_ys[0], row_ys[-1]
    if covered(h_at.get(0, []), x0, x1) < COVERAGE_FRACTION \
            or covered(h_at.get(len(row_ys) - 1, []), x0, x1) < COVERAGE_FRACTION \
            or covered(v_at.get(0, []), y0, y1) < COVERAGE_FRACTION \
            or covered(v_at.get(len(col_xs) - 1, []), y0, y1) < COVERAGE_FRACTION:
        raise NoOuterBoundary("outer boundary lines incomplete")

    n_rows, n_cols = len(row_ys) - 1, len(col_xs) - 1

    # separator presence between lattice neighbours
    def h_separated(r: int, c: int) -> bool:
        # between (r,c) and (r+1,c): horizontal boundary r+1 over column c
        segs = h_at.get(r + 1, [])
        return covered(segs, col_xs[c], col_xs[c + 1]) >= COVERAGE_FRACTION

    def v_separated(r: int, c: int) -> bool:
        # between (r,c) and (r,c+1): vertical boundary c+1 over row r
        segs = v_at.get(c + 1, [])
        return covered(segs, row_ys[r], row_ys[r + 1]) >= COVERAGE_FRACTION

    # flood-fill regions of non-separated neighbours
    region = [[-1] * n_cols for _ in range(n_rows)]
    n_regions = 0
    for r in range(n_rows):
        for c in range(n_cols):
            if region[r][c] != -1:
                continue
            stack = [(r, c)]
            region[r][c] = n_regions
            while stack:
                rr, cc = stack.pop()
                if rr + 1 < n_rows and region[rr + 1][cc] == -1 and not h_separated(rr, cc):
                    region[rr + 1][cc] = n_regions
                    stack.append((rr + 1, cc))
                if rr - 1 >= 0 and region[rr - 1][cc] == -1 and not h_separated(rr - 1, cc):
                    region[rr - 1][cc] = n_regions
                    stack.append((rr - 1, cc))
                if cc + 1 < n_cols and region[rr][cc + 1] == -1 and not v_separated(rr, cc):
                    region[rr][cc + 1] = n_regions
                    stack.append((rr, cc + 1))
                if cc - 1 >= 0 and region[rr][cc - 1] == -1 and not v_separated(rr, cc - 1):
                    region[rr][cc - 1] = n_regions
                    stack.append((rr, cc - 1))
            n_regions += 1

    region_cells: List[GridCell] = []
    for reg in range(n_regions):
        positions = [(r, c) for r in range(n_rows) for c in range(n_cols)
                     if region[r][c] == reg]
        rmin = min(p[0] for p in positions)
        rmax = max(p[0] for p in positions)
        cmin = min(p[1] for p in positions)
        cmax = max(p[1] for p in positions)
        if len(positions) != (rmax - rmin + 1) * (cmax - cmin + 1):
            raise NonRectangularSpan(
                f"merged region {sorted(positions)} is not a rectangle")
        region_cells.append(GridCell(row=rmin, col=cmin,
                                     row_span=rmax - rmin + 1, col_span=cmax - cmin + 1))
    order = sorted(range(n_regions), key=lambda i: (region_cells[i].row, region_cells[i].col))
    cells = [region_cells[i] for i in order]
    region_to_cell = {reg: pos for pos, reg in enumerate(order)}
    grid = TableGrid(n_rows, n_cols, tuple(cells))
    bad = validate_grid(grid)
    if bad:
        raise NonRectangularSpan("; ".join(bad))

    # assign text spans to cells by box center
    per_cell: List[List[TextSpan]] = [[] for _ in cells]
    for span in texts:
        cx, cy = span.box.center
        if not (x0 <= cx <= x1 and y0 <= cy <= y1):
            raise OrphanText(f"text {span.text!r} center ({cx},{cy}) outside table")
        r = next(i for i in range(n_rows) if cy <= row_ys[i + 1] or i == n_rows - 1)
        c = next(i for i in range(n_cols) if cx <= col_xs[i + 1] or i == n_cols - 1)
        per_cell[region_to_cell[region[r][c]]].append(span)

    content: List[Tuple[str, ...]] = []
    for i, cell in enumerate(cells):
        groups = _group_lines(per_cell[i])
        content.append(tuple(join_fragments([s.text for s in g]) for g in groups))

    boundaries = GridBoundaries(tuple(row_ys), tuple(col_xs))
    table = SourceTable(grid=grid, content=tuple(content), provenance=provenance)
    return table


def boundaries_from_layout(row_ys: Sequence[float], col_xs: Sequence[float]) -> GridBoundaries:
    return GridBoundaries(tuple(row_ys), tuple(col_xs))


# --- JSON wire format ------------------------------------------------------

def lines_texts_from_json(obj: dict) -> Tuple[List[LineSegment], List[TextSpan]]:
    """{"lines":[{"orient":"h|v","pos":f,"start":f,"end":f,"thickness":f}],
       "texts":[{"x":f,"y":f,"w":f,"h":f,"text":s,"fontSize":f?}]}"""
    lines = [LineSegment(orientation=l["orient"], position=l["pos"],
                         start=l["start"], end=l["end"],
                         thickness=l.get("thickness", 1.0))
             for l in obj.get("lines", [])]
    texts = [TextSpan(box=Rect(t["x"], t["y"], t["w"], t["h"]), text=t["text"],
                      font_size=t.get("fontSize"))
             for t in obj.get("texts", [])]
    return lines, texts
