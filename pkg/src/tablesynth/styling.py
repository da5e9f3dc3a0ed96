"""Style profiles: representation, extraction, category matching and
perturbation.

A profile holds a complete table-level attribute set plus sparse
row/column/cell overrides; resolution follows most-specific-wins
(cell > column > row > table).
"""
from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InsufficientEvidence, UnknownCategory
from .ingest import GridBoundaries, LineSegment, TextSpan, COVERAGE_FRACTION
from .model import TableGrid

Color = Tuple[int, int, int]

H_ALIGNS = ("left", "right", "center", "indent-left", "indent-right")
V_ALIGNS = ("top", "bottom", "center", "indent-top", "indent-bottom")
BLOCK_ALIGNS = ("left", "right", "center", "indent")
OUTER_MODES = ("full", "no-sides", "no-top-bottom", "none")
INNER_MODES = ("full", "no-horizontal", "no-vertical", "none",
               "partial-horizontal", "partial-vertical")


@dataclass(frozen=True)
class CellStyle:
    """Fully resolved per-cell visual attributes."""
    font_family: str = "default"
    font_size: float = 10.0
    text_color: Color = (0, 0, 0)
    line_spacing: float = 2.0
    intra_block_align: str = "left"
    intra_block_indent: float = 0.0
    h_align: str = "left"
    h_indent: float = 0.0
    v_align: str = "center"
    v_indent: float = 0.0
    padding_top: float = 2.0
    padding_bottom: float = 2.0
    padding_left: float = 4.0
    padding_right: float = 4.0
    background: Optional[Color] = None


# CellStyle fields perturbed as numeric quantities; everything else in the
# style is categorical (or a colour) and left untouched.
NUMERIC_STYLE_FIELDS = (
    "font_size", "line_spacing", "intra_block_indent", "h_indent", "v_indent",
    "padding_top", "padding_bottom", "padding_left", "padding_right",
)
# paddings may legitimately be zero; the rest must stay strictly positive
NONNEG_STYLE_FIELDS = (
    "intra_block_indent", "h_indent", "v_indent",
    "padding_top", "padding_bottom", "padding_left", "padding_right",
)


@dataclass(frozen=True)
class OuterBorder:
    mode: str = "full"
    line_type: str = "single-solid"  # single-solid | double-solid
    thickness: float = 1.0
    color: Color = (0, 0, 0)


@dataclass(frozen=True)
class InnerBorder:
    mode: str = "full"
    line_type: str = "solid"  # solid | dashed
    dash_gap: float = 3.0
    thickness: float = 1.0
    color: Color = (0, 0, 0)
    # for partial-horizontal / partial-vertical: one flag per internal
    # boundary (True = drawn); cycled if shorter than the boundary count
    mask: Tuple[bool, ...] = ()


Override = Dict[str, object]


@dataclass(frozen=True)
class StyleProfile:
    base: CellStyle = field(default_factory=CellStyle)
    outer_border: OuterBorder = field(default_factory=OuterBorder)
    inner_border: InnerBorder = field(default_factory=InnerBorder)
    row_overrides: Tuple[Tuple[int, Tuple[Tuple[str, object], ...]], ...] = ()
    col_overrides: Tuple[Tuple[int, Tuple[Tuple[str, object], ...]], ...] = ()
    cell_overrides: Tuple[Tuple[Tuple[int, int], Tuple[Tuple[str, object], ...]], ...] = ()
    name: str = ""

    @staticmethod
    def build(base: CellStyle = None,
              outer_border: OuterBorder = None,
              inner_border: InnerBorder = None,
              row_overrides: Dict[int, Override] = None,
              col_overrides: Dict[int, Override] = None,
              cell_overrides: Dict[Tuple[int, int], Override] = None,
              name: str = "") -> "StyleProfile":
        freeze = lambda d: tuple(sorted(
            (k, tuple(sorted(v.items()))) for k, v in (d or {}).items()))
        return StyleProfile(
            base=base or CellStyle(),
            outer_border=outer_border or OuterBorder(),
            inner_border=inner_border or InnerBorder(),
            row_overrides=freeze(row_overrides),
            col_overrides=freeze(col_overrides),
            cell_overrides=freeze(cell_overrides),
            name=name)

    def _patch(self, style: CellStyle, patch: Sequence[Tuple[str, object]]) -> CellStyle:
        updates = {k: v for k, v in patch}
        return replace(style, **updates) if updates else style

    def resolve_row(self, row: int) -> CellStyle:
        style = self.base
        for r, patch in self.row_overrides:
            if r == row:
                style = self._patch(style, patch)
        return style

    def resolve_col(self, col: int) -> CellStyle:
        style = self.base
        for c, patch in self.col_overrides:
            if c == col:
                style = self._patch(style, patch)
        return style

    def resolve(self, row: int, col: int) -> CellStyle:
        style = self.resolve_row(row)
        for c, patch in self.col_overrides:
            if c == col:
                style = self._patch(style, patch)
        for (r, c), patch in self.cell_overrides:
            if r == row and c == col:
                style = self._patch(style, patch)
        return style

    @property
    def bordered(self) -> bool:
        return self.outer_border.mode == "full" and self.inner_border.mode == "full"


# --- perturbation ----------------------------------------------------------

def _perturb_style(style: CellStyle, max_frac: float, rng: random.Random) -> CellStyle:
    updates = {}
    for name in NUMERIC_STYLE_FIELDS:
        v = getattr(style, name)
        u = rng.uniform(-max_frac, max_frac)
        nv = v * (1.0 + u)
        if name in NONNEG_STYLE_FIELDS:
            nv = max(0.0, nv)
        updates[name] = nv
    return replace(style, **updates)


def _perturb_patch(patch: Tuple[Tuple[str, object], ...], max_frac: float,
                   rng: random.Random) -> Tuple[Tuple[str, object], ...]:
    out = []
    for name, v in patch:
        if name in NUMERIC_STYLE_FIELDS:
            nv = v * (1.0 + rng.uniform(-max_frac, max_frac))
            if name in NONNEG_STYLE_FIELDS:
                nv = max(0.0, nv)
            out.append((name, nv))
        else:
            out.append((name, v))
    return tuple(out)


def perturb_profile(profile: StyleProfile, max_frac: float,
                    rng: random.Random) -> StyleProfile:
    """Jitter every numeric attribute by a uniform relative amount in
    [-max_frac, +max_frac]; categorical attributes are never changed."""
    if max_frac < 0:
        raise ValueError("max_frac must be >= 0")
    base = _perturb_style(profile.base, max_frac, rng)
    outer = replace(profile.outer_border,
                    thickness=profile.outer_border.thickness
                    * (1.0 + rng.uniform(-max_frac, max_frac)))
    inner = replace(profile.inner_border,
                    thickness=profile.inner_border.thickness
                    * (1.0 + rng.uniform(-max_frac, max_frac)),
                    dash_gap=profile.inner_border.dash_gap
                    * (1.0 + rng.uniform(-max_frac, max_frac)))
    return replace(profile,
                   base=base, outer_border=outer, inner_border=inner,
                   row_overrides=tuple((k, _perturb_patch(p, max_frac, rng))
                                       for k, p in profile.row_overrides),
                   col_overrides=tuple((k, _perturb_patch(p, max_frac, rng))
                                       for k, p in profile.col_overrides),
                   cell_overrides=tuple((k, _perturb_patch(p, max_frac, rng))
                                        for k, p in profile.cell_overrides))


# --- category matching -----------------------------------------------------

@dataclass(frozen=True)
class CategoryDescriptor:
    category_id: str
    keywords: Tuple[Tuple[str, float], ...]  # (keyword, weight), weights > 0
    profiles: Tuple[StyleProfile, ...]
    fallback: bool = False

    def __post_init__(self):
        if not self.profiles:
            raise ValueError(f"category {self.category_id!r} has no profiles")
        if any(w <= 0 for _, w in self.keywords):
            raise ValueError("keyword weights must be positive")


def match_category(content: Sequence[Sequence[str]],
                   descriptors: Sequence[CategoryDescriptor]) -> str:
    """Keyword-score argmax over descriptors; ties break by descriptor
    order; a zero best score falls back to the designated (or first)
    fallback descriptor."""
    if not descriptors:
        raise ValueError("descriptors must be non-empty")
    text = "\n".join(line for lines in content for line in lines)
    best_id, best_score = None, 0.0
    for d in descriptors:
        score = sum(w for k, w in d.keywords if k in text)
        if score > best_score:
            best_id, best_score = d.category_id, score
    if best_id is not None:
        return best_id
    for d in descriptors:
        if d.fallback:
            return d.category_id
    return descriptors[0].category_id


def select_profile(category_id: str,
                   descriptors: Sequence[CategoryDescriptor],
                   rng: random.Random) -> StyleProfile:
    for d in descriptors:
        if d.category_id == category_id:
            return d.profiles[rng.randrange(len(d.profiles))]
    raise UnknownCategory(category_id)


# --- extraction from geometry ----------------------------------------------

def _median(vals: Sequence[float]) -> float:
    s = sorted(vals)
    n = len(s)
    if n % 2:
        return s[n // 2]
    return (s[n // 2 - 1] + s[n // 2]) / 2.0


def _pick_alignment(lefts: List[float], rights: List[float],
                    centers: List[float], axis: str) -> str:
    hypotheses = []
    names = (("left", lefts), ("right", rights), ("center", centers)) \
        if axis == "h" else (("top", lefts), ("bottom", rights), ("center", centers))
    for name, edges in names:
        ref = _median(edges)
        hypotheses.append((sum(abs(e - ref) for e in edges), name))
    # stable: first-listed hypothesis wins ties
    best = min(range(3), key=lambda i: hypotheses[i][0])
    return hypotheses[best][1]


def extract_style_profile(texts: Sequence[TextSpan],
                          lines: Sequence[LineSegment],
                          grid: TableGrid,
                          boundaries: GridBoundaries,
                          tol: float = 2.0) -> StyleProfile:
    """Recover a style profile from observed geometry.

    Alignments are chosen per column (horizontal) and per row (vertical) as
    the hypothesis minimizing total absolute edge deviation; paddings are
    the observed min gaps between text-block edges and cell edges; border
    modes come from ruling presence.
    """
    if not grid.cells or not texts:
        raise InsufficientEvidence("need at least one cell and one text span")

    row_ys, col_xs = boundaries.row_ys, boundaries.col_xs
    n_rows, n_cols = grid.n_rows, grid.n_cols

    # assign spans to cells by center, then form per-cell blocks
    per_cell: List[List[TextSpan]] = [[] for _ in grid.cells]
    lattice_owner: Dict[Tuple[int, int], int] = {}
    for i, cell in enumerate(grid.cells):
        for r in range(cell.row, cell.row + cell.row_span):
            for c in range(cell.col, cell.col + cell.col_span):
                lattice_owner[(r, c)] = i
    for span in texts:
        cx, cy = span.box.center
        r = next((i for i in range(n_rows) if cy <= row_ys[i + 1]), n_rows - 1)
        c = next((i for i in range(n_cols) if cx <= col_xs[i + 1]), n_cols - 1)
        per_cell[lattice_owner[(r, c)]].append(span)

    blocks: Dict[int, Tuple[float, float, float, float]] = {}
    for i, spans in enumerate(per_cell):
        if spans:
            blocks[i] = (min(s.box.x for s in spans), min(s.box.y for s in spans),
                         max(s.box.x2 for s in spans), max(s.box.y2 for s in spans))

    font_size = _median([s.box.h for s in texts])

    col_overrides: Dict[int, Override] = {}
    pad_left_all, pad_right_all = [], []
    for c in range(n_cols):
        lefts, rights, centers = [], [], []
        pls, prs = [], []
        for i, cell in enumerate(grid.cells):
            if cell.col != c or cell.col_span != 1 or i not in blocks:
                continue
            bx0, _, bx1, _ = blocks[i]
            lefts.append(bx0)
            rights.append(bx1)
            centers.append((bx0 + bx1) / 2.0)
            pls.append(bx0 - col_xs[c])
            prs.append(col_xs[c + 1] - bx1)
        if not lefts:
            continue
        align = _pick_alignment(lefts, rights, centers, "h")
        col_overrides[c] = {
            "h_align": align,
            "padding_left": max(0.0, min(pls)),
            "padding_right": max(0.0, min(prs)),
        }

    row_overrides: Dict[int, Override] = {}
    for r in range(n_rows):
        tops, bottoms, centers = [], [], []
        pts, pbs = [], []
        for i, cell in enumerate(grid.cells):
            if cell.row != r or cell.row_span != 1 or i not in blocks:
                continue
            _, by0, _, by1 = blocks[i]
            tops.append(by0)
            bottoms.append(by1)
            centers.append((by0 + by1) / 2.0)
            pts.append(by0 - row_ys[r])
            pbs.append(row_ys[r + 1] - by1)
        if not tops:
            continue
        align = _pick_alignment(tops, bottoms, centers, "v")
        row_overrides[r] = {
            "v_align": align,
            "padding_top": max(0.0, min(pts)),
            "padding_bottom": max(0.0, min(pbs)),
        }

    # border deduction from ruling presence
    def coverage(segs, a, b):
        if b <= a:
            return 1.0
        ivals = sorted((max(a, s.start - tol), min(b, s.end + tol)) for s in segs)
        total, cur = 0.0, None
        for s0, s1 in ivals:
            if s1 <= s0:
                continue
            if cur is None or s0 > cur[1]:
                if cur:
                    total += cur[1] - cur[0]
                cur = [s0, s1]
            else:
                cur[1] = max(cur[1], s1)
        if cur:
            total += cur[1] - cur[0]
        return total / (b - a)

    h_segs = [l for l in lines if l.orientation == "h"]
    v_segs = [l for l in lines if l.orientation == "v"]

    def at(segs, pos):
        return [s for s in segs if abs(s.position - pos) <= tol]

    x0, x1 = col_xs[0], col_xs[-1]
    y0, y1 = row_ys[0], row_ys[-1]
    top = coverage(at(h_segs, y0), x0, x1) >= COVERAGE_FRACTION
    bottom = coverage(at(h_segs, y1), x0, x1) >= COVERAGE_FRACTION
    left = coverage(at(v_segs, x0), y0, y1) >= COVERAGE_FRACTION
    right = coverage(at(v_segs, x1), y0, y1) >= COVERAGE_FRACTION
    if top and bottom and left and right:
        outer_mode = "full"
    elif top and bottom:
        outer_mode = "no-sides"
    elif left and right:
        outer_mode = "no-top-bottom"
    else:
        outer_mode = "none"

    # an internal boundary counts as present if every edge piece it should
    # cover (excluding spans crossing it) is covered
    def h_boundary_present(i: int) -> bool:
        segs = at(h_segs, row_ys[i])
        for c in range(n_cols):
            owner_above = lattice_owner[(i - 1, c)]
            owner_below = lattice_owner[(i, c)]
            if owner_above == owner_below:
                continue  # span crosses this boundary here
            if coverage(segs, col_xs[c], col_xs[c + 1]) < COVERAGE_FRACTION:
                return False
        return True

    def v_boundary_present(i: int) -> bool:
        segs = at(v_segs, col_xs[i])
        for r in range(n_rows):
            owner_l = lattice_owner[(r, i - 1)]
            owner_r = lattice_owner[(r, i)]
            if owner_l == owner_r:
                continue
            if coverage(segs, row_ys[r], row_ys[r + 1]) < COVERAGE_FRACTION:
                return False
        return True

    h_present = [h_boundary_present(i) for i in range(1, n_rows)]
    v_present = [v_boundary_present(i) for i in range(1, n_cols)]
    all_h = all(h_present) if h_present else True
    any_h = any(h_present)
    all_v = all(v_present) if v_present else True
    any_v = any(v_present)
    mask: Tuple[bool, ...] = ()
    if all_h and all_v:
        inner_mode = "full"
    elif not any_h and all_v:
        inner_mode = "no-horizontal"
    elif not any_v and all_h:
        inner_mode = "no-vertical"
    elif not any_h and not any_v:
        inner_mode = "none"
    elif all_v:
        inner_mode = "partial-horizontal"
        mask = tuple(h_present)
    elif all_h:
        inner_mode = "partial-vertical"
        mask = tuple(v_present)
    else:
        inner_mode = "partial-horizontal"  # closest description available
        mask = tuple(h_present)

    thickness = _median([l.thickness for l in lines]) if lines else 1.0
    return StyleProfile.build(
        base=CellStyle(font_size=font_size),
        outer_border=OuterBorder(mode=outer_mode, thickness=thickness),
        inner_border=InnerBorder(mode=inner_mode, thickness=thickness, mask=mask),
        row_overrides=row_overrides,
        col_overrides=col_overrides,
        name="extracted")


# --- JSON (de)serialization ------------------------------------------------

def _style_to_json(style: CellStyle) -> dict:
    d = dataclasses.asdict(style)
    d["text_color"] = list(style.text_color)
    if style.background is not None:
        d["background"] = list(style.background)
    return d


def _style_from_json(obj: dict) -> CellStyle:
    kw = dict(obj)
    if "text_color" in kw:
        kw["text_color"] = tuple(kw["text_color"])
    if kw.get("background") is not None:
        kw["background"] = tuple(kw["background"])
    return CellStyle(**kw)


def _patch_from_json(obj: dict) -> Override:
    out = dict(obj)
    for key in ("text_color", "background"):
        if out.get(key) is not None:
            out[key] = tuple(out[key])
    return out


def profile_to_json(profile: StyleProfile) -> dict:
    return {
        "name": profile.name,
        "base": _style_to_json(profile.base),
        "outerBorder": {
            "mode": profile.outer_border.mode,
            "lineType": profile.outer_border.line_type,
            "thickness": profile.outer_border.thickness,
            "color": list(profile.outer_border.color),
        },
        "innerBorder": {
            "mode": profile.inner_border.mode,
            "lineType": profile.inner_border.line_type,
            "dashGap": profile.inner_border.dash_gap,
            "thickness": profile.inner_border.thickness,
            "color": list(profile.inner_border.color),
            "mask": list(profile.inner_border.mask),
        },
        "rowOverrides": {str(k): dict(p) for k, p in profile.row_overrides},
        "colOverrides": {str(k): dict(p) for k, p in profile.col_overrides},
        "cellOverrides": {f"{r},{c}": dict(p)
                          for (r, c), p in profile.cell_overrides},
    }


def profile_from_json(obj: dict) -> StyleProfile:
    ob = obj.get("outerBorder", {})
    ib = obj.get("innerBorder", {})
    return StyleProfile.build(
        base=_style_from_json(obj.get("base", {})),
        outer_border=OuterBorder(
            mode=ob.get("mode", "full"),
            line_type=ob.get("lineType", "single-solid"),
            thickness=ob.get("thickness", 1.0),
            color=tuple(ob.get("color", (0, 0, 0)))),
        inner_border=InnerBorder(
            mode=ib.get("mode", "full"),
            line_type=ib.get("lineType", "solid"),
            dash_gap=ib.get("dashGap", 3.0),
            thickness=ib.get("thickness", 1.0),
            color=tuple(ib.get("color", (0, 0, 0))),
            mask=tuple(bool(m) for m in ib.get("mask", ()))),
        row_overrides={int(k): _patch_from_json(v)
                       for k, v in obj.get("rowOverrides", {}).items()},
        col_overrides={int(k): _patch_from_json(v)
                       for k, v in obj.get("colOverrides", {}).items()},
        cell_overrides={tuple(int(x) for x in k.split(",")): _patch_from_json(v)
                        for k, v in obj.get("cellOverrides", {}).items()},
        name=obj.get("name", ""))


def descriptors_from_json(obj: dict) -> List[CategoryDescriptor]:
    """{"categories":[{"id":s,"keywords":[{"k":s,"w":f}],
        "profiles":[ProfileJSON,...],"fallback":bool}]}"""
    out = []
    for d in obj["categories"]:
        out.append(CategoryDescriptor(
            category_id=d["id"],
            keywords=tuple((k["k"], float(k["w"])) for k in d.get("keywords", [])),
            profiles=tuple(profile_from_json(p) for p in d["profiles"]),
            fallback=bool(d.get("fallback", False))))
    return out


def descriptors_to_json(descriptors: Sequence[CategoryDescriptor]) -> dict:
    return {"categories": [{
        "id": d.category_id,
        "keywords": [{"k": k, "w": w} for k, w in d.keywords],
        "profiles": [profile_to_json(p) for p in d.profiles],
        "fallback": d.fallback,
    } for d in descriptors]}
