import random

import pytest

from tablesynth.annotate import (AnnotationRecord, content_tokens,
                                 emit_annotation, emit_structure_markup,
                                 markup_from_record, record_from_json,
                                 structure_tokens, text_from_tokens)
from tablesynth.errors import BoxOutOfBounds
from tablesynth.gen import (default_bordered_profile, random_grid,
                            random_source_table)
from tablesynth.ingest import parse_markup_table
from tablesynth.layout import solve_layout
from tablesynth.metrics import teds
from tablesynth.model import content_as_lists
from tablesynth.styling import CellStyle, StyleProfile

from conftest import make_grid

import json


class TestStructureMarkup:
    def test_one_by_two(self):
        g = make_grid(1, 2, [(0, 0, 1, 1), (0, 1, 1, 1)])
        out = emit_structure_markup(g, [["a"], ["b"]])
        assert out == "<table><tr><td>a</td><td>b</td></tr></table>"

    def test_colspan_attribute(self):
        g = make_grid(1, 2, [(0, 0, 1, 2)])
        assert 'colspan="2"' in emit_structure_markup(g, [["x"]])

    def test_header_rows_wrapped_in_thead(self):
        g = make_grid(2, 1, [(0, 0, 1, 1, True), (1, 0, 1, 1)])
        out = emit_structure_markup(g, [["h"], ["b"]])
        assert out == ("<table><thead><tr><td>h</td></tr></thead>"
                       "<tbody><tr><td>b</td></tr></tbody></table>")

    def test_mixed_header_row_not_wrapped(self):
        g = make_grid(1, 2, [(0, 0, 1, 1, True), (0, 1, 1, 1)])
        out = emit_structure_markup(g, [["h"], ["b"]])
        assert "<thead>" not in out and "<th>" in out

    def test_multiline_joined_with_br(self):
        g = make_grid(1, 1, [(0, 0, 1, 1)])
        assert "<td>a<br>b</td>" in emit_structure_markup(g, [["a", "b"]])

    def test_escaping(self):
        g = make_grid(1, 1, [(0, 0, 1, 1)])
        assert "<td>a &amp; &lt;b&gt;</td>" in \
            emit_structure_markup(g, [["a & <b>"]])

    def test_parse_emit_identity_1000_grids(self):
        rng = random.Random(77)
        for _ in range(1000):
            g = random_grid(rng)
            out = emit_structure_markup(g, [["x"]] * len(g.cells))
            assert parse_markup_table(out).grid == g


def _layout_record(grid, content, meta=None, image_file="t.png", margin=8):
    p = StyleProfile.build(base=CellStyle(
        font_size=10, padding_top=2, padding_bottom=2,
        padding_left=2, padding_right=2))
    lay = solve_layout(grid, content, p)
    return emit_annotation(lay, grid, content, meta or {}, image_file,
                           margin=margin)


class TestEmitAnnotation:
    def test_cell_box_margin_offset(self):
        # 1x1 cell measuring 44x16 lands at (8,8,44,16) with margin 8
        g = make_grid(1, 1, [(0, 0, 1, 1)])
        rec = _layout_record(g, [["四个汉字"]])
        assert rec.cells[0]["bbox"] == [8, 8, 44, 16]

    def test_empty_cell(self):
        g = make_grid(1, 2, [(0, 0, 1, 1), (0, 1, 1, 1)])
        rec = _layout_record(g, [["a"], []])
        assert rec.cells[1]["tokens"] == []
        assert rec.cells[1]["lines"] == []
        assert len(rec.cells[1]["bbox"]) == 4

    def test_spanning_cell_count_meta(self):
        rng = random.Random(31)
        from tablesynth.model import spanning_cell_count
        for _ in range(20):
            t = random_source_table(rng)
            rec = _layout_record(t.grid, content_as_lists(t))
            assert rec.meta["spanningCellCount"] == spanning_cell_count(t.grid)

    def test_meta_passthrough(self):
        g = make_grid(1, 1, [(0, 0, 1, 1)])
        rec = _layout_record(g, [["a"]], meta={"seed": 7, "bordered": True})
        assert rec.meta["seed"] == 7 and rec.meta["bordered"] is True

    def test_line_boxes_inside_cell_boxes(self):
        rng = random.Random(32)
        for _ in range(20):
            t = random_source_table(rng)
            rec = _layout_record(t.grid, content_as_lists(t))
            for cell in rec.cells:
                cx, cy, cw, ch = cell["bbox"]
                for lx, ly, lw, lh in cell["lines"]:
                    assert cx <= lx and ly >= cy
                    assert lx + lw <= cx + cw and ly + lh <= cy + ch

    def test_non_empty_cells_have_boxes(self):
        rng = random.Random(33)
        for _ in range(20):
            t = random_source_table(rng)
            content = content_as_lists(t)
            rec = _layout_record(t.grid, content)
            for lines, cell in zip(content, rec.cells):
                if any(lines):
                    assert cell["lines"]
                assert cell["bbox"] is not None

    def test_out_of_bounds_raised(self):
        g = make_grid(1, 1, [(0, 0, 1, 1)])
        p = default_bordered_profile()
        lay = solve_layout(g, [["abc"]], p)
        with pytest.raises(BoxOutOfBounds):
            # negative margin pushes the cell box outside the image frame
            emit_annotation(lay, g, [["abc"]], {}, "t.png", margin=-4)

    def test_structure_teds_struct_self_unity(self):
        rng = random.Random(34)
        for _ in range(20):
            g = random_grid(rng)
            markup = emit_structure_markup(g)
            assert teds(markup, markup, struct_only=True) == 1.0


class TestContentTokens:
    def test_cjk_per_char(self):
        assert content_tokens(["货币资金"]) == ["货", "币", "资", "金"]

    def test_latin_per_word(self):
        assert content_tokens(["net cash flow"]) == ["net", "cash", "flow"]

    def test_mixed(self):
        assert content_tokens(["合计total 12"]) == ["合", "计", "total", "12"]

    def test_round_trip_text(self):
        # spaces adjacent to CJK are not preserved (CJK tokens join bare)
        for s in ["net cash", "货币资金", "合计total", "ab cd资"]:
            assert text_from_tokens(content_tokens([s])) == s


class TestRecordSerialization:
    def test_json_line_field_order(self):
        g = make_grid(1, 1, [(0, 0, 1, 1)])
        rec = _layout_record(g, [["a"]])
        line = rec.to_json_line()
        obj = json.loads(line)
        assert list(obj.keys()) == ["file", "structure", "cells", "meta"]
        assert record_from_json(obj).structure == rec.structure

    def test_markup_from_record_matches_emitter(self):
        rng = random.Random(35)
        for _ in range(20):
            t = random_source_table(rng)
            content = content_as_lists(t)
            rec = _layout_record(t.grid, content)
            rebuilt = markup_from_record(rec, with_content=False)
            assert rebuilt == emit_structure_markup(t.grid)

    def test_structure_tokens_parse_back(self):
        rng = random.Random(36)
        for _ in range(50):
            g = random_grid(rng)
            rec_markup = "".join(structure_tokens(g))
            assert parse_markup_table(rec_markup).grid == g
