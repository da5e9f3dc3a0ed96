"""Acceptance suite: one pass/fail line per criterion.

Verdict lines are collected and echoed in the terminal summary (see
conftest) so they survive pytest's output capture; the assertion right
after each verdict is what fails the test.
"""
import json
import random
import time

import pytest

import conftest

from tablesynth.annotate import (emit_structure_markup, markup_from_record,
                                 record_from_json)
from tablesynth.gen import (default_bordered_profile, random_source_table)
from tablesynth.ingest import TextSpan, infer_grid_from_lines
from tablesynth.layout import solve_layout
from tablesynth.metrics import (Detection, DetectionSet, ap50, teds,
                                tree_edit_distance)
from tablesynth.model import (Rect, content_as_lists, spanning_bucket,
                              spanning_cell_count, table_to_json)
from tablesynth.pipeline import (BUCKETS, PipelineConfig, run_pipeline,
                                 stratified_sample)
from tablesynth.render import visible_rulings
from tablesynth.styling import (NUMERIC_STYLE_FIELDS, CellStyle, StyleProfile,
                                extract_style_profile, perturb_profile)

from conftest import grid_shape, make_grid
from test_metrics import oracle_distance, random_tree
from test_pipeline import make_pool, table_with_spans, write_sources

TABLE1_DIST = {"0": 0.4944, "1": 0.0404, "2": 0.1323, "3": 0.1476,
               "4+": 0.1853}


def verdict(ok: bool, line: str) -> None:
    text = f"[{'PASS' if ok else 'FAIL'}] {line}"
    print(text)
    conftest.acceptance_verdicts.append(text)


def test_criterion_1_structure_round_trip(tmp_path):
    rng = random.Random(1001)
    tables = [random_source_table(rng) for _ in range(1000)]
    src = write_sources(tmp_path, tables)
    cfg = PipelineConfig(source_path=src, retain_fraction=0.5,
                         master_seed=1001, out_dir=str(tmp_path / "o"))
    t0 = time.monotonic()
    run_pipeline(cfg)
    with open(tmp_path / "o" / "annotations.jsonl", encoding="utf-8") as fh:
        records = [record_from_json(json.loads(l)) for l in fh]
    elapsed = time.monotonic() - t0
    mismatches = 0
    for table, rec in zip(tables, records):
        gt = emit_structure_markup(table.grid)
        pred = markup_from_record(rec, with_content=False)
        if teds(gt, pred, struct_only=True) != 1.0:
            mismatches += 1
    ok = len(records) == 1000 and mismatches == 0 and elapsed < 120
    verdict(ok, f"criterion 1 structure round trip: {len(records)} records, "
                f"{mismatches} TEDS-Struct mismatches, {elapsed:.1f}s")
    assert ok


def test_criterion_2_bordered_reinference():
    rng = random.Random(1002)
    profile = default_bordered_profile()
    failures = 0
    for _ in range(500):
        t = random_source_table(rng)
        lay = solve_layout(t.grid, content_as_lists(t), profile)
        inferred = infer_grid_from_lines(lay.rulings, [], tol=0.5)
        if grid_shape(inferred.grid) != grid_shape(t.grid):
            failures += 1
    verdict(failures == 0,
            f"criterion 2 bordered re-inference: {500 - failures}/500 grids "
            f"reproduced cell-for-cell")
    assert failures == 0


def test_criterion_3_geometry_invariants():
    rng = random.Random(1003)
    profile = default_bordered_profile()
    eps = 1e-6
    violations = 0
    for _ in range(1000):
        t = random_source_table(rng)
        lay = solve_layout(t.grid, content_as_lists(t), profile)
        # NESTING
        for i in range(len(t.grid.cells)):
            cb, ab, bb = (lay.cell_boxes[i], lay.aligned_boxes[i],
                          lay.block_boxes[i])
            for outer, inner in ((lay.table_box, cb), (cb, ab), (ab, bb)):
                if (inner.x < outer.x - eps or inner.y < outer.y - eps
                        or inner.x2 > outer.x2 + eps
                        or inner.y2 > outer.y2 + eps):
                    violations += 1
            for lb in lay.line_boxes[i]:
                if (lb.x < bb.x - eps or lb.y < bb.y - eps
                        or lb.x2 > bb.x2 + eps or lb.y2 > bb.y2 + eps):
                    violations += 1
        # interior disjointness of rounded cell boxes
        rounded = [b.rounded() for b in lay.cell_boxes]
        for i in range(len(rounded)):
            for j in range(i + 1, len(rounded)):
                a, b = rounded[i], rounded[j]
                ox = min(a.x2, b.x2) - max(a.x, b.x)
                oy = min(a.y2, b.y2) - max(a.y, b.y)
                if ox > 1 and oy > 1:  # >1 px beyond a shared edge
                    violations += 1
        # union tiling: every rounded cell edge lands on the rounded
        # row/column boundary (tolerance 1 px at shared edges), and the
        # cell areas sum to the table area
        rys = [round(y) for y in lay.row_ys]
        cxs = [round(x) for x in lay.col_xs]
        area = 0
        for cell, rb in zip(t.grid.cells, rounded):
            if (abs(rb.x - cxs[cell.col]) > 1
                    or abs(rb.x2 - cxs[cell.col + cell.col_span]) > 1
                    or abs(rb.y - rys[cell.row]) > 1
                    or abs(rb.y2 - rys[cell.row + cell.row_span]) > 1):
                violations += 1
            area += (cxs[cell.col + cell.col_span] - cxs[cell.col]) * \
                (rys[cell.row + cell.row_span] - rys[cell.row])
        if area != (cxs[-1] - cxs[0]) * (rys[-1] - rys[0]):
            violations += 1
    verdict(violations == 0,
            f"criterion 3 geometry invariants: {violations} violations over "
            f"1000 tables")
    assert violations == 0


def test_criterion_4_metric_oracles():
    rng = random.Random(1004)
    disagreements = 0
    for _ in range(500):
        a, b = random_tree(rng), random_tree(rng)
        if abs(tree_edit_distance(a, b) - oracle_distance(a, b, True)) > 1e-9:
            disagreements += 1
    gt = "<table><tr><td>a</td><td>b</td></tr></table>"
    pred = "<table><tr><td>a</td></tr></table>"
    v075 = teds(gt, pred)
    v083 = teds("<table><tr><td>ab</td></tr></table>",
                "<table><tr><td>ac</td></tr></table>")
    gtb = (Rect(0, 0, 10, 10), Rect(20, 0, 10, 10))
    preds = (Detection(Rect(0, 0, 10, 10), 0.9),
             Detection(Rect(100, 0, 10, 10), 0.8),
             Detection(Rect(20, 0, 10, 10), 0.7))
    v_ap = ap50(DetectionSet(preds, gtb))
    ok = (disagreements == 0 and abs(v075 - 0.75) <= 1e-9
          and abs(v083 - (1 - 0.5 / 3)) <= 1e-9
          and abs(v_ap - 0.8350) <= 1e-4)
    verdict(ok, f"criterion 4 metric oracles: {disagreements}/500 oracle "
                f"disagreements; teds {v075:.4f}/{v083:.4f}, ap50 {v_ap:.4f}")
    assert ok


def test_criterion_5_sampling_fidelity():
    templates = {s: table_with_spans(s) for s in range(5)}
    sizes = {0: 52300, 1: 4300, 2: 14000, 3: 15600, 4: 19600}
    pool = []
    for s, size in sizes.items():
        pool.extend([templates[s]] * size)

    t0 = time.monotonic()
    out = stratified_sample(pool, TABLE1_DIST, 105600, random.Random(1005))
    counts = {b: 0 for b in BUCKETS}
    for t in out:
        counts[spanning_bucket(spanning_cell_count(t.grid))] += 1
    elapsed = time.monotonic() - t0

    targets = {"0": 52208, "1": 4267, "2": 13971, "3": 15587, "4+": 19567}
    within_1 = all(abs(counts[b] - targets[b]) <= 1 for b in BUCKETS)

    out10k = stratified_sample(pool, TABLE1_DIST, 10000, random.Random(1005))
    c10k = {b: 0 for b in BUCKETS}
    for t in out10k:
        c10k[spanning_bucket(spanning_cell_count(t.grid))] += 1
    pct_ok = all(abs(100.0 * c10k[b] / 10000 - 100.0 * TABLE1_DIST[b]) <= 0.01
                 for b in BUCKETS)
    ok = within_1 and pct_ok and elapsed < 5.0
    verdict(ok, f"criterion 5 sampling fidelity: n=105600 counts {counts} "
                f"(targets ±1), n=10000 pct ok={pct_ok}, {elapsed:.2f}s")
    assert ok


def test_criterion_6_perturbation_bound():
    profile = StyleProfile.build(
        base=CellStyle(font_size=9.0, line_spacing=3.0, padding_top=2.5,
                       padding_bottom=1.5, padding_left=4.0, padding_right=5.0,
                       h_indent=2.0, v_indent=1.0, h_align="indent-left",
                       intra_block_align="center"),
        row_overrides={0: {"padding_top": 6.0}},
        col_overrides={1: {"h_align": "right", "padding_left": 3.0}})
    rng = random.Random(1006)
    bound_violations = categorical_changes = 0
    for _ in range(10000):
        out = perturb_profile(profile, 0.1, rng)
        for name in NUMERIC_STYLE_FIELDS:
            v, v2 = getattr(profile.base, name), getattr(out.base, name)
            if abs(v2 - v) > 0.1 * v + 1e-9:
                bound_violations += 1
        for attr in ("outer_border", "inner_border"):
            if getattr(out, attr).mode != getattr(profile, attr).mode or \
                    getattr(out, attr).line_type != getattr(profile, attr).line_type:
                categorical_changes += 1
        if (out.base.h_align != profile.base.h_align
                or out.base.intra_block_align != profile.base.intra_block_align
                or out.base.text_color != profile.base.text_color
                or out.resolve_col(1).h_align != "right"):
            categorical_changes += 1
        (_, rpatch), = out.row_overrides
        if abs(dict(rpatch)["padding_top"] - 6.0) > 0.6 + 1e-9:
            bound_violations += 1
    ok = bound_violations == 0 and categorical_changes == 0
    verdict(ok, f"criterion 6 perturbation bound: {bound_violations} bound "
                f"violations, {categorical_changes} categorical changes "
                f"over 10000 draws")
    assert ok


def test_criterion_7_end_to_end_determinism(tmp_path):
    rng = random.Random(1007)
    tables = [random_source_table(rng) for _ in range(30)]
    src = write_sources(tmp_path, tables)
    snapshots = []
    for name, workers in (("w1", 1), ("w2", 2), ("w4", 4)):
        cfg = PipelineConfig(source_path=src, retain_fraction=0.5,
                             master_seed=1007, workers=workers,
                             out_dir=str(tmp_path / name))
        run_pipeline(cfg)
        out = tmp_path / name
        ann = (out / "annotations.jsonl").read_bytes()
        imgs = {p.name: p.read_bytes()
                for p in sorted((out / "images").iterdir())}
        snapshots.append((ann, imgs))
    ok = snapshots[0] == snapshots[1] == snapshots[2]
    verdict(ok, "criterion 7 end-to-end determinism: byte-identical output "
                "across worker counts 1/2/4")
    assert ok


def test_criterion_8_style_extraction_fidelity():
    rng = random.Random(1008)
    align_errors = border_errors = padding_errors = 0
    for _ in range(200):
        n_rows = rng.randint(3, 5)
        n_cols = rng.randint(2, 3)
        grid = make_grid(n_rows, n_cols,
                         [(r, c, 1, 1) for r in range(n_rows)
                          for c in range(n_cols)])
        aligns = [rng.choice(["left", "right", "center"])
                  for _ in range(n_cols)]
        pads = {k: float(rng.randint(1, 5))
                for k in ("padding_top", "padding_bottom",
                          "padding_left", "padding_right")}
        profile = StyleProfile.build(
            base=CellStyle(font_size=10, **pads),
            col_overrides={c: {"h_align": aligns[c]}
                           for c in range(n_cols)})
        # distinct block widths per column so alignment is identifiable
        content = []
        for r in range(n_rows):
            for c in range(n_cols):
                content.append(["x" * (2 + (r * (c + 2)) % 7 + r)])
        lay = solve_layout(grid, content, profile)
        texts = []
        for i, boxes in enumerate(lay.line_boxes):
            for txt, b in zip(content[i], boxes):
                texts.append(TextSpan(box=b, text=txt))
        extracted = extract_style_profile(texts, visible_rulings(lay, profile),
                                          grid, lay.boundaries)
        if (extracted.outer_border.mode != "full"
                or extracted.inner_border.mode != "full"):
            border_errors += 1
        for c in range(n_cols):
            got = extracted.resolve_col(c)
            if got.h_align != aligns[c]:
                align_errors += 1
            if abs(got.padding_left - pads["padding_left"]) > 1.0 or \
                    abs(got.padding_right - pads["padding_right"]) > 1.0:
                padding_errors += 1
        for r in range(n_rows):
            got = extracted.resolve_row(r)
            if abs(got.padding_top - pads["padding_top"]) > 1.0 or \
                    abs(got.padding_bottom - pads["padding_bottom"]) > 1.0:
                padding_errors += 1
    ok = align_errors == 0 and border_errors == 0 and padding_errors == 0
    verdict(ok, f"criterion 8 style-extraction fidelity: {align_errors} "
                f"alignment, {border_errors} border-mode, {padding_errors} "
                f"padding errors over 200 tables")
    assert ok
