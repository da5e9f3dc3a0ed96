"""Corpus-level evaluation reports over annotation JSONL files."""
from __future__ import annotations

import json
from typing import Dict, List, Optional, Sequence, Tuple

from .annotate import AnnotationRecord, markup_from_record, record_from_json
from .errors import ParseFailure
from .ingest import parse_markup_table
from .metrics import Detection, DetectionSet, ap50_dataset, teds
from .model import Rect, has_merged_both, spanning_bucket, spanning_cell_count

BUCKETS = ("0", "1", "2", "3", "4+")


def load_records(path: str) -> List[AnnotationRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(record_from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ParseFailure(f"{path}:{lineno}: {exc}")
    return out


def _pair_records(gt: Sequence[AnnotationRecord],
                  pred: Sequence[AnnotationRecord]
                  ) -> List[Tuple[AnnotationRecord, AnnotationRecord]]:
    pred_by_file = {r.image_file: r for r in pred}
    pairs = []
    for g in gt:
        p = pred_by_file.get(g.image_file)
        if p is None:
            raise ParseFailure(f"no prediction for {g.image_file}")
        pairs.append((g, p))
    return pairs


def _grid_of(record: AnnotationRecord):
    return parse_markup_table(markup_from_record(record, with_content=False)).grid


def teds_report(gt_path: str, pred_path: str,
                struct_only: bool = False) -> dict:
    """Mean TEDS overall, per spanning-cell bucket, and for tables with a
    cell merged on both rows and columns."""
    pairs = _pair_records(load_records(gt_path), load_records(pred_path))
    scores: List[float] = []
    bucket_scores: Dict[str, List[float]] = {b: [] for b in BUCKETS}
    merged_both_scores: List[float] = []
    for g, p in pairs:
        score = teds(markup_from_record(g, True), markup_from_record(p, True),
                     struct_only=struct_only)
        scores.append(score)
        grid = _grid_of(g)
        bucket_scores[spanning_bucket(spanning_cell_count(grid))].append(score)
        if has_merged_both(grid):
            merged_both_scores.append(score)

    def mean(vals):
        return sum(vals) / len(vals) if vals else None

    return {
        "metric": "TEDS-Struct" if struct_only else "TEDS",
        "count": len(scores),
        "overall": mean(scores),
        "buckets": {b: mean(bucket_scores[b]) for b in BUCKETS},
        "mergedRowsAndColumns": mean(merged_both_scores),
    }


def _detection_set(gt: AnnotationRecord, pred: AnnotationRecord) -> DetectionSet:
    gt_boxes = [Rect(*b) for c in gt.cells for b in c["lines"]]
    preds = []
    for c in pred.cells:
        for b in c["lines"]:
            if isinstance(b, dict):
                preds.append(Detection(Rect(*b["bbox"]),
                                       float(b.get("score", 1.0))))
            else:
                preds.append(Detection(Rect(*b), 1.0))
    return DetectionSet(tuple(preds), tuple(gt_boxes))


def ap50_report(gt_path: str, pred_path: str) -> dict:
    """Corpus AP50 of text-line boxes, overall and per bucket."""
    pairs = _pair_records(load_records(gt_path), load_records(pred_path))
    sets = []
    bucket_sets: Dict[str, List[DetectionSet]] = {b: [] for b in BUCKETS}
    merged_both_sets: List[DetectionSet] = []
    for g, p in pairs:
        ds = _detection_set(g, p)
        sets.append(ds)
        grid = _grid_of(g)
        bucket_sets[spanning_bucket(spanning_cell_count(grid))].append(ds)
        if has_merged_both(grid):
            merged_both_sets.append(ds)
    return {
        "metric": "AP50",
        "count": len(sets),
        "overall": ap50_dataset(sets),
        "buckets": {b: (ap50_dataset(bucket_sets[b]) if bucket_sets[b] else None)
                    for b in BUCKETS},
        "mergedRowsAndColumns": (ap50_dataset(merged_both_sets)
                                 if merged_both_sets else None),
    }
