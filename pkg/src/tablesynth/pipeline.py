"""End-to-end synthesis pipeline: ingest -> categorize -> retain-or-restyle
-> layout -> render -> annotate, with distribution-controlled sampling,
deterministic seeding and dataset statistics."""
from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import annotate, ingest, layout as layout_mod, render as render_mod
from .errors import (ConfigError, InsufficientPool, ParseFailure,
                     TableSynthError)
from .gen import default_bordered_profile, default_descriptors
from .model import (SourceTable, content_as_lists, spanning_bucket,
                    spanning_cell_count, table_from_json)
from .styling import (CategoryDescriptor, StyleProfile, descriptors_from_json,
                      match_category, perturb_profile, select_profile)

BUCKETS = ("0", "1", "2", "3", "4+")


def derive_rng(master_seed: int, index: int) -> random.Random:
    """Stable per-table stream: independent of worker scheduling and of
    Python's hash randomization."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass
class PipelineConfig:
    source_path: str
    source_format: str = "json"  # json | markup | lines
    descriptor_path: Optional[str] = None
    master_seed: int = 0
    retain_fraction: float = 0.5
    perturb_max_frac: float = 0.1
    fan_out: int = 1
    target_distribution: Optional[Dict[str, float]] = None
    sample_n: Optional[int] = None
    out_dir: str = "out"
    dataset_id: str = "synth"
    margin: int = 8
    max_image_dim: int = 4096
    fail_fast: bool = False
    workers: int = 1

    def validate(self) -> None:
        if not (0.0 <= self.retain_fraction <= 1.0):
            raise ConfigError("retainFraction must be in [0,1]")
        if self.perturb_max_frac < 0:
            raise ConfigError("perturbMaxFrac must be >= 0")
        if self.fan_out < 1:
            raise ConfigError("fanOut must be >= 1")
        if self.source_format not in ("json", "markup", "lines"):
            raise ConfigError(f"unknown source format {self.source_format!r}")
        if self.target_distribution is not None:
            total = sum(self.target_distribution.values())
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(
                    f"distribution weights sum to {total}, not 1")
            if self.sample_n is None:
                raise ConfigError("target distribution requires sampleN")

    @staticmethod
    def from_json(obj: dict) -> "PipelineConfig":
        cfg = PipelineConfig(
            source_path=obj["sourcePath"],
            source_format=obj.get("sourceFormat", "json"),
            descriptor_path=obj.get("descriptorPath"),
            master_seed=int(obj.get("masterSeed", 0)),
            retain_fraction=float(obj.get("retainFraction", 0.5)),
            perturb_max_frac=float(obj.get("perturbMaxFrac", 0.1)),
            fan_out=int(obj.get("fanOut", 1)),
            target_distribution=obj.get("targetDistribution"),
            sample_n=obj.get("sampleN"),
            out_dir=obj.get("outDir", "out"),
            dataset_id=obj.get("datasetId", "synth"),
            margin=int(obj.get("margin", 8)),
            max_image_dim=int(obj.get("maxImageDim", 4096)),
            fail_fast=bool(obj.get("failFast", False)),
            workers=int(obj.get("workers", 1)))
        cfg.validate()
        return cfg

    @staticmethod
    def from_file(path: str) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        if not isinstance(obj, dict) or "sourcePath" not in obj:
            raise ConfigError("config must be an object with sourcePath")
        return PipelineConfig.from_json(obj)


@dataclass
class DatasetStats:
    total: int
    bucket_counts: Dict[str, int]
    bucket_percentages: Dict[str, float]
    bordered: int
    borderless: int

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "buckets": {b: self.bucket_counts[b] for b in BUCKETS},
            "percentages": {b: self.bucket_percentages[b] for b in BUCKETS},
            "bordered": self.bordered,
            "borderless": self.borderless,
        }


def load_sources(path: str, fmt: str) -> List[SourceTable]:
    tables: List[SourceTable] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseFailure(f"{path}:{lineno}: {exc}")
            prov = str(obj.get("id", f"line{lineno}"))
            if fmt == "markup":
                tables.append(ingest.parse_markup_table(obj["markup"], prov))
            elif fmt == "lines":
                segs, texts = ingest.lines_texts_from_json(obj)
                tables.append(ingest.infer_grid_from_lines(segs, texts,
                                                           provenance=prov))
            else:
                tables.append(table_from_json(obj["table"], prov))
    return tables


def stratified_sample(pool: Sequence[SourceTable],
                      target: Dict[str, float], n: int,
                      rng: random.Random) -> List[SourceTable]:
    """Exact per-bucket counts via largest-remainder rounding; uniform
    without-replacement draw inside each bucket."""
    if n == 0:
        return []
    by_bucket: Dict[str, List[int]] = {b: [] for b in BUCKETS}
    for i, table in enumerate(pool):
        by_bucket[spanning_bucket(spanning_cell_count(table.grid))].append(i)

    buckets = [b for b in BUCKETS if b in target]
    raw = {b: n * target[b] for b in buckets}
    counts = {b: int(raw[b]) for b in buckets}
    short = n - sum(counts.values())
    for b in sorted(buckets, key=lambda b: (-(raw[b] - counts[b]), buckets.index(b)))[:short]:
        counts[b] += 1

    out_indices: List[int] = []
    for b in buckets:
        need = counts[b]
        have = by_bucket.get(b, [])
        if need > len(have):
            raise InsufficientPool(b, needed=need, available=len(have))
        out_indices.extend(rng.sample(have, need))
    return [pool[i] for i in out_indices]


# --- per-table job ---------------------------------------------------------

@dataclass
class _JobContext:
    config: PipelineConfig
    descriptors: List[CategoryDescriptor]


_CTX: Optional[_JobContext] = None


def _init_worker(config: PipelineConfig, descriptors: List[CategoryDescriptor]):
    global _CTX
    _CTX = _JobContext(config, descriptors)


def process_table(config: PipelineConfig,
                  descriptors: Sequence[CategoryDescriptor],
                  index: int, table: SourceTable
                  ) -> Tuple[int, str, bytes, str]:
    """Synthesize one output table; returns (index, json_line, png_bytes,
    image_name)."""
    rng = derive_rng(config.master_seed, index)
    retained = rng.random() < config.retain_fraction
    if retained:
        profile = table.extracted_style or default_bordered_profile()
        category = "retained"
    else:
        category = match_category(table.content, descriptors)
        profile = select_profile(category, descriptors, rng)
        profile = perturb_profile(profile, config.perturb_max_frac, rng)

    content = content_as_lists(table)
    result = layout_mod.solve_layout(table.grid, content, profile)
    canvas = render_mod.render_table(result, profile, content, table.grid.cells,
                                     margin=config.margin,
                                     max_dim=config.max_image_dim)
    image_name = f"{config.dataset_id}_{index:06}.png"
    meta = {
        "bordered": profile.bordered,
        "categoryId": category,
        "seed": config.master_seed,
        "index": index,
        "source": table.provenance,
        "retained": retained,
    }
    record = annotate.emit_annotation(result, table.grid, content, meta,
                                      image_name, margin=config.margin)
    return index, record.to_json_line(), canvas.png_bytes(), image_name


def _job(args) -> Tuple[int, Optional[str], Optional[bytes], Optional[str], Optional[str]]:
    index, table = args
    try:
        i, line, png, name = process_table(_CTX.config, _CTX.descriptors,
                                           index, table)
        return i, line, png, name, None
    except TableSynthError as exc:
        return index, None, None, None, f"{type(exc).__name__}: {exc}"


def run_pipeline(config: PipelineConfig) -> DatasetStats:
    config.validate()
    out_dir = Path(config.out_dir)
    images_dir = out_dir / "images"
    images_dir.mkdir(parents=True, exist_ok=True)

    tables = load_sources(config.source_path, config.source_format)
    if config.target_distribution is not None:
        tables = stratified_sample(tables, config.target_distribution,
                                   config.sample_n,
                                   derive_rng(config.master_seed, -1))

    if config.descriptor_path:
        with open(config.descriptor_path, encoding="utf-8") as fh:
            descriptors = descriptors_from_json(json.load(fh))
    else:
        descriptors = default_descriptors()

    jobs = []
    for i, table in enumerate(tables):
        for k in range(config.fan_out):
            jobs.append((i * config.fan_out + k, table))

    results: Dict[int, Tuple[Optional[str], Optional[bytes], Optional[str], Optional[str]]] = {}
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers,
                                 initializer=_init_worker,
                                 initargs=(config, descriptors)) as pool:
            for idx, line, png, name, err in pool.map(_job, jobs, chunksize=16):
                results[idx] = (line, png, name, err)
    else:
        _init_worker(config, descriptors)
        for args in jobs:
            idx, line, png, name, err = _job(args)
            results[idx] = (line, png, name, err)

    failures = []
    ann_path = out_dir / "annotations.jsonl"
    with open(ann_path, "w", encoding="utf-8") as fh:
        for idx in sorted(results):
            line, png, name, err = results[idx]
            if err is not None:
                failures.append({"index": idx, "stage": "synthesize",
                                 "error": err})
                continue
            fh.write(line + "\n")
            (images_dir / name).write_bytes(png)

    if failures:
        with open(out_dir / "failures.jsonl", "w", encoding="utf-8") as fh:
            for f in failures:
                fh.write(json.dumps(f, ensure_ascii=False) + "\n")

    stats = dataset_stats(str(ann_path))
    with open(out_dir / "stats.json", "w", encoding="utf-8") as fh:
        json.dump(stats.to_json(), fh, indent=2)
        fh.write("\n")

    if failures and config.fail_fast:
        raise TableSynthError(f"{len(failures)} table(s) failed (fail-fast)")
    return stats


def dataset_stats(annotations_path: str) -> DatasetStats:
    counts = {b: 0 for b in BUCKETS}
    bordered = borderless = total = 0
    with open(annotations_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                meta = obj["meta"]
                span_count = int(meta["spanningCellCount"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseFailure(f"{annotations_path}:{lineno}: {exc}")
            counts[spanning_bucket(span_count)] += 1
            total += 1
            if meta.get("bordered"):
                bordered += 1
            else:
                borderless += 1
    if total:
        pct = {b: 100.0 * counts[b] / total for b in BUCKETS}
    else:
        pct = {b: 0.0 for b in BUCKETS}
    return DatasetStats(total=total, bucket_counts=counts,
                        bucket_percentages=pct, bordered=bordered,
                        borderless=borderless)
