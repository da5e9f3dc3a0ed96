"""Command-line interface.

Exit codes: 0 success, 1 failure-manifest entries with --fail-fast,
2 configuration error.
"""
from __future__ import annotations

import json
import sys

import click

from . import pipeline as pipeline_mod
from . import report as report_mod
from .errors import ConfigError, TableSynthError
from .ingest import infer_grid_from_lines, lines_texts_from_json
from .model import table_to_json


@click.group()
def main():
    """Table annotation data synthesis and evaluation."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Overrides masterSeed.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--fail-fast", is_flag=True, default=False)
def synth(config_path, seed, out_dir, workers, fail_fast):
    """Run the synthesis pipeline from a JSON config."""
    try:
        cfg = pipeline_mod.PipelineConfig.from_file(config_path)
        if seed is not None:
            cfg.master_seed = seed
        if out_dir is not None:
            cfg.out_dir = out_dir
        if workers is not None:
            cfg.workers = workers
        if fail_fast:
            cfg.fail_fast = True
        cfg.validate()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    try:
        stats = pipeline_mod.run_pipeline(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except TableSynthError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(stats.to_json(), indent=2))


@main.command()
@click.option("--pool", "pool_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--dist", "dist_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("-n", "n", required=True, type=int)
@click.option("--seed", type=int, default=0)
@click.option("--format", "fmt", default="json",
              type=click.Choice(["json", "markup", "lines"]))
def sample(pool_path, dist_path, n, seed, fmt):
    """Stratified sample from a source pool; prints sampled tables as
    canonical JSONL."""
    with open(dist_path, encoding="utf-8") as fh:
        target = json.load(fh)
    try:
        pool = pipeline_mod.load_sources(pool_path, fmt)
        chosen = pipeline_mod.stratified_sample(
            pool, target, n, pipeline_mod.derive_rng(seed, -1))
    except TableSynthError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for table in chosen:
        obj = {"id": table.provenance, "table": table_to_json(table)}
        click.echo(json.dumps(obj, ensure_ascii=False))


@main.group(name="eval")
def eval_group():
    """Evaluate predictions against ground truth."""


@eval_group.command(name="teds")
@click.option("--gt", "gt_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", "pred_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--struct-only", is_flag=True, default=False)
def eval_teds(gt_path, pred_path, struct_only):
    try:
        rep = report_mod.teds_report(gt_path, pred_path, struct_only)
    except TableSynthError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(rep, indent=2))


@eval_group.command(name="ap50")
@click.option("--gt", "gt_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", "pred_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
def eval_ap50(gt_path, pred_path):
    try:
        rep = report_mod.ap50_report(gt_path, pred_path)
    except TableSynthError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(rep, indent=2))


@main.command()
@click.argument("annotations", type=click.Path(exists=True, dir_okay=False))
def stats(annotations):
    """Distribution statistics of an annotation JSONL file."""
    try:
        s = pipeline_mod.dataset_stats(annotations)
    except TableSynthError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(s.to_json(), indent=2))


@main.command(name="infer-grid")
@click.option("--lines", "lines_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", type=float, default=2.0)
def infer_grid(lines_path, tol):
    """Deduce table structure from ruling lines + text spans JSON."""
    with open(lines_path, encoding="utf-8") as fh:
        obj = json.load(fh)
    segs, texts = lines_texts_from_json(obj)
    try:
        table = infer_grid_from_lines(segs, texts, tol=tol)
    except TableSynthError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(table_to_json(table), ensure_ascii=False, indent=2))


if __name__ == "__main__":
    main()
