#!/usr/bin/env python3
"""Generate a demo source pool, category descriptors, and a pipeline
config ready for `tablesynth synth`.

Usage: python scripts/make_demo_sources.py [--n 200] [--seed 0] [--out demo]
"""
import argparse
import json
import random
from pathlib import Path

from tablesynth.gen import random_source_table, default_descriptors
from tablesynth.model import table_to_json
from tablesynth.styling import descriptors_to_json

TABLE1_DIST = {"0": 0.4944, "1": 0.0404, "2": 0.1323, "3": 0.1476,
               "4+": 0.1853}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="demo")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    src_path = out / "sources.jsonl"
    with open(src_path, "w", encoding="utf-8") as fh:
        for i in range(args.n):
            t = random_source_table(rng)
            fh.write(json.dumps({"id": f"demo{i:05}",
                                 "table": table_to_json(t)},
                                ensure_ascii=False) + "\n")

    desc_path = out / "descriptors.json"
    with open(desc_path, "w", encoding="utf-8") as fh:
        json.dump(descriptors_to_json(default_descriptors()), fh,
                  ensure_ascii=False, indent=2)

    cfg = {
        "sourcePath": str(src_path),
        "sourceFormat": "json",
        "descriptorPath": str(desc_path),
        "masterSeed": args.seed,
        "retainFraction": 0.5,
        "perturbMaxFrac": 0.1,
        "outDir": str(out / "dataset"),
        "datasetId": "demo",
    }
    cfg_path = out / "config.json"
    with open(cfg_path, "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, indent=2)
        fh.write("\n")

    print(f"wrote {args.n} sources to {src_path}")
    print(f"wrote descriptors to {desc_path}")
    print(f"wrote config to {cfg_path}")
    print(f"next: tablesynth synth --config {cfg_path}")


if __name__ == "__main__":
    main()
