#!/usr/bin/env python3
"""End-to-end demo on synthetic data: generate planted embeddings, plan an
optimized mapping, compare it against the cyclic and random baselines, then
poison a synthetic dataset with the planned mapping.

Usage:
  python scripts/run_demo_pipeline.py --seed 0 --outdir results/demo
"""

import argparse
import json
from pathlib import Path

from a2x import cli
from a2x.dataio import read_embeddings, read_mapping, write_dataset
from a2x.features import Norm, distance_matrix, position_vectors
from a2x.mapping import cyclic_mapping, random_mapping, score_mapping
from a2x.synth import random_dataset


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--x", type=int, default=3)
    parser.add_argument("--rate", type=float, default=0.05)
    parser.add_argument("--outdir", type=str, default="results/demo")
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    emb = str(outdir / "embeddings.a2xe")
    planned = str(outdir / "planned.json")

    assert cli.main([
        "synth", "--k", str(args.k), "--x-planted", str(args.x), "--dim", "16",
        "--per-class", "50", "--spread", "1.0", "--separation", "20.0",
        "--seed", str(args.seed), "--out", emb,
    ]) == 0
    print(f"wrote {emb}")

    assert cli.main([
        "plan", "--embeddings", emb, "--x", str(args.x),
        "--seed", str(args.seed), "--out", planned,
    ]) == 0
    print(f"wrote {planned}")

    d = distance_matrix(position_vectors(read_embeddings(emb)), Norm.L2)
    rows = {
        "planned": score_mapping(read_mapping(planned), d),
        "cyclic": score_mapping(cyclic_mapping(args.k), d),
        "random": score_mapping(random_mapping(args.k, args.x, args.seed), d),
    }
    for name, score in rows.items():
        sil = "-" if score.silhouette_mean is None else f"{score.silhouette_mean:.4f}"
        print(
            f"{name:8s} objective={score.objective:.4f} silhouette_mean={sil} "
            f"self_targets={score.self_target_count}"
        )

    ds_path = str(outdir / "clean.a2xd")
    write_dataset(random_dataset(2000, 3, 32, 32, args.k, seed=args.seed), ds_path)
    trigger_path = outdir / "trigger.json"
    trigger_path.write_text(json.dumps({"variant": "replace_square", "side": 3}) + "\n")
    assert cli.main([
        "poison", "--dataset", ds_path, "--mapping", planned,
        "--trigger", str(trigger_path), "--rate", str(args.rate),
        "--seed", str(args.seed),
        "--out", str(outdir / "poisoned.a2xd"),
        "--manifest-out", str(outdir / "manifest.json"),
    ]) == 0
    print(f"poisoned dataset and manifest in {outdir}")


if __name__ == "__main__":
    main()
