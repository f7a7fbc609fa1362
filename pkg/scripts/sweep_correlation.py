#!/usr/bin/env python3
"""Correlate mapping quality with externally measured attack success rates.

Generates (or reuses) a sweep CSV of random mappings scored by objective
and mean silhouette, then joins a user-supplied CSV carrying an ``asr``
column (one row per sweep row, matched on ``index``) and prints the
Pearson correlation of ASR against both quality measures.

Usage:
  python scripts/sweep_correlation.py --embeddings E.a2xe --x 2 --n 200 \
      --seed 0 --sweep-out sweep.csv [--asr measured.csv]
"""

import argparse
import csv

from a2x import cli
from a2x.mapping import pearson


def read_column(path: str, column: str) -> dict[int, float]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        return {int(row["index"]): float(row[column]) for row in reader}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--embeddings", required=True)
    parser.add_argument("--x", type=int, required=True)
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--norm", choices=["l1", "l2", "linf"], default="l2")
    parser.add_argument("--sweep-out", default="sweep.csv")
    parser.add_argument("--asr", help="CSV with 'index' and 'asr' columns to join")
    args = parser.parse_args()

    code = cli.main([
        "sweep", "--x", str(args.x), "--n", str(args.n), "--seed", str(args.seed),
        "--embeddings", args.embeddings, "--norm", args.norm, "--out", args.sweep_out,
    ])
    if code != 0:
        raise SystemExit(code)
    print(f"wrote {args.sweep_out}")

    if not args.asr:
        print("no --asr file given; join one later and rerun to get correlations")
        return
    asr = read_column(args.asr, "asr")
    objectives = read_column(args.sweep_out, "objective")
    silhouettes = read_column(args.sweep_out, "silhouette_mean")
    indices = sorted(set(asr) & set(objectives))
    if len(indices) < 2:
        raise SystemExit("need at least two joined rows")
    ys = [asr[i] for i in indices]
    print(f"rows_joined={len(indices)}")
    print(f"pearson_objective_asr={pearson([objectives[i] for i in indices], ys)}")
    print(f"pearson_silhouette_asr={pearson([silhouettes[i] for i in indices], ys)}")


if __name__ == "__main__":
    main()
