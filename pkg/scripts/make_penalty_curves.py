#!/usr/bin/env python3
"""Regenerate the penalty-comparison curves (and optionally plot them).

Writes two CSVs under --outdir: per-|w| curves of six separable penalties /
effective penalties, and the vector penalty of unit-norm k-sparse weights in
dimension 32.  With --plot, renders both panels side by side (requires
matplotlib).
"""

import argparse
import sys
from pathlib import Path

from etatrick.cli import main as cli_main

PENALTY_ITEMS = ["l1", "logsum:eps=2,weight=2", "mcp:a=3,lambda=1",
                 "vardrop:lambda=1", "hardconcrete:lambda=1", "l0:weight=0.5"]
SPARSE_ITEMS = ["l1", "l0", "logsum:eps=2,weight=2", "mcp:a=3,lambda=1",
                "vardrop:lambda=1", "hardconcrete:lambda=1", "hardthresh:k=8",
                "magprune:k=8"]


def read_curve(path: Path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    cols = lines[0].split(",")
    rows = [[float(x) for x in l.split(",")] for l in lines[1:]]
    return cols, rows


def plot(outdir: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4))
    cols, rows = read_curve(outdir / "penalty_curve.csv")
    xs = [r[0] for r in rows]
    for i, name in enumerate(cols[1:], start=1):
        left.plot(xs, [r[i] for r in rows], label=name)
    left.set_xlabel("|w|")
    left.set_ylabel("penalty")
    left.legend(fontsize=7)

    cols, rows = read_curve(outdir / "sparse_curve.csv")
    ks = [r[0] for r in rows]
    for i, name in enumerate(cols[1:], start=1):
        ys = [r[i] if r[i] != float("inf") else None for r in rows]
        right.plot(ks, ys, marker=".", label=name)
    right.set_xlabel("k (nonzeros of unit-norm w)")
    right.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(outdir / "curves.png", dpi=150)
    print(f"wrote {outdir / 'curves.png'}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out", help="output directory")
    parser.add_argument("--plot", action="store_true", help="also render a PNG")
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rc = cli_main(["penalty-curve", *PENALTY_ITEMS,
                   "--out", str(outdir / "penalty_curve.csv")])
    rc |= cli_main(["sparse-curve", *SPARSE_ITEMS, "--dim", "32",
                    "--out", str(outdir / "sparse_curve.csv")])
    print(f"wrote {outdir / 'penalty_curve.csv'} and {outdir / 'sparse_curve.csv'}")
    if args.plot:
        plot(outdir)
    return rc


if __name__ == "__main__":
    sys.exit(main())
