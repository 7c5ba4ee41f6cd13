#!/usr/bin/env python3
"""Sweep epsilon for each algorithm on a generated suite and write CSVs.

Produces one CSV per algorithm under the output directory, sharing the same
instance grid, so budget-vs-accuracy curves are directly comparable:

    python scripts/sweep_epsilon.py --out results/ --seeds 0,1,2,3
"""

import argparse
import pathlib
import sys

from multidist import cli

ALGOS = ("fast", "finite", "cover_finite", "mid", "personalized")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--grid-epsilon", default="0.1,0.15,0.2,0.3")
    parser.add_argument("--seeds", default="0,1,2,3,4")
    parser.add_argument("--n", type=int, default=8)
    parser.add_argument("--k", type=int, default=4)
    parser.add_argument("--class-size", type=int, default=24)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for algo in ALGOS:
        target = outdir / f"sweep_{algo}.csv"
        code = cli.main([
            "sweep", "--algo", algo, "--family", "random",
            "--n", str(args.n), "--k", str(args.k),
            "--class-size", str(args.class_size),
            "--grid-epsilon", args.grid_epsilon, "--seeds", args.seeds,
            "--jobs", str(args.jobs), "--out", str(target),
        ])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
