#!/usr/bin/env python3
"""Audit every algorithm's failure frequency at one setting and print a table.

Each trial generates a fresh random instance, runs the algorithm, and checks
the returned hypothesis against the brute-force optimum:

    python scripts/audit_algorithms.py --trials 40 --epsilon 0.2
"""

import argparse
import json
import sys
import tempfile

from multidist import cli

ALGOS = ("fast", "finite", "cover_finite", "mid", "personalized")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--epsilon", type=float, default=0.2)
    parser.add_argument("--delta", type=float, default=0.2)
    parser.add_argument("--alpha", type=float, default=0.25)
    parser.add_argument("--n", type=int, default=8)
    parser.add_argument("--k", type=int, default=4)
    parser.add_argument("--class-size", type=int, default=24)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    print(f"{'algorithm':<14}{'fail rate':>10}{'wilson 95%':>18}"
          f"{'mean samples':>14}{'max samples':>13}")
    for algo in ALGOS:
        with tempfile.NamedTemporaryFile(suffix=".json", mode="r") as tmp:
            code = cli.main([
                "audit", "--algo", algo, "--family", "random",
                "--n", str(args.n), "--k", str(args.k),
                "--class-size", str(args.class_size),
                "--epsilon", str(args.epsilon), "--delta", str(args.delta),
                "--alpha", str(args.alpha), "--trials", str(args.trials),
                "--seed", str(args.seed), "--jobs", str(args.jobs),
                "--out", tmp.name,
            ])
            if code != 0:
                return code
            summary = json.load(open(tmp.name))
        print(f"{algo:<14}{summary['failure_rate']:>10.3f}"
              f"   [{summary['wilson_95_low']:.3f}, {summary['wilson_95_high']:.3f}]"
              f"{summary['mean_samples']:>14.0f}{summary['max_samples']:>13}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
