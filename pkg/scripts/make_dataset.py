"""Generate a small linear-regression dataset with planted outliers.

Writes a CSV readable by `python -m selfpaced fit --dataset ...` and prints
the planted outlier indices (row order, 0-based).  Deterministic per seed;
the bundled data/outliers_small.csv is this script's output for the
default arguments.
"""

import argparse
import sys
from pathlib import Path

from selfpaced.experiments import make_regression
from selfpaced.training import write_dataset_csv


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=40, help="number of samples")
    ap.add_argument("--d", type=int, default=3, help="number of features")
    ap.add_argument("--noise", type=float, default=0.1, help="noise scale")
    ap.add_argument(
        "--outlier-fraction", type=float, default=0.2, help="fraction of samples shifted"
    )
    ap.add_argument(
        "--outlier-scale", type=float, default=50.0, help="shift size in noise units"
    )
    ap.add_argument("--seed", type=int, default=7, help="generator seed")
    ap.add_argument(
        "--out", default="data/outliers_small.csv", help="output CSV path"
    )
    args = ap.parse_args(argv)

    dataset, w_true, outliers = make_regression(
        n=args.n,
        d=args.d,
        noise=args.noise,
        outlier_fraction=args.outlier_fraction,
        outlier_scale=args.outlier_scale,
        seed=args.seed,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(dataset, out)
    print(f"wrote {out} ({dataset.n} samples, {dataset.d} features)")
    print("true coefficients:", ", ".join(f"{x:.6f}" for x in w_true))
    print("outlier rows:", ", ".join(map(str, outliers.tolist())))
    return 0


if __name__ == "__main__":
    sys.exit(main())
