"""Dump a 2-D lattice of latent values with and without a curriculum region.

Evaluates the separable latent F and the constrained latent Fnew over an
evenly spaced grid of loss pairs and writes lattice.csv + summary.json via
the package CLI.  The default reproduces the exponential pairwise-order
lattice (constraint v1 >= v2).
"""

import argparse
import sys

from selfpaced.cli import main as cli_main


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--regularizer", default="exp", help="catalog regularizer name")
    ap.add_argument("--lambda", dest="lam", type=float, default=1.0, help="age value")
    ap.add_argument("--k", default="1,-1", help="halfspace normal, comma-separated")
    ap.add_argument("--b", type=float, default=0.0, help="halfspace offset")
    ap.add_argument("--grid", type=int, default=21, help="lattice points per axis")
    ap.add_argument("--span", type=float, default=4.0, help="losses range over [0, span]")
    ap.add_argument("--out", default="runs/lattice", help="output directory")
    args = ap.parse_args(argv)

    return cli_main(
        [
            "curriculum",
            "--regularizer",
            args.regularizer,
            "--lambda",
            str(args.lam),
            "--k",
            args.k,
            "--b",
            str(args.b),
            "--grid",
            str(args.grid),
            "--span",
            str(args.span),
            "--out",
            args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
