"""Average entropy of the occupation game against w, with truncation brackets.

Columns: ``w, S_mc, S_stderr, A_K, B_K, approx`` for each K in ``--orders``;
the brackets apply to S/2.

    python scripts/entropy_figure.py --out data/entropy.csv
"""

import argparse
import csv

import numpy as np

from qchaos.measure_lab import approx_entropy, average_entropy_mc, entropy_truncation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/entropy.csv")
    ap.add_argument("--steps", type=int, default=1_000_000)
    ap.add_argument("--points", type=int, default=39)
    ap.add_argument("--orders", type=int, nargs="+", default=[2, 3, 5, 7])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    header = ["w", "S_mc", "S_stderr"]
    for K in args.orders:
        header += [f"A_{K}", f"B_{K}", f"approx_{K}"]
    with open(args.out, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for i, w in enumerate(np.linspace(0.025, 0.975, args.points)):
            est = average_entropy_mc(w, args.steps, seed=args.seed, stream=i)
            row = [w, est.mean, est.stderr]
            for K in args.orders:
                b = entropy_truncation(w, K)
                row += [b.A_K, b.B_K, approx_entropy(w, K)]
            out.writerow(row)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
