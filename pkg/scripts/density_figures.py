"""Histogram and stationary densities for the occupation game.

Writes one CSV per weight with columns ``x,histogram,stationary`` (densities,
not masses) plus ``moments.csv`` and ``variance.csv``.

    python scripts/density_figures.py --out data/density --steps 5000000 --K 200
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from qchaos.measure_lab import (
    W_C,
    W_GOLDEN,
    gaussian_approximation,
    mc_statistic,
    moment_table,
    simulate_histogram,
    stationary_density,
)

WEIGHTS = {"0.1": 0.1, "0.2": 0.2, "wc": W_C, "golden": W_GOLDEN, "0.5": 0.5, "0.7": 0.7}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("data/density"))
    ap.add_argument("--steps", type=int, default=5_000_000)
    ap.add_argument("--K", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for name, w in WEIGHTS.items():
        hist = simulate_histogram(w, args.steps, args.K, seed=args.seed)
        stat = stationary_density(w, args.K)
        with open(args.out / f"density_w{name}.csv", "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["x", "histogram", "stationary"])
            out.writerows(zip(hist.midpoints, hist.density, stat.density))
        print(f"w={name}: L1(histogram, stationary) = {hist.l1(stat):.4f}"
              f"{'' if stat.converged else ' (iteration not converged)'}")

    with open(args.out / "moments.csv", "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["w"] + [f"m{n}" for n in range(1, 9)])
        for w in np.linspace(0.05, 0.95, 19):
            out.writerow([w, *moment_table(w, 8).moments[1:]])

    # empirical variance against (w/2)^2 / (1 - (1-w)^2) along w = 1 - 2^(-1/(m+1))
    with open(args.out / "variance.csv", "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["m", "w", "predicted", "empirical", "stderr"])
        for m in range(1, 10):
            w = 1 - 2 ** (-1 / (m + 1))
            est = mc_statistic(w, args.steps, 10_000, lambda x: (x - 0.5) ** 2, seed=args.seed, stream=m)
            pred = gaussian_approximation(w)[1]
            out.writerow([m, w, pred, est.mean, est.stderr])
            print(f"m={m}: variance {est.mean:.6g} vs {pred:.6g} ({abs(est.mean - pred) / est.stderr:.1f} sigma)")
    print(f"wrote {args.out}/")


if __name__ == "__main__":
    main()
