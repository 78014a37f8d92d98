"""Coherent-state trajectories for the bosonic regimes.

One CSV per panel (``n,gamma,re_chi,im_chi``) and a ``regimes.json`` summary.

    python scripts/boson_shapes.py --out data/boson --steps 100000
"""

import argparse
import csv
import json
from pathlib import Path

from qchaos.boson_game import Angle, BosonConfig, regime_report, roots_of_unity, run_boson

PANELS = {
    "perfect_2pi": ("2:pi", "1/3:pi", 0j),
    "mirror_pi": ("1:pi", "1/3:pi", 0j),
    "rotation_3pi5": ("3/5:pi", "1/3:pi", 0j),
    "rotation_2pi5": ("2/5:pi", "1/3:pi", 0j),
    "irrational_1": ("1.0", "1/3:pi", 0j),
    "orbit_7pi13": ("7/13:pi", "3:pi", 0.8 + 0.3j),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("data/boson"))
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--shifted", action="store_true", help="use roots of unity shifted by 2+2i")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    betas = roots_of_unity(3, shift=2 + 2j if args.shifted else 0j)

    summary = {}
    for name, (omega, lam, chi0) in PANELS.items():
        cfg = BosonConfig(Angle.parse(omega), Angle.parse(lam), betas, chi0=chi0, seed=args.seed)
        traj = run_boson(cfg, args.steps)
        with open(args.out / f"{name}.csv", "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["n", "gamma", "re_chi", "im_chi"])
            out.writerows((k, traj.gammas[k], z.real, z.imag) for k, z in enumerate(traj.values) if k > 0)
        summary[name] = {"Omega": omega, "Lambda": lam, **regime_report(cfg)}
        print(name, summary[name]["tag"])
    (args.out / "regimes.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
