"""Bohr-Sommerfeld log-error and its growth for power potentials."""
import argparse
from pathlib import Path

from grushin_lab import potential as pot
from grushin_lab import semiclassics as sc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=200)
    ap.add_argument("--degrees", default="0.5,1,1.5,2,3,4")
    ap.add_argument("--out", default="results/bs")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fams = {f"pow{d}": pot.power(float(d)) for d in args.degrees.split(",")}
    fams["two_power1_3"] = pot.two_power(1, 3)
    split = args.n_max // 2
    for name, V in fams.items():
        rows = sc.bs_sweep(V, range(1, args.n_max + 1), out / f"{name}.csv")
        print(f"{name:14s} growth {sc.log_bs_growth(rows, split):.4f}  last err {rows[-1]['err']:.6g}")


if __name__ == "__main__":
    main()
