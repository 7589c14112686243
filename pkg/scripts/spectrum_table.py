"""Eigenvalues, residuals and zero counts for a few potential families."""
import argparse
from pathlib import Path

from grushin_lab import potential as pot
from grushin_lab import schrodinger as sch

FAMILIES = {
    "pow0.5": pot.power(0.5),
    "pow1": pot.power(1),
    "pow2": pot.power(2),
    "pow4": pot.power(4),
    "asym2_4": pot.power_asym(2, 4),
    "two_power1_3": pot.two_power(1, 3),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=50)
    ap.add_argument("--out", default="results/spectrum")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, V in FAMILIES.items():
        rows = sch.spectrum_csv(V, range(1, args.n_max + 1), out / f"{name}.csv")
        worst = max(r["residual"] for r in rows)
        print(f"{name:14s} E_1={rows[0]['E']:.10g}  E_{args.n_max}={rows[-1]['E']:.10g}  max residual {worst:.1e}")


if __name__ == "__main__":
    main()
