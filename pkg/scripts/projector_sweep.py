"""Spectral-window projector sums and eigenvalue-gap checks."""
import argparse
from pathlib import Path

import numpy as np

from grushin_lab import potential as pot
from grushin_lab import verify as vf
from grushin_lab.errors import EmptyWindow
from grushin_lab.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=float, default=2.0, help="exponent of |x|^d")
    ap.add_argument("--out", default="results/projector")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    V = pot.power(args.d)
    lams, As = np.logspace(1, 4, 7), [0.25, 1.0, 4.0]
    rep = vf.projector_report(V, lams, As)
    write_csv(out / "projector.csv", ["lambda", "A", "x", "sum", "ratio", "window"], rep["cells"])
    rows = []
    for lam in lams:
        for A in As:
            try:
                g = vf.gap_log_check(V, lam, A)
            except EmptyWindow:
                continue
            rows += [{"lambda": lam, "A": A, "n": n, "gap": gp, "ratio": r} for n, gp, r in zip(g.window, g.gaps, g.ratios)]
    write_csv(out / "gaps.csv", ["lambda", "A", "n", "gap", "ratio"], rows)
    for lam, best in zip(lams, rep["per_lambda"]):
        print(f"lambda={lam:10.4g}  max ratio {best:.5g}")
    print(f"trend {rep['trend']:.4f}, max gap {max(r['gap'] for r in rows):.6g}")


if __name__ == "__main__":
    main()
