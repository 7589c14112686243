"""Pointwise eigenfunction bounds over the class/alpha table."""
import argparse
import json
from pathlib import Path

from grushin_lab import potential as pot
from grushin_lab import verify as vf

CASES = [
    ("pow1", pot.power(1), 0.5),
    ("pow2", pot.power(2), 0.5),
    ("two_power1_3", pot.two_power(1, 3), 0.5),
    ("logpert2", pot.power_logperturbed(2, 0.1), 0.3),
    ("pow1.5", pot.power(1.5), 0.25),
    ("pow4", pot.power(4), 0.25),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=100)
    ap.add_argument("--out", default="results/bounds")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reps, summary = [], {}
    for name, V, alpha in CASES:
        for which in ("psi", "dpsi") if alpha == 0.5 else ("psi",):
            rep = vf.pointwise_report(V, range(1, args.n_max + 1), alpha, which)
            rep.params["case"] = name
            reps.append(rep)
            summary[f"{name}/{which}/{alpha}"] = {"C": rep.uniform_constant, "trend": rep.trend, "class": rep.cls}
            print(f"{name:14s} {which:4s} alpha={alpha:<5g} C={rep.uniform_constant:.4g} trend={rep.trend:.4f}")
    vf.write_long_csv(out / "pointwise.csv", reps)
    (out / "summary.json").write_text(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
