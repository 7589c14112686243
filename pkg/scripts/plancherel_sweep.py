"""Weighted Plancherel table for the Grushin operator with a bump multiplier."""
import argparse
import time
from pathlib import Path

from grushin_lab import grushin as gr
from grushin_lab import potential as pot


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=float, default=2.0, help="exponent of |x|^d")
    ap.add_argument("--n-cap", type=int, default=gr.DEFAULT_FIBER.n_cap)
    ap.add_argument("--out", default="results/plancherel")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fc = gr.FiberConfig(n_cap=args.n_cap)
    t0 = time.perf_counter()
    res = gr.plancherel_sweep(gr.bump(), pot.power(args.d), [0.0, 0.25], [0.5, 1.0, 2.0], [0.0, 1.0, 4.0],
                              out / "sweep.csv", fc)
    for row in res["rows"]:
        print(f"r={row['r']:<4g} x'={row['x_prime']:<4g} vartheta={row['vartheta']:<5g} ratio={row['ratio']:.6g}")
    for v, u in res["uniformity"].items():
        print(f"vartheta={v:g}: max/median {u:.4f}")
    print(f"{time.perf_counter() - t0:.0f} s")


if __name__ == "__main__":
    main()
