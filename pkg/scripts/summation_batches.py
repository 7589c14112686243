"""Random instances of the discrete summation bound; sup per batch."""
import argparse

import numpy as np

from grushin_lab import verify as vf


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--theta", type=float, default=0.5)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--kappa", type=float, default=2.0)
    ap.add_argument("--batch", type=int, default=200)
    ap.add_argument("--seeds", default="11,12,13,14")
    args = ap.parse_args()
    for seed in map(int, args.seeds.split(",")):
        inst = vf.random_summation_instances(np.random.default_rng(seed), args.batch, args.theta, args.beta, args.kappa)
        sup = vf.summation_sup(inst, args.theta, args.beta, args.kappa)
        print(f"seed {seed}: sup {sup:.6f}")


if __name__ == "__main__":
    main()
