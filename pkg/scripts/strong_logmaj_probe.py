"""Probe the strong log-majorization inequality on random commuting pairs.

Prints the largest ratio lhs/rhs seen per dimension; a ratio above 1 beyond
roundoff would be a counterexample.

    python3 scripts/strong_logmaj_probe.py --trials 500
"""
import argparse

import numpy as np

from azrenyi.analysis import strong_logmaj_check
from azrenyi.sampling import commuting_pair


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--dims", default="2,3,4,5")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    for d in (int(x) for x in args.dims.split(",")):
        worst, where, fails = 0.0, None, 0
        for _ in range(args.trials):
            a1, a2, _, _ = commuting_pair(d, rng)
            b1, b2, _, _ = commuting_pair(d, rng)
            theta = rng.uniform(0.05, 0.95)
            for k in range(1, d + 1):
                r = strong_logmaj_check(a1, a2, b1, b2, theta, k)
                ratio = r.lhs / r.rhs
                fails += not r.passed
                if ratio > worst:
                    worst, where = ratio, (round(theta, 3), k)
        print(f"d={d}: max lhs/rhs = {worst:.12f} at (theta, k) = {where}, failures = {fails}")


if __name__ == "__main__":
    main()
