"""Random search for DPI equality at alpha = 2, z = 1 without Petz recovery.

Equality is known to force recovery only inside the sufficiency range, and
(2, 1) sits on its edge. This draws (psi, phi, channel) triples, keeps the
ones with the smallest gap, and prints their recovery residuals next to the
gap. A small gap paired with a large residual would be a candidate.

    python3 scripts/equality_hunt.py --trials 2000 --seed 0
"""
import argparse
import heapq

import numpy as np

from azrenyi.channels import apply, dpi_gap, recover
from azrenyi.divergence import AlphaZ, supports_dominated
from azrenyi.matcore import schatten_norm
from azrenyi.sampling import random_channel, random_state

PAR = AlphaZ(2.0, 1.0)


def residual(psi, phi, gamma):
    target, ref = (psi, phi) if supports_dominated(psi, phi) else (phi, psi)
    back = recover(gamma, ref, apply(gamma.dual, target))
    return schatten_norm(back - target, 1) / np.real(np.trace(target))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--keep", type=int, default=10)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    best = []
    for i in range(args.trials):
        d = args.dim
        psi = random_state(d, rng)
        phi = random_state(d, rng)
        gamma = random_channel(d, rng=rng)
        res = dpi_gap(psi, phi, gamma, PAR)
        item = (-res.gap, i, residual(psi, phi, gamma))
        if len(best) < args.keep:
            heapq.heappush(best, item)
        else:
            heapq.heappushpop(best, item)

    print(f"{'trial':>6} {'gap':>12} {'residual':>12} {'gap/res^2':>12}")
    for neg, i, r in sorted(best, reverse=True):
        print(f"{i:6d} {-neg:12.4e} {r:12.4e} {-neg / r**2:12.4e}")
    ratios = [-neg / r**2 for neg, _, r in best]
    print(f"smallest gap/residual^2 among kept: {min(ratios):.4e}")


if __name__ == "__main__":
    main()
