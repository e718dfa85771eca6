"""Monte-Carlo cross-checks of the order-statistic and block-mean bounds in the complexity module.

    python scripts/bound_checks.py [--n-mc 20000]
"""
import argparse

import numpy as np

from heavyerm.complexity import block_mean_check, order_statistic_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-mc", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=13)
    args = ap.parse_args()

    print("order statistics: E(sum_{i<=k} w*_i^2)^(1/2) / bound, max over k")
    for d in (4, 16, 64):
        cells = []
        for eta in (0.5, 1.0, 2.0):
            chk = order_statistic_check(d, eta, args.n_mc, args.seed)
            cells.append(f"eta={eta}: {chk.max_ratio:.3f}{'' if chk.holds else ' FAIL'}")
        print(f"  d={d:3d}  " + "  ".join(cells))

    print("block means: eta3 = 3, p = eta3 - 0.05, C3 fitted on the lower half of the t grid")
    grid = np.geomspace(0.5, 100, 24)
    for mu in (1, 4, 16, 64):
        chk = block_mean_check(mu, 3.0, 2.95, grid, 10 * args.n_mc, args.seed)
        upper = chk.empirical[12:] / chk.bound[12:]
        print(f"  mu={mu:3d}  C3={chk.constant:.3f}  max upper-half emp/bound {upper.max():.3f}  "
              f"{'holds' if chk.holds else 'FAIL'}")


if __name__ == "__main__":
    main()
