"""Empirical sup-of-partial-sums tails against the polynomial bound for every conc fixture.

    python scripts/tail_check.py [--n-mc 2000]
"""
import argparse
from pathlib import Path

import numpy as np

from heavyerm.cli import _bound_params, _interaction
from heavyerm.concentration import fit_tail_slope, tail_verify
from heavyerm.config import load_config

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-mc", type=int, default=None, help="override conc.n_mc")
    args = ap.parse_args()
    for name in ("pareto_iid", "semipareto_conc", "gaussian_conc"):
        cfg = load_config(FIXTURES / f"{name}.cfg")
        c = cfg.conc
        grid = np.geomspace(c.t_min, c.t_max, c.t_points)
        rep = tail_verify(_interaction(cfg), c.n, grid, args.n_mc or c.n_mc, _bound_params(cfg), cfg.master_seed)
        bad = rep.violations()
        pos = rep.empirical > 0
        slope = fit_tail_slope(grid[pos][-6:], rep.empirical[pos][-6:]) if pos.sum() >= 2 else float("nan")
        print(f"{name:16s} dominated {grid.size - bad.size:2d}/{grid.size}  "
              f"max emp/bound {np.max(rep.empirical / rep.bound):.2e}  far-tail slope {slope:6.2f}  "
              f"mean W {rep.w_mean:+.2e} (se {rep.w_mean_se:.1e})")


if __name__ == "__main__":
    main()
