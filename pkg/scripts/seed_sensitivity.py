"""How often the heavy-tailed run has a larger q95/median error ratio than the light-tailed run.

Repeats the two rate fixtures over a range of master seeds and reports the
fraction of seeds on which the ordering holds, for both the mean-over-n ratio
and the ratio of errors pooled across n after scaling by the fitted rate.

    python scripts/seed_sensitivity.py [--seeds 16] [--threads 1]
"""
import argparse
from pathlib import Path

import numpy as np

from heavyerm.config import load_config
from heavyerm.experiments import run_rates

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def pooled_ratio(res):
    # errors rescaled by the fitted power law so all n share one distribution
    e = np.array([r.error * r.n ** (-res.slope) for r in res.rows])
    return float(np.quantile(e, 0.95) / np.median(e))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=16)
    ap.add_argument("--first", type=int, default=42)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    light = load_config(FIXTURES / "gaussian.cfg")
    heavy = load_config(FIXTURES / "semipareto.cfg")
    wins_mean = wins_pooled = 0
    for seed in range(args.first, args.first + args.seeds):
        a = run_rates(light.with_seed(seed), args.threads)
        b = run_rates(heavy.with_seed(seed), args.threads)
        wm = b.q95_median_ratio > a.q95_median_ratio
        wp = pooled_ratio(b) > pooled_ratio(a)
        wins_mean += wm
        wins_pooled += wp
        print(f"seed {seed}: light {a.q95_median_ratio:.3f}  heavy {b.q95_median_ratio:.3f}  "
              f"{'yes' if wm else 'no '}   pooled {pooled_ratio(a):.3f} vs {pooled_ratio(b):.3f} "
              f"{'yes' if wp else 'no'}")
    print(f"heavy > light: {wins_mean}/{args.seeds} (mean over n), {wins_pooled}/{args.seeds} (pooled)")


if __name__ == "__main__":
    main()
