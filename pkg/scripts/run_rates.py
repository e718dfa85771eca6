"""Run the three rate-scaling fixtures and print per-n tables and fitted slopes.

    python scripts/run_rates.py [--out out/rates] [--threads 4]
"""
import argparse
from pathlib import Path

from heavyerm import io
from heavyerm.config import load_config
from heavyerm.erm import LossSpec
from heavyerm.experiments import run_huber_vs_squared, run_rates

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def show(tag, res):
    print(f"\n{tag}: slope {res.slope:.4f} (se {res.slope_stderr:.4f}), median slope {res.median_slope:.4f}, "
          f"theory {res.theoretical_exponent:.4f}, q95/median {res.q95_median_ratio:.3f}, "
          f"nonconverged {res.nonconverged}")
    print(f"{'n':>7} {'mean':>10} {'median':>10} {'q95':>10}")
    for r in res.per_n:
        print(f"{r.n:7d} {r.mean:10.5f} {r.median:10.5f} {r.q95:10.5f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/rates")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)

    for name in ("gaussian", "semipareto"):
        res = run_rates(load_config(FIXTURES / f"{name}.cfg"), args.threads)
        io.write_rates(out / name / "rates.csv", res.rows)
        io.write_summary(out / name / "summary.csv", res.per_n)
        show(name, res)

    cfg = load_config(FIXTURES / "huber_polytail.cfg")
    cmp = run_huber_vs_squared(cfg, cfg.with_loss(LossSpec()), args.threads)
    show("huber (PolyTail noise)", cmp.huber)
    show("squared (PolyTail noise)", cmp.squared)
    print("\nHuber/Squared q95 ratio by n: " + ", ".join(f"{n}:{q:.3f}" for n, q in zip(cmp.n, cmp.q95_ratio)))


if __name__ == "__main__":
    main()
