"""Command-line entry point: ``heavyerm <subcommand> --config FILE [--seed S] [--out DIR]``.

Exit status: 0 on success, 1 on bad input or configuration, 2 when ``--check``
finds a violated acceptance condition.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from heavyerm import io
from heavyerm.complexity import (
    default_zetas,
    gaussian_width_estimate,
    omega_mu_estimate,
    omega_q_estimate,
    small_ball_estimate,
)
from heavyerm.concentration import InteractionSpec, tail_verify
from heavyerm.config import ConfigError, load_config
from heavyerm.dgp import generate
from heavyerm.erm import LossKind, LossSpec, erm_fit
from heavyerm.experiments import run_huber_vs_squared, run_rates, theoretical_exponent
from heavyerm.risk import l2_error, stationary_cov

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cmd_gen(args) -> int:
    cfg = _config(args)
    n = args.n or cfg.n_grid[-1]
    sample = generate(cfg.dgp, n, cfg.master_seed)
    path = _out(args) / "sample.csv"
    io.write_sample(path, sample)
    print(f"wrote {path} (n={n}, seed={cfg.master_seed})")
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _config(args)
    if args.data:
        sample = io.read_sample(args.data, cfg.dgp, cfg.master_seed)
    else:
        sample = generate(cfg.dgp, args.n or cfg.n_grid[-1], cfg.master_seed)
    fit = erm_fit(sample, cfg.loss, cfg.dgp.R, cfg.solver)
    path = _out(args) / "fit.csv"
    io.write_fit(path, sample.seed, sample.n, cfg.loss.kind.value, cfg.dgp.R, fit)
    err = l2_error(fit.theta_hat, cfg.dgp.theta, stationary_cov(cfg.dgp))
    print(f"objective={fit.objective!r} iterations={fit.iterations} l2_error={err!r}")
    return EXIT_OK


def _report_rates(res, label=""):
    tag = f"[{label}] " if label else ""
    print(f"{tag}slope={res.slope:.4f} (se {res.slope_stderr:.4f}) median_slope={res.median_slope:.4f} "
          f"theory={res.theoretical_exponent:.4f} q95/median={res.q95_median_ratio:.4f} "
          f"nonconverged={res.nonconverged}")


def cmd_rates(args) -> int:
    cfg = _config(args)
    res = run_rates(cfg, args.threads)
    out = _out(args)
    io.write_rates(out / "rates.csv", res.rows)
    io.write_summary(out / "summary.csv", res.per_n)
    _report_rates(res)
    if args.check and not res.slope <= res.theoretical_exponent + args.slack:
        print(f"check failed: slope {res.slope:.4f} > theory {res.theoretical_exponent:.4f} + {args.slack}",
              file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    huber = cfg.loss if cfg.loss.kind is LossKind.HUBER else LossSpec.huber_for_noise(cfg.dgp.noise.scale)
    cmp = run_huber_vs_squared(cfg.with_loss(huber), cfg.with_loss(LossSpec()), args.threads)
    out = _out(args)
    for tag, res in (("huber", cmp.huber), ("squared", cmp.squared)):
        io.write_rates(out / f"rates_{tag}.csv", res.rows)
        io.write_summary(out / f"summary_{tag}.csv", res.per_n)
        _report_rates(res, tag)
    io.write_rows(out / "compare.csv", ["n", "median_ratio", "q95_ratio"],
                  ([n, float(m), float(q)] for n, m, q in zip(cmp.n, cmp.median_ratio, cmp.q95_ratio)))
    print(f"largest n: Huber/Squared median {cmp.median_ratio[-1]:.4f}, q95 {cmp.q95_ratio[-1]:.4f}")
    if args.check and not cmp.q95_ratio[-1] < 1.0:
        print("check failed: Huber q95 error not below Squared at the largest n", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _interaction(cfg) -> InteractionSpec:
    c = cfg.conc
    if c.interaction == "iid_pareto":
        return InteractionSpec("iid_pareto", eta2=c.eta2)
    if c.theta is None:
        raise ConfigError("conc.interaction = dgp needs conc.theta", key="conc.theta")
    return InteractionSpec("dgp", eta2=c.eta2, dgp=cfg.dgp, theta=c.theta, loss=cfg.loss)


def _bound_params(cfg) -> dict:
    c = cfg.conc
    if c.bound == "rio":
        return {"bound": "rio", "eta": c.eta1, "v": c.v}
    p = {"bound": "heavy_tail", "eta1": c.eta1, "eta2": c.eta2, "c_prime": c.c_prime}
    if c.d1 is not None:
        p["d1"] = c.d1
    if c.d2 is not None:
        p["d2"] = c.d2
    return p


def cmd_conc(args) -> int:
    cfg = _config(args)
    c = cfg.conc
    grid = np.geomspace(c.t_min, c.t_max, c.t_points)
    rep = tail_verify(_interaction(cfg), c.n, grid, c.n_mc, _bound_params(cfg), cfg.master_seed)
    out = _out(args)
    io.write_tail_report(out / "conc.csv", rep)
    bad = rep.violations()
    print(f"{len(grid) - bad.size}/{len(grid)} grid points dominated; mean W = {rep.w_mean:.3e} (se {rep.w_mean_se:.1e})")
    if args.check and bad.size:
        print("check failed at t = " + ", ".join(f"{grid[i]:.4g}" for i in bad), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_complexity(args) -> int:
    cfg = _config(args)
    c = cfg.complexity
    seed = cfg.master_seed
    spec = cfg.dgp
    sb = small_ball_estimate(spec, c.u, c.n_dir, c.n_mc * 10, seed)
    zeta1, zeta2 = default_zetas(cfg.tau, sb.value)
    records = [
        ("small_ball", {"u": c.u, "n_dir": c.n_dir}, sb.value, sb.std_error, sb.n_mc, seed),
    ]
    om = omega_mu_estimate(spec, c.mu, c.gamma, c.n_mc, seed + 1)
    records.append(("omega_mu", {"mu": c.mu, "gamma": c.gamma}, om.value, om.std_error, om.n_mc, seed + 1))
    gw = gaussian_width_estimate(spec, c.r, c.n_mc, seed + 2)
    records.append(("gaussian_width", {"r": c.r}, gw.value, gw.std_error, gw.n_mc, seed + 2))
    oq = omega_q_estimate(spec, c.n, zeta1, zeta2, cfg.eta1, c.n_mc, seed + 3)
    records.append(("omega_q", {"n": c.n, "zeta1": zeta1, "zeta2": zeta2, "eta1": cfg.eta1},
                    oq.value, oq.std_error, oq.n_mc, seed + 3))
    io.write_estimates(_out(args) / "estimates.csv", records)
    for m, p, v, s, *_ in records:
        print(f"{m:15s} {v:.6g} (se {s:.2g})")
    return EXIT_OK


def cmd_plot(args) -> int:
    from heavyerm.plotting import plot_summary, plot_tail

    src = Path(args.input or args.out)
    out = _out(args)
    made = []
    theory = None
    if args.config:
        theory = theoretical_exponent(_config(args))
    for summary in sorted(src.glob("summary*.csv")):
        made.append(plot_summary(summary, out / (summary.stem + ".svg"), theory))
    conc = src / "conc.csv"
    if conc.exists():
        made.append(plot_tail(conc, out / "conc.svg"))
    if not made:
        raise ConfigError(f"no summary*.csv or conc.csv found in {src}")
    for p in made:
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="heavyerm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_, config_required=True):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=config_required, help="key=value config file")
        p.add_argument("--seed", type=_u64, default=None, help="override experiment.master_seed")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--threads", type=int, default=1, help="worker processes for replications")
        p.add_argument("--check", action="store_true", help="exit 2 if the acceptance condition fails")
        p.set_defaults(fn=fn)
        return p

    add("gen", cmd_gen, "write one sample to sample.csv").add_argument("--n", type=int)
    p = add("fit", cmd_fit, "one ERM fit, written to fit.csv")
    p.add_argument("--data", help="sample CSV from `gen` (default: generate in-process)")
    p.add_argument("--n", type=int)
    add("rates", cmd_rates, "rate-scaling study: rates.csv and summary.csv").add_argument(
        "--slack", type=float, default=0.1, help="--check passes when slope <= theory + slack")
    add("compare", cmd_compare, "Huber vs squared on identical samples")
    add("conc-check", cmd_conc, "empirical tail vs concentration bound: conc.csv")
    add("complexity", cmd_complexity, "complexity estimates: estimates.csv")
    add("plot", cmd_plot, "SVG plots of summary*.csv / conc.csv", config_required=False).add_argument(
        "--input", help="directory holding the CSVs (default: --out)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.fn(args)
    except (ConfigError, ValueError, io.SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
