"""Rate-scaling studies: replicated ERM fits over an n grid and log-log slopes."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from heavyerm.config import ExperimentConfig
from heavyerm.dgp import DgpKind, NoiseKind, generate
from heavyerm.erm import LossKind, NonConvergenceWarning, erm_fit
from heavyerm.risk import l2_error, stationary_cov
from heavyerm.rng import derive_seed


class DegenerateInput(ValueError):
    pass


@dataclass(frozen=True)
class RateRow:
    n: int
    rep: int
    seed: int
    error: float
    objective: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SummaryRow:
    n: int
    mean: float
    median: float
    q95: float
    stderr: float


@dataclass(frozen=True, eq=False)
class RateResult:
    rows: tuple[RateRow, ...]
    per_n: tuple[SummaryRow, ...]
    slope: float
    slope_stderr: float
    median_slope: float
    q95_slope: float
    theoretical_exponent: float
    nonconverged: int

    @property
    def q95_median_ratio(self) -> float:
        """Mean over the grid of ``q95 / median``; large values flag heavy error tails."""
        return float(np.mean([r.q95 / r.median for r in self.per_n]))


def fit_loglog_slope(pairs) -> tuple[float, float]:
    """OLS slope of ``log error`` on ``log n`` and its standard error."""
    pairs = [(float(n), float(e)) for n, e in pairs]
    ns = np.array([p[0] for p in pairs])
    es = np.array([p[1] for p in pairs])
    if len(pairs) < 3 or np.unique(ns).size < 3:
        raise DegenerateInput("need at least three distinct n values")
    if np.any(es <= 0) or np.any(ns <= 0):
        raise DegenerateInput("all n and errors must be positive")
    lx = np.log(ns)
    ly = np.log(es)
    xc = lx - lx.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (ly - ly.mean())) / sxx
    resid = ly - ly.mean() - slope * xc
    dof = len(pairs) - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    return slope, math.sqrt(s2 / sxx)


def _heavy_tailed(cfg: ExperimentConfig) -> bool:
    return cfg.dgp.kind is DgpKind.SEMI_PARETO_AR or cfg.dgp.noise.kind is NoiseKind.POLY_TAIL


def theoretical_exponent(cfg: ExperimentConfig) -> float:
    """Exponent of ``n`` in the matching rate statement.

    Squared loss: ``-1/2 + iota`` with light tails and norm equivalence,
    ``-1/4 + iota`` without it, ``-(1 - 1/eta2)/4 + iota`` with polynomial tails.
    Huber loss bounds the multiplier by the threshold, so noise tails drop
    out: ``-1/2 + iota`` unless the inputs themselves are polynomial-tailed.
    """
    heavy_inputs = cfg.dgp.kind is DgpKind.SEMI_PARETO_AR
    poly = -(1.0 - 1.0 / cfg.eta2) / 4.0 + cfg.iota
    if cfg.loss.kind is LossKind.HUBER:
        return poly if heavy_inputs else -0.5 + cfg.iota
    if _heavy_tailed(cfg):
        return poly
    return (-0.5 if cfg.norm_equivalence else -0.25) + cfg.iota


def mu_for_n(n: int, r_exponent: float, q_hat: float, c: float, eta1: float) -> int:
    """Block count ``floor(n^r * Q * c^(1/eta1) / 4)``, at least 1."""
    return max(1, int(math.floor(n**r_exponent * q_hat * c ** (1.0 / eta1) / 4.0)))


def _one_fit(cfg: ExperimentConfig, n: int, rep: int) -> RateRow:
    seed = derive_seed(cfg.master_seed, n, rep)
    sample = generate(cfg.dgp, n, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        fit = erm_fit(sample, cfg.loss, cfg.dgp.R, cfg.solver)
    err = l2_error(fit.theta_hat, cfg.dgp.theta, stationary_cov(cfg.dgp))
    return RateRow(n, rep, seed, err, fit.objective, fit.iterations, fit.converged)


def _job(args):
    return _one_fit(*args)


def collect_rows(cfg: ExperimentConfig, threads: int = 1) -> list[RateRow]:
    jobs = [(cfg, n, k) for n in cfg.n_grid for k in range(cfg.replications)]
    if threads <= 1:
        rows = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            rows = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    rows.sort(key=lambda r: (r.n, r.rep))
    return rows


def summarise(rows) -> list[SummaryRow]:
    out = []
    for n in sorted({r.n for r in rows}):
        e = np.array([r.error for r in rows if r.n == n])
        se = float(np.std(e, ddof=1) / math.sqrt(e.size)) if e.size > 1 else 0.0
        out.append(SummaryRow(n, float(np.mean(e)), float(np.median(e)), float(np.quantile(e, 0.95)), se))
    return out


def rate_result(cfg: ExperimentConfig, rows) -> RateResult:
    per_n = summarise(rows)
    slope, se = fit_loglog_slope([(r.n, r.mean) for r in per_n])
    med_slope, _ = fit_loglog_slope([(r.n, r.median) for r in per_n])
    q_slope, _ = fit_loglog_slope([(r.n, r.q95) for r in per_n])
    bad = sum(not r.converged for r in rows)
    return RateResult(tuple(rows), tuple(per_n), slope, se, med_slope, q_slope, theoretical_exponent(cfg), bad)


def run_rates(cfg: ExperimentConfig, threads: int = 1) -> RateResult:
    """Replicated fits for every ``n`` in the grid with sub-seeds ``(master_seed, n, rep)``."""
    return rate_result(cfg, collect_rows(cfg, threads))


@dataclass(frozen=True, eq=False)
class Comparison:
    huber: RateResult
    squared: RateResult
    n: tuple[int, ...]
    median_ratio: tuple[float, ...]
    q95_ratio: tuple[float, ...]


def run_huber_vs_squared(huber_cfg: ExperimentConfig, squared_cfg: ExperimentConfig,
                         threads: int = 1) -> Comparison:
    """Run both losses on identical samples and report Huber/Squared error ratios."""
    if huber_cfg.loss.kind is not LossKind.HUBER or squared_cfg.loss.kind is not LossKind.SQUARED:
        raise ValueError("expected a (Huber, Squared) config pair")
    if huber_cfg.with_loss(squared_cfg.loss) != squared_cfg:
        raise ValueError("configs must differ only in the loss")
    h = run_rates(huber_cfg, threads)
    s = run_rates(squared_cfg, threads)
    med = tuple(a.median / b.median for a, b in zip(h.per_n, s.per_n))
    q95 = tuple(a.q95 / b.q95 for a, b in zip(h.per_n, s.per_n))
    return Comparison(h, s, tuple(r.n for r in h.per_n), med, q95)
