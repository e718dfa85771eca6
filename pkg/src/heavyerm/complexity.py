"""Monte-Carlo estimates of the complexity measures of the linear l1 class.

The class is ``{<t, .> : ||t||_1 <= rho}`` and its L2(pi) ball is
``{t : sum_j s_j^2 t_j^2 <= r^2}`` for the stationary standard deviations
``s_j``. After the change of variables ``u_j = s_j t_j`` the localised
supremum becomes

    sup { <v, u> : sum_j |u_j| / s_j <= rho, ||u||_2 <= r },   v_j = w_j / s_j,

which :func:`sup_linear_l1_l2` solves exactly through its one-dimensional dual.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from heavyerm.dgp import DgpKind, DgpSpec, stationary_draws
from heavyerm.risk import StationaryCov, stationary_cov
from heavyerm.rng import stream


class CovarianceUnavailable(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ComplexityEstimate:
    value: float
    std_error: float
    n_mc: int
    r_grid: np.ndarray = field(default_factory=lambda: np.empty(0))
    detail: dict = field(default_factory=dict)


# -- exact inner supremum -----------------------------------------------------

def _soft(v, lam_w):
    return np.sign(v) * np.maximum(np.abs(v) - lam_w, 0.0)


def sup_linear_l1_l2(w, rho: float, r: float, weights=None, tol: float = 1e-10):
    """``sup {<w, t> : sum_j weights_j |t_j| <= rho, ||t||_2 <= r}``.

    ``w`` may be a batch of shape ``(..., d)``; the result then has shape
    ``(...)``. Solved through the dual ``min_{lam >= 0} lam rho + r ||S(w, lam
    weights)||_2`` (``S`` = soft threshold), whose derivative in ``lam`` is
    ``rho - r <weights, |S|> / ||S||_2``; that sign is bisected.
    """
    if not rho > 0 or not r > 0:
        raise ValueError("rho and r must be positive")
    w = np.asarray(w, dtype=float)
    c = np.ones(w.shape[-1]) if weights is None else np.asarray(weights, dtype=float)
    a = np.abs(w)
    norm2 = np.sqrt(np.sum(a * a, axis=-1))
    l1w = np.sum(c * a, axis=-1)
    # l1 constraint slack at the l2-optimal direction
    l1_slack = r * l1w <= rho * norm2
    hi = np.max(a / c, axis=-1)
    lo = np.zeros_like(hi)
    # the dual objective is Lipschitz in lam with constant <= rho + r * ||c||_2
    lip = rho + r * float(np.linalg.norm(c))
    span = np.maximum(hi, 1e-300)
    n_iter = int(np.clip(np.ceil(np.log2(np.max(span) * lip / tol)) + 2, 1, 200))
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        s = np.maximum(a - mid[..., None] * c, 0.0)
        n2 = np.sqrt(np.sum(s * s, axis=-1))
        n1 = np.sum(c * s, axis=-1)
        # derivative sign: positive -> optimum lies at smaller lam
        pos = rho * n2 >= r * n1
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    s = np.maximum(a - hi[..., None] * c, 0.0)
    dual = hi * rho + r * np.sqrt(np.sum(s * s, axis=-1))
    out = np.where(l1_slack, r * norm2, dual)
    return float(out) if out.ndim == 0 else out


# -- localisation wrapper -----------------------------------------------------

def _fixed_point(phi, gamma: float, r_hi: float, slope0: float, iters: int = 80):
    """Smallest r > 0 with phi(r) <= gamma r, given phi(r)/r non-increasing.

    ``slope0`` is ``lim_{r -> 0} phi(r) / r``; if it is already <= gamma the
    infimum is 0.
    """
    if slope0 <= gamma:
        return 0.0
    lo, hi = 0.0, r_hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if phi(mid) <= gamma * mid:
            hi = mid
        else:
            lo = mid
    return hi


def _cov_or_default(spec: DgpSpec, cov: StationaryCov | None) -> StationaryCov:
    if cov is not None:
        if len(cov.diag) != spec.d:
            raise CovarianceUnavailable(f"covariance has size {len(cov.diag)}, expected {spec.d}")
        return cov
    if spec.kind not in tuple(DgpKind):
        raise CovarianceUnavailable(f"no analytic covariance for {spec.kind!r}")
    return stationary_cov(spec)


def _localised_fixed_point(draws_w: np.ndarray, sd: np.ndarray, rho: float, gamma: float):
    """Fixed point and delta-method standard error for ``E sup`` over draws ``w``."""
    v = draws_w / sd
    c = 1.0 / sd

    def phi_samples(r):
        return sup_linear_l1_l2(v, rho, r, weights=c)

    def phi(r):
        return float(np.mean(phi_samples(r)))

    slope0 = float(np.mean(np.sqrt(np.sum(v * v, axis=1))))
    phi_inf = float(np.mean(rho * np.max(np.abs(draws_w), axis=1)))
    r_hi = max(phi_inf / gamma, 1e-300)
    r_star = _fixed_point(phi, gamma, r_hi, slope0)
    if r_star == 0.0:
        return 0.0, 0.0
    vals = phi_samples(r_star)
    se_phi = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    h = 1e-4 * r_star
    dphi = (phi(r_star + h) - phi(max(r_star - h, 0.0))) / (2 * h)
    denom = max(gamma - dphi, 1e-12)
    return r_star, se_phi / denom


def omega_mu_estimate(spec: DgpSpec, mu: int, gamma: float, n_mc: int, seed: int,
                      cov: StationaryCov | None = None, l1_radius: float | None = None,
                      r_grid=None) -> ComplexityEstimate:
    """Blocked local Rademacher complexity of the difference class.

    ``l1_radius`` defaults to ``2 R`` (the class ``F - F``). Each of the
    ``n_mc`` replications draws ``mu`` i.i.d. stationary inputs and Rademacher
    signs; the same draws are reused for every radius so the bisection sees
    a single monotone function.
    """
    if mu < 1:
        raise ValueError("mu must be >= 1")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    rho = 2.0 * spec.R if l1_radius is None else float(l1_radius)
    grid = np.empty(0) if r_grid is None else np.asarray(r_grid, dtype=float)
    if rho == 0.0:
        return ComplexityEstimate(0.0, 0.0, n_mc, grid)
    cov = _cov_or_default(spec, cov)
    rng = stream(seed)
    w = np.empty((n_mc, spec.d))
    batch = max(1, (1 << 20) // (mu * spec.d))
    for start in range(0, n_mc, batch):
        m = min(batch, n_mc - start)
        x = stationary_draws(spec, m * mu, rng).reshape(m, mu, spec.d)
        eps = 2.0 * rng.integers(0, 2, size=(m, mu, 1)) - 1.0
        w[start:start + m] = np.sum(eps * x, axis=1) / mu
    value, se = _localised_fixed_point(w, cov.sd, rho, gamma)
    detail = {}
    if grid.size:
        v = w / cov.sd
        detail["phi"] = np.array([np.mean(sup_linear_l1_l2(v, rho, r, weights=1.0 / cov.sd)) for r in grid])
    return ComplexityEstimate(value, se, n_mc, grid, detail)


def small_ball_estimate(spec: DgpSpec, u: float, n_dir: int, n_mc: int, seed: int,
                        cov: StationaryCov | None = None) -> ComplexityEstimate:
    """Minimum over random directions of ``P(|<theta, X>| >= u ||<theta, X>||_L2)``.

    Directions are uniform on the unit sphere (the ratio is scale-invariant so
    they need no rescaling into the class). The minimum over a finite set of
    directions over-estimates the infimum over the class.
    """
    if not u > 0:
        raise ValueError("u must be positive")
    cov = _cov_or_default(spec, cov)
    rng = stream(seed)
    dirs = rng.standard_normal((n_dir, spec.d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    x = stationary_draws(spec, n_mc, rng)
    h = x @ dirs.T
    norms = np.sqrt((dirs * dirs) @ np.asarray(cov.diag))
    p = np.mean(np.abs(h) >= u * norms, axis=0)
    se = np.sqrt(p * (1.0 - p) / n_mc)
    j = int(np.argmin(p))
    return ComplexityEstimate(float(p[j]), float(se[j]), n_mc, np.empty(0),
                              {"per_direction": p, "per_direction_se": se, "directions": dirs,
                               "upper_bound_on_inf": True, "n_dir": n_dir})


def _gaussian_draws(spec, cov, n_mc, seed):
    rng = stream(seed)
    return rng.standard_normal((n_mc, spec.d)) * cov.sd


def gaussian_width_estimate(spec: DgpSpec, r: float, n_mc: int, seed: int,
                            cov: StationaryCov | None = None,
                            l1_radius: float | None = None) -> ComplexityEstimate:
    """Localised Gaussian width ``E sup_{h in H cap rD} G_h``.

    For linear ``h = <t, .>`` the canonical process is ``<g, t>`` with
    ``g ~ N(0, Sigma)``. ``H`` is the l1 ball of radius ``l1_radius``
    (default ``R``; pass ``2 R`` for the difference class).
    """
    if not r > 0:
        raise ValueError("r must be positive")
    rho = spec.R if l1_radius is None else float(l1_radius)
    if rho == 0.0:
        return ComplexityEstimate(0.0, 0.0, n_mc, np.array([r]))
    cov = _cov_or_default(spec, cov)
    g = _gaussian_draws(spec, cov, n_mc, seed)
    vals = sup_linear_l1_l2(g / cov.sd, rho, r, weights=1.0 / cov.sd)
    se = float(np.std(vals, ddof=1) / math.sqrt(n_mc)) if n_mc > 1 else 0.0
    return ComplexityEstimate(float(np.mean(vals)), se, n_mc, np.array([r]))


def blocks_for_n(n: int, eta1: float) -> int:
    """Effective block count ``N^(eta1 / (1 + eta1))`` used by the Gaussian-width measure."""
    return max(1, int(math.floor(n ** (eta1 / (1.0 + eta1)))))


def omega_1_estimate(spec: DgpSpec, n: int, zeta1: float, eta1: float, n_mc: int, seed: int,
                     cov: StationaryCov | None = None) -> ComplexityEstimate:
    """``inf {r : E||G||_{H cap rD} <= zeta1 r N^(eta1 / (2 (1 + eta1)))}`` for ``H = F - F``."""
    rho = 2.0 * spec.R
    if rho == 0.0:
        return ComplexityEstimate(0.0, 0.0, n_mc)
    cov = _cov_or_default(spec, cov)
    g = _gaussian_draws(spec, cov, n_mc, seed)
    level = zeta1 * n ** (eta1 / (2.0 * (1.0 + eta1)))
    value, se = _localised_fixed_point(g, cov.sd, rho, level)
    return ComplexityEstimate(value, se, n_mc)


def omega_q_estimate(spec: DgpSpec, n: int, zeta1: float, zeta2: float, eta1: float,
                     n_mc: int, seed: int, cov: StationaryCov | None = None) -> ComplexityEstimate:
    """``max(omega_1, omega_mu)`` with ``mu = N^(eta1 / (1 + eta1))`` blocks."""
    mu = blocks_for_n(n, eta1)
    w1 = omega_1_estimate(spec, n, zeta1, eta1, n_mc, seed, cov)
    w2 = omega_mu_estimate(spec, mu, zeta2, n_mc, seed + 1, cov)
    best = w1 if w1.value >= w2.value else w2
    return ComplexityEstimate(best.value, best.std_error, n_mc, np.empty(0),
                              {"omega_1": w1.value, "omega_2": w2.value, "mu": mu})


def default_zetas(tau: float, q: float) -> tuple[float, float]:
    """Localisation levels ``(2 tau Q^(3/2), 2 tau Q)`` with unit proportionality constants."""
    return 2.0 * tau * q**1.5, 2.0 * tau * q


# -- closed-form bounds -------------------------------------------------------

def theory_bound_subweibull(R: float, d: float, eta: float, mu: float,
                            c1: float = 1.0, c3: float = 2.0, K1: float = 1.0) -> float:
    """Two-branch bound on omega_mu for sub-Weibull inputs.

    ``c3 K1 R / sqrt(mu) * log(e d)^(1/eta)`` when ``mu <= c1 d``, else 0.
    """
    if min(R, d, eta, mu) <= 0:
        raise ValueError("all parameters must be positive")
    if mu > c1 * d:
        return 0.0
    return c3 * K1 * R / math.sqrt(mu) * math.log(math.e * d) ** (1.0 / eta)


def theory_bound_pareto(R: float, d: float, eta2: float, iota: float, N: float, tau: float,
                        q: float, C9: float = 1.0) -> float:
    """``C9 R / (tau q^(3/2)) d^(1/(eta2 - iota/2) + iota/8) N^(-1/2 + iota)``."""
    if not eta2 > 2:
        raise ValueError("eta2 must exceed 2")
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    if min(R, d, N, tau) <= 0 or iota < 0:
        raise ValueError("R, d, N, tau must be positive and iota nonnegative")
    d_exp = 1.0 / (eta2 - 0.5 * iota) + iota / 8.0
    return C9 * R / (tau * q**1.5) * d**d_exp * N ** (-0.5 + iota)


def theory_bound_order_stats(k: int, d: int, eta: float, K1: float) -> float:
    """``sqrt(2k) K1 log(e d)^(1/eta)``, the bound on ``E (sum_{i<=k} w*_i^2)^(1/2)``."""
    return math.sqrt(2.0 * k) * K1 * math.log(math.e * d) ** (1.0 / eta)


def theory_bound_block_mean_tail(t, scale: float, mu: int, eta3: float, p: float, C3: float = 1.0):
    """``C3 (scale^(eta3-2p-1) mu^(1-eta3/2) t^(eta3-2p) + scale^-2 t^-p)``."""
    t = np.asarray(t, dtype=float)
    out = C3 * (scale ** (eta3 - 2 * p - 1) * mu ** (1 - eta3 / 2) * t ** (eta3 - 2 * p)
                + scale**-2 * t**-p)
    return float(out) if out.ndim == 0 else out


def subweibull_moment_constant(eta: float, scale: float, p_max: float = 400.0) -> float:
    """``sup_{p >= min(1, eta)} ||W||_p / p^(1/eta)`` for |W| ~ Weibull(eta, scale).

    Uses ``E|W|^p = scale^p Gamma(1 + p/eta)``; the ratio tends to
    ``scale (e eta)^(-1/eta)`` as ``p`` grows, so a log-spaced grid up to
    ``p_max`` captures the supremum.
    """
    p = np.geomspace(min(1.0, eta), p_max, 4000)
    log_norm = gammaln(1.0 + p / eta) / p
    ratio = np.exp(log_norm - np.log(p) / eta)
    limit = (math.e * eta) ** (-1.0 / eta)
    return scale * float(max(np.max(ratio), limit))


# -- Monte-Carlo cross-checks of the closed-form bounds ------------------------

@dataclass(frozen=True, eq=False)
class BoundCheck:
    """Empirical values next to a closed-form bound on a grid; ``ok`` marks domination."""

    grid: np.ndarray
    empirical: np.ndarray
    bound: np.ndarray
    ok: np.ndarray
    constant: float

    @property
    def holds(self) -> bool:
        return bool(np.all(self.ok))

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.empirical / self.bound))


def order_statistic_check(d: int, eta: float, n_mc: int, seed: int) -> BoundCheck:
    """``E (sum_{i<=k} w*_i^2)^(1/2)`` for symmetrised-Weibull coordinates vs its bound, ``k = 1..d``.

    ``w*`` is the decreasing rearrangement of ``|w|``; the coordinates have
    unit variance and ``K1`` is their exact moment constant.
    """
    from heavyerm.dgp import sample_sym_weibull, weibull_scale

    k1 = subweibull_moment_constant(eta, weibull_scale(eta, 1.0))
    w = np.abs(sample_sym_weibull(eta, 1.0, stream(seed, d), (n_mc, d)))
    w = -np.sort(-w, axis=1)
    emp = np.sqrt(np.cumsum(w * w, axis=1)).mean(axis=0)
    ks = np.arange(1, d + 1)
    bound = np.array([theory_bound_order_stats(int(k), d, eta, k1) for k in ks])
    return BoundCheck(ks, emp, bound, emp <= bound, k1)


def block_mean_check(mu: int, eta3: float, p: float, t_grid, n_mc: int, seed: int,
                     k_sigma: float = 3.0) -> BoundCheck:
    """Tail of ``mu^(-1/2) |sum of mu symmetric-Pareto draws|`` vs the block-mean bound.

    ``C3`` is fitted as the largest empirical/shape ratio over the lower half
    of ``t_grid``; the whole grid is then tested with ``k_sigma`` binomial
    standard errors of slack, so the upper half is an out-of-sample check.
    """
    from heavyerm.dgp import sample_sym_pareto

    t = np.asarray(t_grid, dtype=float)
    w = np.empty(n_mc)
    for start in range(0, n_mc, 20_000):
        m = min(20_000, n_mc - start)
        x = sample_sym_pareto(eta3, 1.0, stream(seed, mu, start), (m, mu))
        w[start:start + m] = np.abs(x.sum(axis=1)) / math.sqrt(mu)
    w.sort()
    emp = 1.0 - np.searchsorted(w, t, side="left") / n_mc
    se = np.sqrt(emp * (1.0 - emp) / n_mc)
    shape = theory_bound_block_mean_tail(t, 1.0, mu, eta3, p, 1.0)
    half = max(1, t.size // 2)
    c3 = float(np.max(emp[:half] / shape[:half]))
    bound = c3 * shape
    return BoundCheck(t, emp, bound, emp <= bound + k_sigma * se, c3)
