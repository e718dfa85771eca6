"""Blocking, explicit concentration bounds, and an empirical tail harness.

The statistic throughout is ``M_N = max_{j <= N} |W_1 + ... + W_j|`` for a
centred stationary series ``W``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from heavyerm.dgp import DgpSpec, generate, sample_sym_pareto
from heavyerm.erm import LossSpec, loss_grad
from heavyerm.rng import derive_seed, stream


class NonDivisible(ValueError):
    pass


class DomainError(ValueError):
    pass


# -- blocking -----------------------------------------------------------------

@dataclass(frozen=True)
class BlockPartition:
    """Alternating blocks of lengths ``a`` and ``b`` covering ``0..n-1``.

    ``index_sets`` lists the ``2 mu`` blocks in time order
    (a-block, b-block, a-block, ...); indices are 0-based.
    """

    n: int
    a: int
    b: int
    mu: int
    index_sets: tuple[range, ...]

    @property
    def a_blocks(self) -> tuple[range, ...]:
        return self.index_sets[0::2]

    @property
    def b_blocks(self) -> tuple[range, ...]:
        return self.index_sets[1::2]


def blocking_partition(n: int, a: int, b: int) -> BlockPartition:
    if a < 1 or b < 0:
        raise ValueError("need a >= 1 and b >= 0")
    if n < 1 or n % (a + b):
        raise NonDivisible(f"a + b = {a + b} does not divide n = {n}")
    mu = n // (a + b)
    sets = []
    for i in range(mu):
        start = i * (a + b)
        sets.append(range(start, start + a))
        sets.append(range(start + a, start + a + b))
    return BlockPartition(n, a, b, mu, tuple(sets))


# -- closed-form bounds -------------------------------------------------------

def heavy_tail_terms(t: float, n: int, eta1: float, eta2: float, d1: float, d2: float,
                     c_prime: float = 1.0 / 3.0) -> tuple[float, float, float]:
    """The three summands of :func:`heavy_tail_bound`."""
    if not t > 1:
        raise DomainError(f"t must exceed 1, got {t}")
    if not eta2 > 2:
        raise ValueError(f"eta2 must exceed 2, got {eta2}")
    if not 0 <= d1 <= 1:
        raise ValueError(f"d1 must lie in [0, 1], got {d1}")
    if not eta1 > 0 or not c_prime > 0 or n < 1:
        raise ValueError("eta1, c_prime and n must be positive")
    t = float(t)
    lt = math.log(t)
    dl = d2 * lt
    if not dl > 0:
        raise DomainError("d2 * log(t) must be positive")
    # powers of t go through logs so large exponents underflow to 0 instead of overflowing
    term1 = math.exp((eta2 + 3.0) * math.log(2.0) - (1.0 - eta2) / eta1 * math.log(dl)
                     - (1.0 + d1 * (eta2 - 1.0)) * lt) * n
    term2 = 8.0 * n * math.exp(-(1.0 + c_prime * d2) * lt)
    term3 = 2.0 * math.exp(-math.exp((2.0 - 2.0 * d1) * lt) * dl ** (1.0 / eta1) / (9.0 * n))
    return term1, term2, term3


def heavy_tail_bound(t: float, n: int, eta1: float, eta2: float, d1: float, d2: float,
                     c_prime: float = 1.0 / 3.0) -> float:
    """Polynomial-tail bound on ``P(M_N >= t)`` for interactions with tail index ``eta2``."""
    return float(sum(heavy_tail_terms(t, n, eta1, eta2, d1, d2, c_prime)))


def default_d1_d2(eta2: float) -> tuple[float, float]:
    """``(1 / (1 + eta2), (eta2 - 1) / (eta2 + 1))``."""
    return 1.0 / (1.0 + eta2), (eta2 - 1.0) / (eta2 + 1.0)


def rio_terms(t: float, n: int, eta: float, v: float, c1: float = 1.0, c2: float = 1.0,
              c3: float = 1.0, c4: float = 1.0) -> tuple[float, float, float]:
    if not t > 1:
        raise DomainError(f"t must exceed 1, got {t}")
    if not 0 < eta < 1:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if min(c1, c2, c3, c4) <= 0 or n < 1 or v < 0:
        raise ValueError("constants and n must be positive, v nonnegative")
    term1 = n * math.exp(-(t**eta) / c1)
    term2 = math.exp(-t * t / (c2 * n * v)) if v > 0 else 0.0
    inner = math.exp(t ** (eta * (1.0 - eta)) / (c4 * math.log(t) ** eta))
    term3 = math.exp(-t * t / (c3 * n) * inner)
    return term1, term2, term3


def rio_bound(t: float, n: int, eta: float, v: float, c1: float = 1.0, c2: float = 1.0,
              c3: float = 1.0, c4: float = 1.0) -> float:
    """Bernstein-type bound on ``P(M_N >= t)`` for exponentially mixing sub-Weibull series."""
    return float(sum(rio_terms(t, n, eta, v, c1, c2, c3, c4)))


# -- variance proxy -----------------------------------------------------------

DEFAULT_M_GRID = tuple(2.0**k for k in range(13))


def default_max_lag(n: int, eta1: float = 1.0) -> int:
    return int(math.ceil(10.0 * math.log(n) ** (1.0 / eta1)))


def _autocov(z: np.ndarray, max_lag: int) -> np.ndarray:
    n = z.size
    zc = z - z.mean()
    m = 1 << int(math.ceil(math.log2(2 * n)))
    f = np.fft.rfft(zc, m)
    acf = np.fft.irfft(f * np.conj(f), m)[: max_lag + 1] / n
    return acf


def estimate_v(w, m_grid=None, max_lag: int | None = None, eta1: float = 1.0,
               threshold_z: float = 2.0) -> float:
    """Plug-in estimate of the clipped long-run variance proxy.

    For each level ``M`` the series is clipped to ``[-M, M]`` and the value
    ``gamma_0 + 2 sum_{1 <= j <= max_lag} |gamma_j|`` is formed from sample
    autocovariances; the maximum over ``m_grid`` is returned.

    Lags with ``|gamma_j| <= threshold_z * gamma_0 / sqrt(n)`` are treated as
    zero. Without this the absolute values turn pure sampling noise into a
    positive bias of order ``max_lag / sqrt(n)``. ``threshold_z=0`` gives the
    raw plug-in.
    """
    w = np.asarray(w, dtype=float).ravel()
    if w.size == 0:
        raise ValueError("empty series")
    n = w.size
    if max_lag is None:
        max_lag = default_max_lag(n, eta1) if n > 1 else 0
    if n <= 2 * max_lag:
        raise ValueError(f"series of length {n} too short for max_lag={max_lag}")
    grid = DEFAULT_M_GRID if m_grid is None else tuple(m_grid)
    best = 0.0
    for m in grid:
        acf = _autocov(np.clip(w, -m, m), max_lag)
        g0 = max(acf[0], 0.0)
        lags = np.abs(acf[1:])
        lags = lags[lags > threshold_z * g0 / math.sqrt(n)]
        best = max(best, g0 + 2.0 * float(np.sum(lags)))
    return best


# -- empirical tail harness ---------------------------------------------------

@dataclass(frozen=True)
class InteractionSpec:
    """Source of the series ``W``.

    ``kind="iid_pareto"``: i.i.d. symmetric Pareto with ``P(|W| > t) = 1/(1 + t^eta2)``.
    ``kind="dgp"``: ``W_i = loss'(xi_i) <theta - theta*, X_i>`` along one path of
    ``dgp``. Every supported noise law is symmetric and independent of ``X``
    so ``E W_i = 0`` exactly and no centring is needed.
    """

    kind: str = "iid_pareto"
    eta2: float = 3.0
    dgp: DgpSpec | None = None
    theta: tuple[float, ...] | None = None
    loss: LossSpec = field(default_factory=LossSpec)

    def __post_init__(self):
        if self.kind not in ("iid_pareto", "dgp"):
            raise ValueError(f"unknown interaction kind {self.kind!r}")
        if self.kind == "iid_pareto" and not self.eta2 > 2:
            raise ValueError("iid_pareto needs eta2 > 2")
        if self.kind == "dgp":
            if self.dgp is None or self.theta is None:
                raise ValueError("kind='dgp' needs dgp and theta")
            object.__setattr__(self, "theta", tuple(float(v) for v in self.theta))
            if len(self.theta) != self.dgp.d:
                raise ValueError("theta has the wrong dimension")
            if np.allclose(self.theta, self.dgp.theta_star):
                raise ValueError("theta must differ from theta_star")


@dataclass(frozen=True, eq=False)
class TailReport:
    t_grid: np.ndarray
    empirical: np.ndarray
    std_error: np.ndarray
    bound: np.ndarray
    params: dict
    n_mc: int
    w_mean: float
    w_mean_se: float

    def violations(self, k_sigma: float = 3.0) -> np.ndarray:
        """Grid indices where ``empirical > bound + k_sigma * std_error``."""
        return np.nonzero(self.empirical > self.bound + k_sigma * self.std_error)[0]

    @property
    def dominated(self) -> bool:
        return self.violations().size == 0


def _pareto_batch(spec: InteractionSpec, n: int, paths: int, rng) -> np.ndarray:
    return sample_sym_pareto(spec.eta2, 1.0, rng, (paths, n))


def _dgp_path(spec: InteractionSpec, n: int, seed: int) -> np.ndarray:
    s = generate(spec.dgp, n, seed)
    resid = s.y - s.x @ spec.dgp.theta
    return loss_grad(spec.loss, -resid) * (s.x @ (np.asarray(spec.theta) - spec.dgp.theta))


def simulate_sup_stat(spec: InteractionSpec, n: int, n_mc: int, seed: int, chunk: int = 1000):
    """Return ``(M, sum_W, sum_W2)``: per-path sup statistics and pooled moments of W."""
    sups = np.empty(n_mc)
    s1 = 0.0
    s2 = 0.0
    if spec.kind == "iid_pareto":
        for start in range(0, n_mc, chunk):
            m = min(chunk, n_mc - start)
            w = _pareto_batch(spec, n, m, stream(seed, start // chunk))
            sups[start:start + m] = np.max(np.abs(np.cumsum(w, axis=1)), axis=1)
            s1 += float(np.sum(w))
            s2 += float(np.sum(w * w))
    else:
        for k in range(n_mc):
            w = _dgp_path(spec, n, derive_seed(seed, k))
            sups[k] = np.max(np.abs(np.cumsum(w)))
            s1 += float(np.sum(w))
            s2 += float(np.sum(w * w))
    return sups, s1, s2


def tail_verify(spec: InteractionSpec, n: int, t_grid, n_mc: int, bound_params: dict,
                seed: int) -> TailReport:
    """Empirical ``P(M_N >= t)`` next to an analytic bound.

    ``bound_params["bound"]`` selects ``"heavy_tail"`` (default; keys
    ``eta1, eta2, d1, d2, c_prime``) or ``"rio"`` (keys ``eta, v, c1..c4``).
    Missing ``d1``/``d2`` default to :func:`default_d1_d2`.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(t_grid <= 1) or np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be increasing and > 1")
    if n_mc < 1 or n < 1:
        raise ValueError("n and n_mc must be positive")
    params = dict(bound_params)
    kind = params.pop("bound", "heavy_tail")
    if kind == "heavy_tail":
        eta2 = params.get("eta2", spec.eta2)
        d1, d2 = default_d1_d2(eta2)
        p = {"eta1": params.get("eta1", 1.0), "eta2": eta2, "d1": params.get("d1", d1),
             "d2": params.get("d2", d2), "c_prime": params.get("c_prime", 1.0 / 3.0)}
        bound = np.array([heavy_tail_bound(t, n, **p) for t in t_grid])
    elif kind == "rio":
        p = {k: params[k] for k in ("eta", "v")}
        p.update({k: params.get(k, 1.0) for k in ("c1", "c2", "c3", "c4")})
        bound = np.array([rio_bound(t, n, **p) for t in t_grid])
    else:
        raise ValueError(f"unknown bound {kind!r}")

    sups, s1, s2 = simulate_sup_stat(spec, n, n_mc, seed)
    sups.sort()
    # P(M >= t) = 1 - (#{M < t}) / n_mc
    emp = 1.0 - np.searchsorted(sups, t_grid, side="left") / n_mc
    se = np.sqrt(emp * (1.0 - emp) / n_mc)
    total = n * n_mc
    mean = s1 / total
    var = max(s2 / total - mean * mean, 0.0)
    # pooled SE ignores serial correlation; dependence only enters the dgp kind
    w_se = math.sqrt(var / total)
    return TailReport(t_grid, emp, se, bound, {"bound": kind, "n": n, **p}, n_mc, mean, w_se)


def fit_tail_slope(t_grid, tail, min_prob: float = 0.0) -> float:
    """Least-squares slope of ``log tail`` on ``log t`` over points with ``tail > min_prob``."""
    t = np.asarray(t_grid, dtype=float)
    p = np.asarray(tail, dtype=float)
    keep = p > min_prob
    if keep.sum() < 2:
        raise ValueError("need at least two positive tail values")
    slope, _ = np.polyfit(np.log(t[keep]), np.log(p[keep]), 1)
    return float(slope)
