"""L2(pi) distance between linear predictors under the stationary input law."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from heavyerm.dgp import DgpKind, DgpSpec, second_moment_sym_pareto, stationary_draws
from heavyerm.rng import stream


class DimensionMismatch(ValueError):
    pass


class CovSource(str, enum.Enum):
    ANALYTIC = "Analytic"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class StationaryCov:
    diag: tuple[float, ...]
    source: CovSource = CovSource.ANALYTIC
    mc_n: int = 0

    def __post_init__(self):
        object.__setattr__(self, "diag", tuple(float(v) for v in self.diag))
        if any(not v > 0 for v in self.diag):
            raise ValueError("covariance diagonal must be positive")

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(np.asarray(self.diag))


def stationary_cov(spec: DgpSpec, mc_n: int = 0, seed: int = 0) -> StationaryCov:
    """Diagonal of the stationary covariance of X.

    Analytic for every supported kind; with ``mc_n > 0`` the second moments
    are instead estimated from ``mc_n`` stationary draws (used to cross-check
    the closed forms).
    """
    if mc_n < 0:
        raise ValueError("mc_n must be nonnegative")
    if mc_n > 0:
        x = stationary_draws(spec, mc_n, stream(seed))
        return StationaryCov(tuple(np.mean(x * x, axis=0)), CovSource.MONTE_CARLO, mc_n)
    a = spec.dependence
    if spec.kind is DgpKind.SEMI_PARETO_AR:
        diag = [second_moment_sym_pareto(spec.tail, s) for s in spec.pareto_scales]
    else:
        # Gaussian and symmetrised-Weibull innovations both have unit variance
        diag = [1.0 / (1.0 - a * a)] * spec.d
    return StationaryCov(tuple(diag))


def l2_error(theta_hat, theta_star, cov: StationaryCov) -> float:
    """``sqrt(sum_j cov_j (theta_hat_j - theta_star_j)^2)``."""
    th = np.asarray(theta_hat, dtype=float)
    ts = np.asarray(theta_star, dtype=float)
    if th.shape != ts.shape or th.shape != (len(cov.diag),):
        raise DimensionMismatch(f"shapes {th.shape}, {ts.shape} vs covariance of size {len(cov.diag)}")
    v = cov.sd * (th - ts)
    # rescale so tiny or huge differences neither underflow nor overflow when squared
    scale = float(np.max(np.abs(v))) if v.size else 0.0
    if scale == 0.0 or not math.isfinite(scale):
        return scale
    return scale * math.sqrt(float(np.sum((v / scale) ** 2)))
