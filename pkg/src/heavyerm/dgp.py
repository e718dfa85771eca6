"""Stationary, exponentially beta-mixing, heavy-tailed data-generating processes.

Three input processes are supported, all with a diagonal AR matrix
``dependence * I``:

* ``GaussianAR``: X_i = a X_{i-1} + N(0, I), started at N(0, I / (1 - a^2)).
* ``SubWeibullAR``: same recursion with symmetrised Weibull innovations of
  unit variance, started at 0 and run through ``burn_in`` steps.
* ``SemiParetoAR``: two independent semi-Pareto AR(1) chains per coordinate
  (Pillai's recursion) combined by a random sign, which gives a symmetric
  Pareto marginal. Started exactly at the stationary law.

Responses are ``y = x @ theta_star + noise`` with i.i.d. noise independent of x.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter
from scipy.special import gamma as gamma_fn

from heavyerm.rng import stream


class DgpKind(str, enum.Enum):
    SUB_WEIBULL_AR = "SubWeibullAR"
    SEMI_PARETO_AR = "SemiParetoAR"
    GAUSSIAN_AR = "GaussianAR"


class NoiseKind(str, enum.Enum):
    GAUSSIAN = "Gaussian"
    SUB_WEIBULL = "SubWeibull"
    POLY_TAIL = "PolyTail"


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind = NoiseKind.GAUSSIAN
    scale: float = 1.0
    tail: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not self.scale > 0:
            raise ValueError(f"noise scale must be positive, got {self.scale}")
        if not self.tail > 0:
            raise ValueError(f"noise tail must be positive, got {self.tail}")
        if self.kind is NoiseKind.POLY_TAIL and not self.tail > 2:
            raise ValueError(f"PolyTail noise needs tail > 2 for finite variance, got {self.tail}")


@dataclass(frozen=True)
class DgpSpec:
    """Full description of a stationary input/response process.

    ``dependence`` is the AR coefficient (the diagonal of A). ``tail`` is the
    Weibull shape of the innovations for SubWeibullAR and the Pareto exponent
    for SemiParetoAR; GaussianAR ignores it. ``pareto_scales`` defaults to ones.
    """

    kind: DgpKind
    d: int
    theta_star: tuple[float, ...]
    R: float
    dependence: float = 0.0
    tail: float = 1.0
    pareto_scales: tuple[float, ...] | None = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    burn_in: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "kind", DgpKind(self.kind))
        object.__setattr__(self, "theta_star", tuple(float(t) for t in self.theta_star))
        if self.pareto_scales is None:
            object.__setattr__(self, "pareto_scales", (1.0,) * int(self.d))
        else:
            object.__setattr__(self, "pareto_scales", tuple(float(s) for s in self.pareto_scales))
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if len(self.theta_star) != self.d:
            raise ValueError(f"theta_star has length {len(self.theta_star)}, expected d={self.d}")
        if len(self.pareto_scales) != self.d:
            raise ValueError(f"pareto_scales has length {len(self.pareto_scales)}, expected d={self.d}")
        if not 0 <= self.dependence < 1:
            raise ValueError(f"dependence must lie in [0, 1), got {self.dependence}")
        if not self.tail > 0:
            raise ValueError(f"tail must be positive, got {self.tail}")
        if any(not s > 0 for s in self.pareto_scales):
            raise ValueError("every pareto scale must be positive")
        if self.R < 0:
            raise ValueError(f"R must be nonnegative, got {self.R}")
        if sum(abs(t) for t in self.theta_star) > self.R + 1e-12:
            raise ValueError("theta_star lies outside the l1 ball of radius R")
        if self.kind is DgpKind.SEMI_PARETO_AR and not self.tail > 2:
            raise ValueError(f"SemiParetoAR needs tail > 2 for finite variance, got {self.tail}")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")

    @property
    def theta(self) -> np.ndarray:
        return np.asarray(self.theta_star, dtype=float)


@dataclass(frozen=True, eq=False)
class Sample:
    x: np.ndarray
    y: np.ndarray
    spec: DgpSpec
    seed: int
    n: int

    def __post_init__(self):
        if self.x.shape != (self.n, self.spec.d):
            raise ValueError(f"x has shape {self.x.shape}, expected {(self.n, self.spec.d)}")
        if self.y.shape != (self.n,):
            raise ValueError(f"y has shape {self.y.shape}, expected {(self.n,)}")
        self.x.flags.writeable = False
        self.y.flags.writeable = False


# -- primitive samplers -------------------------------------------------------

def open_uniform(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform draws on the open interval (0, 1), never hitting either end."""
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k + 0.5) / float(1 << 53)


def sample_pareto_plus(u, eta3: float, scale: float):
    """Inverse-survival map for the positive Pareto law L+(eta3, scale).

    ``P(delta > t) = 1 / (1 + (scale * t) ** eta3)``, so
    ``delta = ((1/u) - 1) ** (1/eta3) / scale`` for ``u`` uniform on (0, 1).
    """
    if not eta3 > 0:
        raise ValueError(f"eta3 must be positive, got {eta3}")
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ValueError("u must lie strictly inside (0, 1)")
    out = np.power(1.0 / u - 1.0, 1.0 / eta3) / scale
    return float(out) if out.ndim == 0 else out


def weibull_scale(eta: float, target_sd: float) -> float:
    """Scale K with P(|W| > t) = exp(-(t/K)^eta) when sd(W) = target_sd."""
    return target_sd / math.sqrt(gamma_fn(1.0 + 2.0 / eta))


def sample_sym_weibull(eta: float, target_sd: float, rng: np.random.Generator, size=None):
    """Symmetric variable whose modulus is Weibull(eta), rescaled to sd ``target_sd``."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not target_sd > 0:
        raise ValueError(f"target_sd must be positive, got {target_sd}")
    mag = weibull_scale(eta, target_sd) * rng.weibull(eta, size=size)
    sign = 2.0 * rng.integers(0, 2, size=size) - 1.0
    return mag * sign


def sample_sym_pareto(eta: float, scale: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Symmetric Pareto: |X| ~ L+(eta, scale) with an independent fair sign."""
    mag = sample_pareto_plus(open_uniform(rng, size), eta, scale)
    sign = 2.0 * rng.integers(0, 2, size=size) - 1.0
    return mag * sign


def second_moment_sym_pareto(eta3: float, scale: float) -> float:
    """E[X^2] for the symmetric Pareto law L(eta3, scale)."""
    if not eta3 > 2:
        raise ValueError(f"second moment diverges for eta3 <= 2 (got {eta3})")
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return 2.0 / scale**2 * (math.pi / eta3) / math.sin(2.0 * math.pi / eta3)


def sample_noise(noise: NoiseSpec, rng: np.random.Generator, size) -> np.ndarray:
    if noise.kind is NoiseKind.GAUSSIAN:
        return noise.scale * rng.standard_normal(size)
    if noise.kind is NoiseKind.SUB_WEIBULL:
        return sample_sym_weibull(noise.tail, noise.scale, rng, size)
    # survival of |noise| / scale is exactly 1 / (1 + t^tail)
    return sample_sym_pareto(noise.tail, 1.0 / noise.scale, rng, size)


# -- semi-Pareto recursion ----------------------------------------------------

_CHUNK = 256


def semi_pareto_path(x0: np.ndarray, coins: np.ndarray, deltas: np.ndarray, eta3: float) -> np.ndarray:
    """Run the semi-Pareto AR(1) recursion along axis 0.

    ``x_t = k x_{t-1}`` when ``coins[t-1]`` is False and
    ``x_t = min(k x_{t-1}, deltas[t-1])`` otherwise, with ``k = 2^(1/eta3)``.
    Returns the path including ``x0`` (length ``len(coins) + 1``).

    Unrolled, ``log x_t`` is a running minimum of ``log x_0 + t log k`` and
    ``log delta_s + (t - s) log k`` over active ``s``; that is evaluated with
    ``minimum.accumulate`` in chunks so the offsets stay small.
    """
    logk = math.log(2.0) / eta3
    steps = coins.shape[0]
    out = np.empty((steps + 1,) + np.shape(x0))
    out[0] = x0
    cur = np.log(x0)
    for start in range(0, steps, _CHUNK):
        stop = min(start + _CHUNK, steps)
        m = stop - start
        s = np.arange(1, m + 1, dtype=float).reshape((m,) + (1,) * cur.ndim)
        cand = np.where(coins[start:stop], np.log(deltas[start:stop]) - s * logk, np.inf)
        run = np.minimum.accumulate(cand, axis=0)
        logx = np.minimum(cur, run) + s * logk
        out[start + 1:stop + 1] = np.exp(logx)
        cur = logx[-1]
    return out


def _semi_pareto_inputs(spec: DgpSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    eta3 = spec.tail
    scales = np.asarray(spec.pareto_scales)
    d = spec.d
    x0 = sample_pareto_plus(open_uniform(rng, (2, d)), eta3, 1.0) / scales
    coins = rng.integers(0, 2, size=(n - 1, 2, d)).astype(bool)
    deltas = sample_pareto_plus(open_uniform(rng, (n - 1, 2, d)), eta3, 1.0) / scales
    paths = semi_pareto_path(x0, coins, deltas, eta3)
    # one sign variable per (time, coordinate) keeps the coordinates independent
    pick_first = open_uniform(rng, (n, d)) <= 0.5
    return np.where(pick_first, paths[:, 0, :], -paths[:, 1, :])


def _ar_filter(innov: np.ndarray, a: float) -> np.ndarray:
    if a == 0.0:
        return innov
    return lfilter([1.0], [1.0, -a], innov, axis=0)


def generate(spec: DgpSpec, n: int, seed: int) -> Sample:
    """Draw ``n`` consecutive observations of the stationary process."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = stream(seed)
    a = spec.dependence
    d = spec.d
    if spec.kind is DgpKind.GAUSSIAN_AR:
        innov = rng.standard_normal((n, d))
        innov[0] /= math.sqrt(1.0 - a * a)
        x = _ar_filter(innov, a)
    elif spec.kind is DgpKind.SUB_WEIBULL_AR:
        innov = sample_sym_weibull(spec.tail, 1.0, rng, (spec.burn_in + n, d))
        x = _ar_filter(innov, a)[spec.burn_in:]
    else:
        x = _semi_pareto_inputs(spec, n, rng)
    x = np.ascontiguousarray(x)
    y = x @ spec.theta + sample_noise(spec.noise, rng, n)
    return Sample(x=x, y=y, spec=spec, seed=int(seed), n=int(n))


def stationary_draws(spec: DgpSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` i.i.d. draws of X from the stationary law, shape ``(m, d)``.

    SubWeibullAR has no closed-form marginal; each draw is the truncated
    moving-average sum over the last ``h`` innovations with
    ``dependence**h <= 2**-60`` (capped at ``burn_in``).
    """
    a = spec.dependence
    d = spec.d
    if spec.kind is DgpKind.GAUSSIAN_AR:
        return rng.standard_normal((m, d)) / math.sqrt(1.0 - a * a)
    if spec.kind is DgpKind.SEMI_PARETO_AR:
        return sample_sym_pareto(spec.tail, 1.0, rng, (m, d)) / np.asarray(spec.pareto_scales)
    if a == 0.0:
        horizon = 1
    else:
        horizon = min(max(spec.burn_in, 1), int(math.ceil(-60 * math.log(2) / math.log(a))) + 1)
    x = np.zeros((m, d))
    for _ in range(horizon):
        x = a * x + sample_sym_weibull(spec.tail, 1.0, rng, (m, d))
    return x


def semi_pareto_marginals(eta3: float, scale: float, times, n_paths: int, rng: np.random.Generator,
                          chunk: int = 10_000) -> np.ndarray:
    """Symmetrised semi-Pareto values at the given times for ``n_paths`` independent chains.

    Each chain starts from the stationary law; returns shape ``(len(times), n_paths)``.
    """
    times = np.asarray(times, dtype=int)
    if times.ndim != 1 or times.size == 0 or np.any(times < 0):
        raise ValueError("times must be a nonempty list of nonnegative integers")
    steps = int(times.max())
    out = np.empty((times.size, n_paths))
    for start in range(0, n_paths, chunk):
        m = min(chunk, n_paths - start)
        x0 = sample_pareto_plus(open_uniform(rng, (2, m)), eta3, scale)
        coins = rng.integers(0, 2, size=(steps, 2, m)).astype(bool)
        deltas = sample_pareto_plus(open_uniform(rng, (steps, 2, m)), eta3, scale)
        path = semi_pareto_path(x0, coins, deltas, eta3)[times]
        pick_first = open_uniform(rng, (times.size, m)) <= 0.5
        out[:, start:start + m] = np.where(pick_first, path[:, 0, :], -path[:, 1, :])
    return out
