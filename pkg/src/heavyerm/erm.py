"""l1-ball constrained empirical risk minimisation for linear predictors."""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np


class LossKind(str, enum.Enum):
    SQUARED = "Squared"
    HUBER = "Huber"


class NonConvergenceWarning(RuntimeWarning):
    """The solver stopped (max_iter or a rounding stall) with the projected-gradient norm above tol."""


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind = LossKind.SQUARED
    huber_threshold: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if self.kind is LossKind.HUBER:
            if self.huber_threshold is None or not self.huber_threshold > 0:
                raise ValueError("Huber loss needs a positive huber_threshold")

    @classmethod
    def huber_for_noise(cls, noise_scale: float) -> "LossSpec":
        """Huber loss with the default threshold of three noise scales."""
        return cls(LossKind.HUBER, 3.0 * noise_scale)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 10_000
    step0: float | None = None
    backtrack: float = 0.5
    grow: float = 2.0
    stall_iters: int = 25


@dataclass(frozen=True, eq=False)
class FitResult:
    theta_hat: np.ndarray
    iterations: int
    final_gap: float
    objective: float
    converged: bool
    history: np.ndarray


def loss_value(loss: LossSpec, t):
    t = np.asarray(t, dtype=float)
    if loss.kind is LossKind.SQUARED:
        out = t * t
    else:
        th = loss.huber_threshold
        a = np.abs(t)
        out = np.where(a <= th, 0.5 * t * t, th * a - 0.5 * th * th)
    return float(out) if out.ndim == 0 else out


def loss_grad(loss: LossSpec, t):
    t = np.asarray(t, dtype=float)
    if loss.kind is LossKind.SQUARED:
        out = 2.0 * t
    else:
        out = np.clip(t, -loss.huber_threshold, loss.huber_threshold)
    return float(out) if out.ndim == 0 else out


def project_l1(v, R: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball of radius R (sort + soft-threshold)."""
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    if a.sum() <= R:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    rho = np.nonzero(u * k > css - R)[0][-1]
    lam = (css[rho] - R) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - lam, 0.0)


def empirical_risk(theta, x, y, loss: LossSpec) -> float:
    return float(np.mean(loss_value(loss, x @ theta - y)))


def _risk_change(loss: LossSpec, r0, dr) -> float:
    """``mean(loss(r0 + dr)) - mean(loss(r0))`` without cancellation on the quadratic pieces.

    Near the optimum successive objective values agree to ~1e-16 relative, so
    differencing the two means would drown the decrease in rounding error.
    ``dr`` must be the residual change ``x @ step`` itself, not a difference of residuals.
    """
    quad = dr * (2.0 * r0 + dr)
    if loss.kind is LossKind.SQUARED:
        return float(np.mean(quad))
    th = loss.huber_threshold
    r1 = r0 + dr
    both_inner = (np.abs(r0) <= th) & (np.abs(r1) <= th)
    direct = loss_value(loss, r1) - loss_value(loss, r0)
    return float(np.mean(np.where(both_inner, 0.5 * quad, direct)))


def solve_erm(x, y, loss: LossSpec, R: float, opts: SolverOptions | None = None) -> FitResult:
    """Projected gradient descent with backtracking on the empirical risk.

    The step is accepted when the quadratic upper model at the current point
    dominates the objective at the projected trial point, which makes the
    accepted objective sequence non-increasing. ``history`` is tracked by
    accumulating the accurately computed decreases. Iteration stops once the
    gradient-mapping norm ``||theta - P(theta - s g)|| / s`` drops below
    ``opts.tol``.
    """
    opts = opts or SolverOptions()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0 or y.shape != (x.shape[0],):
        raise ValueError("need a nonempty (n, d) design and a length-n response")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    n, d = x.shape

    def residual_and_grad(theta):
        r = x @ theta - y
        return r, x.T @ loss_grad(loss, r) / n

    step = opts.step0
    if step is None:
        # inverse of the gradient Lipschitz bound: curvature <= 2 for squared, 1 for Huber
        curv = 2.0 if loss.kind is LossKind.SQUARED else 1.0
        lip = curv * np.linalg.norm(x, 2) ** 2 / n
        step = 1.0 / lip if lip > 0 else 1.0

    theta = project_l1(np.zeros(d), R)
    res, g = residual_and_grad(theta)
    fval = float(np.mean(loss_value(loss, res)))
    history = [fval]
    gap = np.inf
    it = 0
    stalled = 0
    while it < opts.max_iter:
        it += 1
        while True:
            cand = project_l1(theta - step * g, R)
            diff = cand - theta
            dr = x @ diff
            rc, gc = residual_and_grad(cand)
            delta = _risk_change(loss, res, dr)
            if delta <= g @ diff + (diff @ diff) / (2.0 * step) or step < 1e-300:
                break
            step *= opts.backtrack
        gap = float(np.linalg.norm(diff) / step)
        if delta <= 0.0:
            theta, res, g = cand, rc, gc
            fval += delta
            history.append(fval)
            stalled = 0
        else:
            # only rounding can make an accepted model step increase the risk
            stalled += 1
        if gap < opts.tol or stalled >= opts.stall_iters:
            break
        step *= opts.grow

    converged = gap < opts.tol
    if not converged:
        why = (f"stalled at floating-point resolution after {it} iterations" if stalled >= opts.stall_iters
               else f"stopped at max_iter={opts.max_iter}")
        warnings.warn(f"solver {why} with gap {gap:.3e} > tol {opts.tol:.1e}", NonConvergenceWarning, stacklevel=2)
    return FitResult(
        theta_hat=theta,
        iterations=it,
        final_gap=gap,
        objective=empirical_risk(theta, x, y, loss),
        converged=converged,
        history=np.asarray(history),
    )


def erm_fit(sample, loss: LossSpec, R: float, opts: SolverOptions | None = None) -> FitResult:
    """Fit the l1-constrained ERM on a :class:`~heavyerm.dgp.Sample`."""
    return solve_erm(sample.x, sample.y, loss, R, opts)
