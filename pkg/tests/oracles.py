"""Independent reference computations used by the tests.

Nothing here calls into the package's numerical kernels; each oracle reaches
the same quantity by a different route (quadrature, enumeration, brute force).
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def sym_pareto_second_moment_quad(eta: float, scale: float) -> float:
    """E X^2 = int_0^inf 2t P(|X| > t) dt with P(|X| > t) = 1 / (1 + (scale t)^eta)."""
    val, _ = integrate.quad(lambda t: 2.0 * t / (1.0 + (scale * t) ** eta), 0.0, np.inf,
                            epsabs=1e-13, epsrel=1e-13, limit=500)
    return val


def pareto_plus_cdf(t, eta: float, scale: float):
    t = np.asarray(t, dtype=float)
    return 1.0 - 1.0 / (1.0 + (scale * t) ** eta)


def squared(t):
    return t * t


def huber(th):
    def f(t):
        a = abs(t)
        return 0.5 * t * t if a <= th else th * a - 0.5 * th * th
    return f


def grid_search_erm_2d(x, y, loss_scalar, R: float, m: int = 200):
    """Minimum of the empirical risk over an m x m grid clipped to the l1 ball.

    The grid includes the four vertices so a corner optimum is hit exactly.
    """
    g = np.linspace(-R, R, m)
    a, b = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([a.ravel(), b.ravel()], axis=1)
    pts = pts[np.abs(pts).sum(1) <= R * (1 + 1e-12)]
    pts = np.vstack([pts, [[R, 0], [-R, 0], [0, R], [0, -R]]])
    vec = np.vectorize(loss_scalar)
    risks = np.array([np.mean(vec(x @ p - y)) for p in pts])
    i = int(np.argmin(risks))
    return float(risks[i]), pts[i]


def sup_l1_l2_boundary_2d(w, rho: float, r: float, n_angles: int = 200_000) -> float:
    """Maximise <w, t> along the boundary of {||t||_1 <= rho} cap {||t||_2 <= r}.

    In polar form the boundary radius is min(r, rho / (|cos| + |sin|)).
    """
    phi = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    c, s = np.cos(phi), np.sin(phi)
    rad = np.minimum(r, rho / (np.abs(c) + np.abs(s)))
    return float(np.max(rad * (w[0] * c + w[1] * s)))


def sup_l1_l2_candidates_2d(w, rho: float, r: float):
    """Exact 2-D supremum by enumerating candidate maximisers; vectorised over rows of ``w``.

    Candidates: the l2-optimal point ``r w/|w|`` (if it satisfies the l1
    constraint), the diamond vertices inside the disc, and the circle/edge
    intersections in the quadrant of ``|w|``.
    """
    w = np.abs(np.atleast_2d(np.asarray(w, dtype=float)))
    n2 = np.hypot(w[:, 0], w[:, 1])
    best = np.zeros(w.shape[0])
    feas = r * (w[:, 0] + w[:, 1]) <= rho * n2 + 1e-15
    best = np.where(feas, r * n2, best)
    if rho <= r:
        best = np.maximum(best, rho * np.max(w, axis=1))
    disc = 2 * r * r - rho * rho
    if disc >= 0:
        for sgn in (-1.0, 1.0):
            x1 = 0.5 * (rho + sgn * math.sqrt(disc))
            x2 = rho - x1
            if x1 >= 0 and x2 >= 0:
                best = np.maximum(best, w[:, 0] * x1 + w[:, 1] * x2)
    return best


def half_normal_mean() -> float:
    return math.sqrt(2.0 / math.pi)


def heavy_tail_terms_ref(t, n, eta1, eta2, d1, d2, cp):
    """Three summands evaluated term by term in plain floating point."""
    L = d2 * math.log(t)
    a = 2 ** (eta2 + 3) * n * L ** ((eta2 - 1) / eta1) / t ** (1 + d1 * (eta2 - 1))
    b = 8 * n / t ** (1 + cp * d2)
    c = 2 * math.exp(-(t ** (2 - 2 * d1)) * L ** (1 / eta1) / (9 * n))
    return a, b, c


def rio_terms_ref(t, n, eta, v, c1, c2, c3, c4):
    a = n * math.exp(-(t**eta) / c1)
    b = math.exp(-(t**2) / (c2 * n * v))
    c = math.exp(-(t**2) / (c3 * n) * math.exp(t ** (eta * (1 - eta)) / (c4 * math.log(t) ** eta)))
    return a, b, c
