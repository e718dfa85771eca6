import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heavyerm.config import ExperimentConfig
from heavyerm.dgp import DgpSpec, NoiseSpec
from heavyerm.erm import LossKind, LossSpec
from heavyerm.experiments import (
    DegenerateInput,
    _one_fit,
    collect_rows,
    fit_loglog_slope,
    mu_for_n,
    rate_result,
    run_huber_vs_squared,
    run_rates,
    summarise,
    theoretical_exponent,
)


def small_cfg(**kw):
    spec = DgpSpec("GaussianAR", 2, (0.5, -0.25), 1.0, dependence=0.5,
                   noise=kw.pop("noise", NoiseSpec("Gaussian", 1.0)))
    base = dict(dgp=spec, n_grid=(32, 64, 128), replications=4, master_seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


# -- slope fitting ------------------------------------------------------------

@given(st.floats(-3, 3), st.floats(1e-3, 1e3), st.lists(st.integers(2, 10**6), min_size=3, max_size=10, unique=True))
def test_exact_power_law(alpha, c, ns):
    slope, se = fit_loglog_slope([(n, c * n**alpha) for n in ns])
    assert slope == pytest.approx(alpha, abs=1e-12)
    assert se < 1e-10


def test_examples():
    ns = [2**k for k in range(8, 15)]
    assert fit_loglog_slope([(n, 1 / n) for n in ns]) == pytest.approx((-1.0, 0.0), abs=1e-12)
    assert fit_loglog_slope([(n, 3.0) for n in ns])[0] == pytest.approx(0.0, abs=1e-15)
    wiggle = [(n, n**-0.5 * (1 + 0.01 * (-1) ** i)) for i, n in enumerate(ns)]
    assert abs(fit_loglog_slope(wiggle)[0] + 0.5) <= 0.02


@pytest.mark.parametrize("pairs", [
    [(1, 1.0), (2, 1.0)],
    [(1, 1.0), (1, 2.0), (2, 1.0)],
    [(1, 1.0), (2, 0.0), (3, 1.0)],
    [(1, 1.0), (2, -1.0), (3, 1.0)],
])
def test_degenerate_input(pairs):
    with pytest.raises(DegenerateInput):
        fit_loglog_slope(pairs)


def test_stderr_matches_textbook_formula():
    rng = np.random.default_rng(0)
    ns = np.array([10, 20, 40, 80, 160])
    es = ns**-0.5 * np.exp(rng.normal(0, 0.1, ns.size))
    slope, se = fit_loglog_slope(zip(ns, es))
    from scipy import stats

    ref = stats.linregress(np.log(ns), np.log(es))
    assert slope == pytest.approx(ref.slope, rel=1e-12)
    assert se == pytest.approx(ref.stderr, rel=1e-10)


# -- exponents ----------------------------------------------------------------

def _with(cfg, **dgp_kw):
    from dataclasses import replace

    return replace(cfg, dgp=replace(cfg.dgp, **dgp_kw))


def test_theoretical_exponent_table():
    iota = 0.01
    light = small_cfg(iota=iota)
    assert theoretical_exponent(light) == pytest.approx(-0.5 + iota)
    assert theoretical_exponent(small_cfg(iota=iota, norm_equivalence=False)) == pytest.approx(-0.25 + iota)
    poly_noise = small_cfg(iota=iota, eta2=3.0, noise=NoiseSpec("PolyTail", 1.0, 3.0))
    assert theoretical_exponent(poly_noise) == pytest.approx(-(1 - 1 / 3) / 4 + iota)
    huber = poly_noise.with_loss(LossSpec(LossKind.HUBER, 3.0))
    assert theoretical_exponent(huber) == pytest.approx(-0.5 + iota)
    sp = _with(huber, kind="SemiParetoAR", tail=3.0)
    assert theoretical_exponent(sp) == pytest.approx(-(1 - 1 / 3) / 4 + iota)


def test_mu_for_n():
    assert mu_for_n(10_000, 0.98, 0.3, 1 / 3, 1.0) == math.floor(10_000**0.98 * 0.3 / 3 / 4)
    assert mu_for_n(2, 0.5, 0.01, 0.1, 1.0) == 1


# -- replication harness ------------------------------------------------------

def test_rows_cover_grid_and_are_positive():
    cfg = small_cfg()
    res = run_rates(cfg)
    assert [(r.n, r.rep) for r in res.rows] == [(n, k) for n in cfg.n_grid for k in range(4)]
    assert all(r.error >= 0 for r in res.rows)
    assert [r.n for r in res.per_n] == list(cfg.n_grid)
    for s in res.per_n:
        assert s.median <= s.q95 and s.stderr >= 0
    assert res.nonconverged == 0


def test_seeds_distinct_across_cells():
    rows = collect_rows(small_cfg())
    assert len({r.seed for r in rows}) == len(rows)


def test_execution_order_does_not_matter():
    cfg = small_cfg()
    jobs = [(n, k) for n in cfg.n_grid for k in range(cfg.replications)]
    random.Random(1).shuffle(jobs)
    shuffled = sorted((_one_fit(cfg, n, k) for n, k in jobs), key=lambda r: (r.n, r.rep))
    assert shuffled == collect_rows(cfg)
    assert summarise(shuffled) == summarise(collect_rows(cfg))


def test_process_pool_matches_serial():
    cfg = small_cfg()
    assert collect_rows(cfg, threads=2) == collect_rows(cfg, threads=1)


def test_seed_changes_results():
    a = collect_rows(small_cfg())
    b = collect_rows(small_cfg(master_seed=4))
    assert [r.error for r in a] != [r.error for r in b]


def test_rate_result_from_rows():
    cfg = small_cfg()
    rows = collect_rows(cfg)
    res = rate_result(cfg, rows)
    assert res.slope == pytest.approx(fit_loglog_slope([(s.n, s.mean) for s in res.per_n])[0])
    assert res.q95_median_ratio >= 1.0


def test_huber_matches_squared_under_gaussian_noise():
    cfg = small_cfg(n_grid=(128, 256, 512), replications=20)
    cmp = run_huber_vs_squared(cfg.with_loss(LossSpec(LossKind.HUBER, 3.0)), cfg)
    assert np.allclose(cmp.median_ratio, 1.0, atol=0.05)
    assert cmp.n == cfg.n_grid


def test_huber_vs_squared_checks_pair():
    cfg = small_cfg()
    with pytest.raises(ValueError):
        run_huber_vs_squared(cfg, cfg)
    with pytest.raises(ValueError):
        run_huber_vs_squared(cfg.with_loss(LossSpec(LossKind.HUBER, 3.0)), cfg.with_seed(9))
