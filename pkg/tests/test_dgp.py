import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from heavyerm.dgp import (
    DgpSpec,
    NoiseSpec,
    Sample,
    generate,
    sample_noise,
    sample_pareto_plus,
    sample_sym_pareto,
    sample_sym_weibull,
    second_moment_sym_pareto,
    semi_pareto_marginals,
    semi_pareto_path,
    stationary_draws,
    weibull_scale,
)
from heavyerm.rng import stream
from oracles import pareto_plus_cdf, sym_pareto_second_moment_quad


def gspec(d=2, a=0.0, **kw):
    return DgpSpec("GaussianAR", d, (0.0,) * d, 1.0, dependence=a, **kw)


# -- sample_pareto_plus -------------------------------------------------------

def test_pareto_plus_median():
    assert sample_pareto_plus(0.5, 3.0, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_pareto_plus_upper_uniform_goes_to_zero():
    vals = [sample_pareto_plus(1 - 10.0**-k, 3.0, 1.0) for k in range(2, 12)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-3


def test_pareto_plus_worked_value():
    assert sample_pareto_plus(0.2, 3.0, 2.0) == pytest.approx(4 ** (1 / 3) / 2, rel=1e-14)
    assert sample_pareto_plus(0.2, 3.0, 2.0) == pytest.approx(0.79370, abs=5e-6)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
def test_pareto_plus_rejects_bad_uniform(u):
    with pytest.raises(ValueError):
        sample_pareto_plus(u, 3.0, 1.0)


@given(st.floats(1e-6, 1 - 1e-6), st.floats(0.5, 8), st.floats(0.1, 10))
def test_pareto_plus_inverts_survival(u, eta, d):
    x = sample_pareto_plus(u, eta, d)
    assert 1.0 / (1.0 + (d * x) ** eta) == pytest.approx(u, rel=1e-9)


@pytest.mark.parametrize("eta", [2.5, 4.0])
@pytest.mark.parametrize("d", [0.5, 2.0])
def test_pareto_plus_ks(eta, d):
    u = stream(11).random(20_000)
    u = u[(u > 0)]
    x = sample_pareto_plus(u, eta, d)
    assert stats.kstest(x, lambda t: pareto_plus_cdf(t, eta, d)).pvalue > 0.01


# -- sym-Weibull --------------------------------------------------------------

def test_sym_weibull_unit_variance():
    w = sample_sym_weibull(1.0, 1.0, stream(1), 10**6)
    assert 0.99 <= np.var(w) <= 1.01


@pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
def test_sym_weibull_mean_zero(eta):
    w = sample_sym_weibull(eta, 1.0, stream(2), 10**6)
    assert -0.01 <= w.mean() <= 0.01


def test_sym_weibull_tail_below_subweibull_envelope():
    sd = 1.0
    k = weibull_scale(2.0, sd)
    w = sample_sym_weibull(2.0, sd, stream(3), 10**6)
    emp = np.mean(np.abs(w) > 3 * sd)
    assert emp < 2 * math.exp(-((3 * sd / k) ** 2))
    # the survival is exactly exp(-(t/K)^eta); check it within MC error too
    p = math.exp(-((3 * sd / k) ** 2))
    assert abs(emp - p) < 4 * math.sqrt(p / 10**6)


@given(st.floats(0.3, 5), st.floats(0.1, 10))
def test_weibull_scale_gives_target_sd(eta, sd):
    from scipy.special import gamma

    k = weibull_scale(eta, sd)
    assert k * math.sqrt(gamma(1 + 2 / eta)) == pytest.approx(sd, rel=1e-12)


def test_sym_weibull_scalar_draw():
    v = sample_sym_weibull(1.5, 2.0, stream(4))
    assert np.ndim(v) == 0


@pytest.mark.parametrize("bad", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
def test_sym_weibull_validates(bad):
    with pytest.raises(ValueError):
        sample_sym_weibull(*bad, stream(0))


# -- second moment ------------------------------------------------------------

def test_second_moment_eta3():
    assert second_moment_sym_pareto(3.0, 1.0) == pytest.approx(4 * math.pi / (3 * math.sqrt(3)), rel=1e-14)
    assert second_moment_sym_pareto(3.0, 1.0) == pytest.approx(2.4184, abs=5e-5)


@pytest.mark.parametrize("eta,s", [(3.0, 1.0), (4.0, 2.0), (2.5, 0.7), (6.0, 3.0)])
def test_second_moment_matches_quadrature(eta, s):
    assert second_moment_sym_pareto(eta, s) == pytest.approx(sym_pareto_second_moment_quad(eta, s), abs=1e-10)


@given(st.floats(2.1, 10), st.floats(0.05, 20))
def test_second_moment_scaling(eta, s):
    assert second_moment_sym_pareto(eta, s) == pytest.approx(second_moment_sym_pareto(eta, 1.0) / s**2, rel=1e-12)


@pytest.mark.parametrize("eta", [2.0, 1.5])
def test_second_moment_rejects_infinite(eta):
    with pytest.raises(ValueError):
        second_moment_sym_pareto(eta, 1.0)


def test_sym_pareto_survival():
    x = sample_sym_pareto(3.0, 1.0, stream(5), 10**6)
    assert 0.245 <= np.mean(x > 1.0) <= 0.255


# -- specs --------------------------------------------------------------------

@pytest.mark.parametrize(
    "kw",
    [
        dict(dependence=1.0),
        dict(dependence=-0.1),
        dict(tail=0.0),
        dict(theta_star=(2.0, 0.0)),
        dict(pareto_scales=(1.0, 0.0)),
        dict(pareto_scales=(1.0,)),
        dict(d=0, theta_star=()),
        dict(kind="SemiParetoAR", tail=2.0),
    ],
)
def test_spec_invariants(kw):
    base = dict(kind="GaussianAR", d=2, theta_star=(0.5, 0.0), R=1.0)
    base.update(kw)
    with pytest.raises(ValueError):
        DgpSpec(**base)


@pytest.mark.parametrize("kw", [dict(scale=0.0), dict(kind="PolyTail", tail=2.0), dict(tail=-1.0)])
def test_noise_invariants(kw):
    with pytest.raises(ValueError):
        NoiseSpec(**kw)


def test_sample_shape_checked():
    spec = gspec()
    with pytest.raises(ValueError):
        Sample(np.zeros((3, 2)), np.zeros(4), spec, 0, 3)


# -- generate -----------------------------------------------------------------

def test_generate_rejects_empty():
    with pytest.raises(ValueError):
        generate(gspec(), 0, 1)


@pytest.mark.parametrize("kind", ["GaussianAR", "SubWeibullAR", "SemiParetoAR"])
def test_generate_deterministic(kind):
    spec = DgpSpec(kind, 3, (0.1, 0.2, 0.3), 1.0, dependence=0.4, tail=3.0,
                   noise=NoiseSpec("PolyTail", 1.0, 3.0))
    a, b = generate(spec, 100, 42), generate(spec, 100, 42)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    c = generate(spec, 100, 43)
    assert not np.array_equal(a.x, c.x)
    assert a.x.shape == (100, 3) and a.seed == 42 and a.n == 100


def test_sample_is_read_only():
    s = generate(gspec(), 10, 0)
    with pytest.raises(ValueError):
        s.x[0, 0] = 1.0


def test_gaussian_iid_marginal_variance():
    s = generate(gspec(d=2), 10**6, 7)
    var = s.x.var(axis=0)
    assert np.all(np.abs(var - 1.0) < 0.02)
    assert stats.kstest(s.x[:20_000, 0], "norm").pvalue > 0.01


def test_gaussian_ar_stationary_from_the_start():
    spec = gspec(d=1, a=0.9)
    first = np.array([generate(spec, 1, k).x[0, 0] for k in range(4000)])
    assert np.var(first) == pytest.approx(1 / (1 - 0.81), rel=0.1)


def test_gaussian_ar_lag_one_correlation():
    x = generate(gspec(d=1, a=0.5), 200_000, 1).x[:, 0]
    assert np.corrcoef(x[:-1], x[1:])[0, 1] == pytest.approx(0.5, abs=0.01)


def test_response_is_linear_plus_noise():
    spec = DgpSpec("GaussianAR", 2, (0.5, -0.25), 1.0, noise=NoiseSpec("Gaussian", 0.5))
    s = generate(spec, 100_000, 3)
    resid = s.y - s.x @ spec.theta
    assert np.std(resid) == pytest.approx(0.5, rel=0.02)
    assert abs(np.corrcoef(resid, s.x[:, 0])[0, 1]) < 0.02


def test_semi_pareto_survival_at_one():
    spec = DgpSpec("SemiParetoAR", 1, (0.0,), 1.0, tail=3.0)
    x = generate(spec, 10**6, 5).x[:, 0]
    assert 0.245 <= np.mean(x > 1.0) <= 0.255


def test_semi_pareto_coordinates_uncorrelated():
    spec = DgpSpec("SemiParetoAR", 2, (0.0, 0.0), 1.0, tail=5.0)
    x = generate(spec, 200_000, 6).x
    assert abs(np.corrcoef(x.T)[0, 1]) < 0.02


@pytest.mark.parametrize("kind,tail", [("SemiParetoAR", 3.0), ("SubWeibullAR", 1.0)])
def test_generated_inputs_symmetric(kind, tail):
    spec = DgpSpec(kind, 1, (0.0,), 1.0, dependence=0.3, tail=tail)
    x = generate(spec, 200_000, 8).x[:, 0]
    # sample skewness has unbounded MC error for eta3 = 3, so compare the two
    # tails at the 90% quantile of |X|; the slack doubles the iid SE for serial correlation
    q = np.quantile(np.abs(x), 0.9)
    up, down = np.mean(x > q), np.mean(x < -q)
    assert abs(up - down) < 2 * 4 * math.sqrt(0.1 / x.size)


def test_semi_pareto_path_matches_loop():
    rng = np.random.default_rng(0)
    eta = 3.0
    k = 2 ** (1 / eta)
    coins = rng.integers(0, 2, 700).astype(bool)
    deltas = rng.pareto(3.0, 700) + 0.01
    x0 = 0.7
    ref = [x0]
    for c, dl in zip(coins, deltas):
        nxt = k * ref[-1]
        ref.append(min(nxt, dl) if c else nxt)
    out = semi_pareto_path(np.array(x0), coins, deltas, eta)
    assert np.allclose(out, ref, rtol=1e-10)


def test_semi_pareto_marginal_stationary_quick():
    m = semi_pareto_marginals(3.0, 1.0, [0, 50], 20_000, stream(9))
    assert stats.ks_2samp(m[0], m[1]).pvalue > 0.01
    assert stats.kstest(np.abs(m[1]), lambda t: pareto_plus_cdf(t, 3.0, 1.0)).pvalue > 0.01


@pytest.mark.parametrize("kind,tail", [("GaussianAR", 1.0), ("SubWeibullAR", 1.0), ("SemiParetoAR", 5.0)])
def test_stationary_draws_match_path_marginal(kind, tail):
    spec = DgpSpec(kind, 1, (0.0,), 1.0, dependence=0.5, tail=tail)
    iid = stationary_draws(spec, 20_000, stream(10))[:, 0]
    path = generate(spec, 100_000, 11).x[::5, 0]
    assert stats.ks_2samp(iid, path).pvalue > 0.01


def test_polytail_noise_survival():
    z = sample_noise(NoiseSpec("PolyTail", 2.0, 3.0), stream(12), 10**6)
    # |z| / scale has survival 1 / (1 + t^3); at t = 1 that is 1/2
    assert np.mean(np.abs(z) > 2.0) == pytest.approx(0.5, abs=0.003)
