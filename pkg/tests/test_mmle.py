import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grid_oracle import grid_argmax
from slab_eb.exceptions import DomainError
from slab_eb.mmle import (
    alpha_lower,
    fit_from_beta,
    fit_mmle,
    fit_modified,
    log_marginal,
    modify_fit,
    score,
    score_from_beta,
)
from slab_eb.posterior import SasModel, threshold_t, threshold_t_inverse, threshold_zeta
from slab_eb.slabs import cauchy, laplace, quasi_cauchy


def _data(n, s, signal, seed):
    rng = np.random.default_rng(seed)
    theta = np.zeros(n)
    theta[:s] = signal * rng.choice([-1, 1], size=s)
    return theta + rng.standard_normal(n)


def test_log_marginal_endpoints():
    model = SasModel(5, laplace(1.0))
    x = np.array([-1.0, 0.0, 0.5, 2.0, 4.0])
    logphi = -0.5 * x**2 - 0.5 * math.log(2 * math.pi)
    assert log_marginal(model, 0.0, x) == pytest.approx(logphi.sum(), rel=1e-15)
    assert log_marginal(model, 1.0, x) == pytest.approx(np.log(model.md.g(x)).sum(), rel=1e-14)


def test_log_marginal_direct_sum():
    model = SasModel(3, laplace(1.0))
    x = np.array([0.0, 1.0, 2.0])
    phi = np.exp(-0.5 * x**2) / math.sqrt(2 * math.pi)
    direct = np.sum(np.log(0.5 * phi + 0.5 * model.md.g(x)))
    assert log_marginal(model, 0.5, x) == pytest.approx(direct, rel=1e-12)


def test_score_is_derivative_and_decreasing():
    model = SasModel(200, cauchy(1.0))
    x = _data(200, 10, 4.0, 3)
    h = 1e-6
    for alpha in (0.01, 0.1, 0.4):
        fd = (log_marginal(model, alpha + h, x) - log_marginal(model, alpha - h, x)) / (2 * h)
        assert score(model, alpha, x) == pytest.approx(fd, rel=1e-5, abs=1e-5)
    grid = np.linspace(0.01, 0.99, 50)
    s = [score(model, a, x) for a in grid]
    assert np.all(np.diff(s) < 0)


def test_score_single_datum_at_zeta():
    model = SasModel(10, laplace(1.0))
    alpha = 0.05
    z = threshold_zeta(model, alpha)
    # beta(zeta) = 1/alpha, so the summand equals 1/(2 alpha)
    assert score_from_beta(model.md.beta(np.array([z])), alpha) == pytest.approx(0.5 / alpha, rel=1e-9)


def test_score_from_beta_edge_values():
    assert score_from_beta(np.array([np.inf, 1.0]), 0.5) == pytest.approx(2 + 1 / 1.5)
    assert score_from_beta(np.array([-0.5, 2.0]), 0.0) == pytest.approx(1.5)


def test_alpha_checks():
    model = SasModel(3, laplace(1.0))
    with pytest.raises(DomainError):
        log_marginal(model, 1.2, np.zeros(3))
    with pytest.raises(DomainError):
        score(model, -0.1, np.zeros(3))
    with pytest.raises(DomainError):
        fit_mmle(model, np.zeros(4))


@pytest.mark.parametrize("slab", [laplace(1.0), cauchy(1.0), quasi_cauchy()], ids=str)
def test_lower_bound_round_trip(slab):
    for n in (100, 1000, 10**6):
        model = SasModel(n, slab)
        lower = alpha_lower(model)
        assert abs(threshold_t(model, lower) - math.sqrt(2 * math.log(n))) <= 1e-8


@pytest.mark.parametrize("slab", [laplace(1.0), cauchy(1.0)], ids=str)
def test_zero_data_sits_on_the_lower_boundary(slab):
    model = SasModel(5000, slab)
    fit = fit_mmle(model, np.zeros(5000))
    assert fit.alpha_hat == alpha_lower(model)
    assert fit.at_lower_boundary and not fit.at_upper_boundary


def test_strong_signal_reaches_the_upper_end():
    model = SasModel(50, cauchy(1.0))
    fit = fit_mmle(model, np.full(50, 30.0))
    assert fit.alpha_hat == 1.0 and fit.at_upper_boundary
    assert fit.t_hat == 0.0


def test_dense_signal_is_interior_and_large():
    model = SasModel(1000, laplace(1.0))
    x = _data(1000, 100, 6.0, 5)
    fit = fit_mmle(model, x)
    assert not (fit.at_lower_boundary or fit.at_upper_boundary)
    assert fit.alpha_hat > 10 * fit.alpha_lower
    assert abs(fit.score_at_solution) < 1e-6 * 1000


@pytest.mark.parametrize("seed", range(8))
def test_matches_likelihood_grid_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    slab = [laplace(1.0), cauchy(1.0)][seed % 2]
    model = SasModel(1000, slab)
    x = _data(1000, int(rng.integers(0, 300)), float(rng.uniform(2, 7)), seed)
    fit = fit_mmle(model, x)
    coarse, polished, grid = grid_argmax(model.md.log_ratio(x), fit.alpha_lower)
    assert polished == pytest.approx(fit.alpha_hat, rel=1e-4)
    # the raw grid maximiser is one of the grid neighbours of alpha_hat
    step = grid[1] / grid[0]
    assert fit.alpha_hat / step <= coarse <= fit.alpha_hat * step
    assert log_marginal(model, fit.alpha_hat, x) >= log_marginal(model, coarse, x) - 1e-9


def test_fit_is_deterministic():
    model = SasModel(2000, cauchy(1.0))
    x = _data(2000, 40, 5.0, 11)
    a, b = fit_mmle(model, x), fit_mmle(model, x.copy())
    assert a == b


def test_fit_from_beta_with_precomputed_lower():
    model = SasModel(300, laplace(2.0))
    x = _data(300, 20, 4.0, 2)
    beta = model.md.beta(x)
    assert fit_from_beta(model, beta, alpha_lower(model)) == fit_mmle(model, x)


def _mp_alpha_beta(slab, t):
    """``(1/(1 + D(t)), g/phi(t) - 1)`` by 40-digit quadrature."""
    mp.mp.dps = 40
    if slab.family == "laplace":
        dens = lambda u: slab.param / 2 * mp.exp(-slab.param * abs(u))
    else:
        dens = lambda u: 1 / (mp.pi * slab.param * (1 + (u / slab.param) ** 2))
    t = mp.mpf(t)
    # g/phi(t) = int exp(t u - u^2/2) gamma(u) du, split by the sign of u
    w = lambda u: mp.exp(t * u - u * u / 2) * dens(u)
    plus = mp.quad(w, [0, t, t + 40])
    minus = mp.quad(w, [-40, 0])
    return 1 / (1 + plus - minus), plus + minus - 1


class TestModified:
    def test_not_triggered_keeps_alpha_hat(self):
        model = SasModel(10**4, laplace(1.0))
        x = _data(10**4, 500, 6.0, 1)
        fit = fit_modified(model, x, 1.0)
        assert not fit.modified.triggered
        assert fit.alpha == fit.alpha_hat
        assert fit.t_hat <= fit.modified.t_n

    def test_triggered_switches_to_alpha_A(self):
        model = SasModel(10**4, laplace(1.0))
        fit = fit_modified(model, np.zeros(10**4), 0.5)
        m = fit.modified
        assert m.triggered
        assert fit.alpha == m.alpha_A
        assert m.t_A == pytest.approx(math.sqrt(3 * math.log(1e4)), rel=1e-15)
        assert m.alpha_A == threshold_t_inverse(model, m.t_A)
        assert m.t_n == pytest.approx(math.sqrt(2 * math.log(1e4) - 5 * math.log(math.log(1e4))))

    @pytest.mark.parametrize("A", [0.0, 0.5, 1.0, 2.0])
    @pytest.mark.parametrize("n", [10**3, 10**5, 10**7])
    def test_alpha_A_below_inverse_beta(self, A, n):
        for slab in (laplace(1.0), cauchy(1.0)):
            model = SasModel(n, slab)
            fit = modify_fit(model, fit_from_beta(model, np.array([-0.5])), A)
            ta = fit.modified.t_A
            # the float product can round to exactly 1 when 1 - alpha_A beta ~ 1/D
            assert fit.modified.alpha_A * float(model.md.beta(ta)) <= 1
            alpha_mp, beta_mp = _mp_alpha_beta(slab, ta)
            assert fit.modified.alpha_A == pytest.approx(float(alpha_mp), rel=1e-9)
            assert alpha_mp * beta_mp < 1

    def test_errors(self):
        with pytest.raises(DomainError):
            fit_modified(SasModel(2, laplace(1.0)), np.zeros(2), 1.0)
        with pytest.raises(DomainError):
            fit_modified(SasModel(10, laplace(1.0)), np.zeros(10), -1.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=-12, max_value=12), min_size=5, max_size=40))
def test_fit_stays_in_range_and_is_a_maximum(values):
    x = np.array(values)
    model = SasModel(len(x), cauchy(1.0))
    fit = fit_mmle(model, x)
    assert fit.alpha_lower <= fit.alpha_hat <= 1
    ll = log_marginal(model, fit.alpha_hat, x)
    for a in np.linspace(fit.alpha_lower, 1, 17):
        assert ll >= log_marginal(model, float(a), x) - 1e-9 * max(1.0, abs(ll))
