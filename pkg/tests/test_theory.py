import json
import math
from dataclasses import dataclass

import numpy as np
import pytest
from scipy import integrate

from slab_eb.exceptions import DomainError
from slab_eb.posterior import SasModel, threshold_zeta
from slab_eb.slabs import MarginalDensity, MarginalEval, cauchy, laplace, quasi_cauchy
from slab_eb.ssl import SslModel
from slab_eb.theory import (
    m1,
    m2,
    m_tilde,
    monte_carlo_moments,
    rate_quantities,
    score_summand,
    signal_fraction,
    solve_alpha1,
    verify_lemmas,
)

LAP = SasModel(10**4, laplace(1.0))
CAU = SasModel(10**4, cauchy(1.0))


@dataclass(frozen=True)
class ScaledMarginal(MarginalDensity):
    """Deliberately wrong marginal: g multiplied by 1.5."""

    def evaluate(self, x):
        ev = super().evaluate(x)
        return MarginalEval(ev.log_ratio + math.log(1.5), ev.dlog, ev.d2)


def direct_m_tilde(model, alpha):
    # -2 int_0^inf beta(z)/(1 + alpha beta(z)) phi(z) dz, no rearrangement
    def f(z):
        b = math.expm1(min(float(model.md.log_ratio(z)), 700.0))
        return b / (1 + alpha * b) * math.exp(-z * z / 2) / math.sqrt(2 * math.pi)

    z = threshold_zeta(model, alpha)
    parts = [(0, z), (z, z + 10), (z + 10, 60)]
    return -2 * sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=400)[0] for a, b in parts)


class TestScoreMoments:
    @pytest.mark.parametrize("model", [LAP, CAU, SasModel(100, quasi_cauchy())], ids=["lap", "cauchy", "qc"])
    @pytest.mark.parametrize("alpha", [0.3, 0.05, 1e-3])
    def test_m_tilde_two_routes(self, model, alpha):
        assert m_tilde(model, alpha) == pytest.approx(direct_m_tilde(model, alpha), rel=1e-8)

    @pytest.mark.parametrize("model", [LAP, CAU], ids=["lap", "cauchy"])
    def test_m1_at_zero_is_minus_m_tilde(self, model):
        for alpha in (1e-5, 1e-3, 0.1, 0.7):
            assert m1(model, 0.0, alpha) == pytest.approx(-m_tilde(model, alpha), rel=1e-8)

    def test_m_tilde_positive_increasing(self):
        for model in (LAP, CAU):
            vals = [m_tilde(model, a) for a in (1e-6, 1e-4, 0.01, 0.1, 0.5)]
            assert vals[0] > 0 and np.all(np.diff(vals) > 0)
            # alpha m_tilde(alpha) is increasing too (the calibration map)
            al = np.array([1e-6, 1e-4, 0.01, 0.1, 0.5])
            assert np.all(np.diff(al * vals) > 0)

    def test_cauchy_m_tilde_order(self):
        # m_tilde(alpha) / (zeta g(zeta)) stays in a fixed band as alpha -> 0
        ratios = []
        for a in (1e-6, 1e-5, 1e-4, 1e-3, 1e-2):
            z = threshold_zeta(CAU, a)
            ratios.append(m_tilde(CAU, a) / (z * float(CAU.md.g(z))))
        # band estimated at alpha = 1e-2 and widened by a factor of 1.5
        d1, d2 = ratios[-1] / 1.5, ratios[-1] * 1.5
        assert all(d1 <= r <= d2 for r in ratios)

    def test_m1_at_zeta_small_alpha(self):
        for model in (LAP, CAU):
            alpha = 1e-4
            z = threshold_zeta(model, alpha)
            assert 2 * alpha * m1(model, z, alpha) == pytest.approx(1.0, rel=0.1)

    def test_m1_decreasing_in_alpha(self):
        for mu in (0.0, 2.0, 5.0):
            vals = [m1(CAU, mu, a) for a in (1e-4, 1e-2, 0.3, 0.9)]
            assert np.all(np.diff(vals) < 0)

    def test_moment_bounds(self):
        beta0 = float(CAU.md.beta(0.0))
        c1 = (1 + beta0) / abs(beta0)
        for alpha in (1e-3, 0.1, 0.5):
            bound = 1 / min(alpha, c1)
            for mu in (0.0, 2.0, 5.0):
                assert abs(m1(CAU, mu, alpha)) <= bound
                assert math.sqrt(m2(CAU, mu, alpha)) <= bound
                assert m2(CAU, mu, alpha) >= m1(CAU, mu, alpha) ** 2

    def test_small_monte_carlo(self):
        (mc1, se1), (mc2, se2) = monte_carlo_moments(CAU, 2.0, 0.01, draws=10**6, seed=1)
        assert abs(m1(CAU, 2.0, 0.01) - mc1) <= 4 * se1
        assert abs(m2(CAU, 2.0, 0.01) - mc2) <= 4 * se2

    def test_score_summand_saturates(self):
        assert float(score_summand(CAU, 1e3, 0.01)) == pytest.approx(100.0)
        assert float(score_summand(LAP, 0.0, 0.5)) < 0

    def test_domain(self):
        with pytest.raises(DomainError):
            m_tilde(LAP, 0.0)
        with pytest.raises(DomainError):
            m1(LAP, 0.0, 1.5)

    def test_ssl_moments(self):
        m = SslModel(1000)
        mt = m_tilde(m, 0.05)
        assert mt > 0
        assert m1(m, 0.0, 0.05) == pytest.approx(-mt, rel=1e-8)


class TestCalibration:
    def test_rates(self):
        r_n, R_n = rate_quantities(10**4, 10)
        assert R_n == pytest.approx(6.0, abs=0.5)
        assert r_n == pytest.approx(20 * math.log(1000), rel=1e-15)
        r_n, R_n = rate_quantities(10**7, 10)
        assert r_n == 20 * math.log(10**6)
        assert R_n == pytest.approx(13.9, abs=0.2)
        with pytest.raises(DomainError):
            rate_quantities(10, 10)

    @pytest.mark.parametrize("model", [LAP, CAU], ids=["lap", "cauchy"])
    def test_alpha1_residual_and_monotone(self, model):
        prev = 0.0
        for s in (1, 10, 100, 1000):
            rq = solve_alpha1(model, 10**5, s, d=1.0)
            eta = s / 1e5
            assert rq.d * rq.alpha1 * m_tilde(model, rq.alpha1) == pytest.approx(eta, rel=1e-10)
            assert rq.alpha1 > prev
            prev = rq.alpha1
            assert float(model.md.beta(rq.zeta1)) * rq.alpha1 == pytest.approx(1.0, rel=1e-9)

    def test_d_four_gives_smaller_alpha(self):
        a1 = solve_alpha1(CAU, 10**6, 10, 1.0).alpha1
        a4 = solve_alpha1(CAU, 10**6, 10, 4.0).alpha1
        assert a4 < a1

    def test_zeta1_sandwich(self):
        # c1, c2 from the smallest grid point, widened by one; the rest must fit
        grid = [(10**4, 10), (10**5, 10), (10**6, 10), (10**7, 10), (10**8, 10)]
        lows, highs = [], []
        for n, s in grid:
            z = solve_alpha1(CAU, n, s).zeta1
            lows.append(z * z / 2 - math.log(n / s))
            highs.append(z * z / 2 - math.log(n / s) - 0.5 * math.log(math.log(n)))
        c1, c2 = lows[0] - 1, highs[0] + 1
        assert all(lo >= c1 for lo in lows) and all(hi <= c2 for hi in highs)

    def test_unattainable_eta(self):
        with pytest.raises(DomainError):
            solve_alpha1(LAP, 10, 10, d=1e-6)

    def test_signal_fraction(self):
        assert signal_fraction(np.zeros(10), 1.0) == 0
        theta = np.zeros(100)
        theta[:7] = 4.0
        assert signal_fraction(theta, 3.0) == 0.07
        assert signal_fraction([3, -3, 0, 0], 3) == 0.5
        with pytest.raises(DomainError):
            signal_fraction(theta, -1)


class TestVerify:
    def test_laplace_all_pass(self):
        seen = []
        report = verify_lemmas(LAP, report_sink=seen.append)
        assert report.passed, report.format_text()
        assert len(seen) == len(report.checks)
        names = {c.name for c in report.checks}
        assert "sandwich a(x) bounds" in names
        doc = json.loads(report.to_json())
        assert doc["passed"] and len(doc["checks"]) == len(report.checks)

    def test_fault_injection_is_caught(self):
        bad = SasModel(10**4, laplace(1.0), ScaledMarginal(laplace(1.0)))
        report = verify_lemmas(bad)
        assert not report.passed
        failed = {c.name for c in report.failures()}
        assert "sandwich a(x) bounds" in failed
        text = report.format_text()
        assert "[FAIL] sandwich" in text and "at {" in text
