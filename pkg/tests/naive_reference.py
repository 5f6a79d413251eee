"""Deliberately naive reference pipeline for the risk harness.

Every per-coordinate quantity is recomputed by direct quadrature against
the slab density, and every root is found by plain bisection. Nothing from
the package's marginal, posterior or fitting code is used; only the data
generator is shared so both pipelines see the same observations.
"""
import math
import warnings

import numpy as np
from scipy import integrate, special

SQRT_2PI = math.sqrt(2.0 * math.pi)


def slab_density(family, param):
    if family == "laplace":
        return lambda u: 0.5 * param * math.exp(-param * abs(u))
    if family == "cauchy":
        return lambda u: param / (math.pi * (1.0 + (param * u) ** 2))

    def quasi(u):
        # (2 pi)^-1/2 (1 - |u| Phibar(|u|) / phi(|u|))
        u = abs(u)
        mills = math.sqrt(math.pi / 2.0) * special.erfcx(u / math.sqrt(2.0))
        return (1.0 - u * mills) / SQRT_2PI

    return quasi


def phi(z):
    return math.exp(-0.5 * z * z) / SQRT_2PI


def _quad(f, a, b, pts):
    pts = sorted(p for p in set(pts) if a < p < b)
    with warnings.catch_warnings():
        # roundoff warnings at this tolerance are harmless here
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, a, b, points=pts or None, epsabs=0.0, epsrel=1e-12,
                                limit=400)
    return val


class NaiveSas:
    def __init__(self, family, param, n):
        self.dens = slab_density(family, param)
        self.n = n

    def part(self, x, lo, hi, weight=lambda u: 1.0):
        """int_lo^hi weight(u) phi(x - u) gamma(u) du, clipped to x +- 40."""
        a, b = max(lo, x - 40.0), min(hi, x + 40.0)
        if b <= a:
            return 0.0
        return _quad(lambda u: weight(u) * phi(x - u) * self.dens(u), a, b, (0.0, x))

    def g(self, x):
        return self.part(x, -np.inf, np.inf)

    def beta(self, x):
        return self.g(x) / phi(x) - 1.0

    def alpha_lower(self):
        """Bisection for the alpha at which the median threshold is sqrt(2 log n)."""
        x = math.sqrt(2.0 * math.log(self.n))
        g = self.g(x)
        g_pos = self.part(x, 0.0, np.inf)

        def excess(alpha):
            # P(theta > 0 | x) - 1/2 under the mixture posterior
            return alpha * g_pos / ((1.0 - alpha) * phi(x) + alpha * g) - 0.5

        lo, hi = 1e-300, 1.0
        for _ in range(2000):
            mid = math.sqrt(lo * hi) if hi / lo > 4 else 0.5 * (lo + hi)
            if excess(mid) > 0:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-15 * hi:
                break
        return 0.5 * (lo + hi)

    def alpha_hat(self, betas):
        lower = self.alpha_lower()
        score = lambda a: sum(b / (1.0 + a * b) for b in betas)
        if score(lower) <= 0:
            return lower
        top = 1.0 - 1e-15
        if score(top) >= 0:
            return 1.0
        lo, hi = lower, top
        while hi - lo > 1e-15 * hi:
            mid = 0.5 * (lo + hi)
            if score(mid) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def coordinate_risks(self, alpha, x, theta):
        g = self.g(x)
        a = alpha * g / ((1.0 - alpha) * phi(x) + alpha * g)
        second = self.part(x, -np.inf, np.inf, lambda u: (u - theta) ** 2) / g
        r2 = (1.0 - a) * theta**2 + a * second
        mean = a * self.part(x, -np.inf, np.inf, lambda u: u) / g
        med = self.median(a, g, x)
        return r2, (mean - theta) ** 2, (med - theta) ** 2

    def median(self, a, g, x):
        cdf_slab = lambda m: self.part(x, -np.inf, m) / g
        below0 = a * cdf_slab(0.0)
        if below0 >= 0.5:
            target, lo, hi = 0.5, x - 40.0, 0.0
            f = lambda m: a * cdf_slab(m)
        elif below0 + (1.0 - a) >= 0.5:
            return 0.0
        else:
            lo, hi = 0.0, x + 40.0
            f = lambda m: (1.0 - a) + a * cdf_slab(m)
            target = 0.5
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid) < target:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13:
                break
        return 0.5 * (lo + hi)


def naive_risks(family, param, theta, x):
    """Return (alpha_hat, R2, Rmean, Rmedian) for one data set."""
    model = NaiveSas(family, param, len(x))
    betas = [model.beta(float(v)) for v in x]
    alpha = model.alpha_hat(betas)
    totals = np.zeros(3)
    for xi, ti in zip(x, theta):
        totals += model.coordinate_risks(alpha, float(xi), float(ti))
    return (alpha,) + tuple(float(v) for v in totals)
