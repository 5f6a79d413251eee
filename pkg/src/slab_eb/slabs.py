"""Slab densities and their Gaussian convolutions.

A slab is the continuous part G of the spike-and-slab prior. For the sparse
normal-means model the marginal density of an observation drawn from the
slab is ``g = phi * gamma``; the posterior only ever needs ``g`` through

* ``log(g / phi)`` (the likelihood ratio, from which ``beta = g/phi - 1``),
* ``g'/g`` and ``g''/g`` (posterior mean and second moment),
* the split of ``g`` into its ``u > 0`` and ``u < 0`` parts (posterior median).

Two backends compute these. ``"closed"`` uses exact formulas: Laplace through
the Mills ratio, Cauchy through the Faddeeva function (the Voigt profile),
quasi-Cauchy through its elementary marginal. ``"quad"`` integrates the slab
density against the Gaussian kernel and is the independent reference.

Quasi-Cauchy slab
-----------------
The quasi-Cauchy prior is the scale mixture ``theta | w ~ N(0, 1/w - 1)``
with ``w ~ Beta(1/2, 1)``. Then ``X | w ~ N(0, 1/w)`` and

    g(x) = 1/2 int_0^1 phi(x sqrt(w)) dw = (2 pi)^(-1/2) (1 - exp(-x^2/2)) / x^2,

while the prior density itself is

    gamma(u) = (2 pi)^(-1/2) (1 - |u| M(|u|)),

with M the Mills ratio. Its tails decay like ``u**-2`` (Cauchy-like). The
tests check the closed-form ``g`` against quadrature of this ``gamma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special as sc

from . import special as sp
from ._kernels import laplace_evaluate
from .exceptions import ConfigurationError
from .quadrature import DEFAULT_RTOL, GAUSS_HALF_WIDTH, integrate_1d


LAPLACE = "laplace"
CAUCHY = "cauchy"
QUASI_CAUCHY = "quasicauchy"
FAMILIES = (LAPLACE, CAUCHY, QUASI_CAUCHY)

_FAMILY_ALIASES = {
    "lap": LAPLACE,
    "laplace": LAPLACE,
    "cauchy": CAUCHY,
    "quasicauchy": QUASI_CAUCHY,
    "quasi-cauchy": QUASI_CAUCHY,
    "qc": QUASI_CAUCHY,
}
_SHORT_NAMES = {LAPLACE: "lap", CAUCHY: "cauchy", QUASI_CAUCHY: "quasicauchy"}

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _phi(z):
    return math.exp(-0.5 * z * z) * _INV_SQRT_2PI


# Taylor coefficients of h(y) = (1 - exp(-y)) / y, used for small |x| by the
# quasi-Cauchy marginal.
_QC_TERMS = 25
_QC_COEF = np.array([(-1.0) ** k / math.factorial(k + 1) for k in range(_QC_TERMS)])
_QC_SERIES_Y = 0.5


@dataclass(frozen=True)
class SlabSpec:
    """Slab family and parameter.

    ``param`` is the inverse scale: ``a`` for Laplace(a) with density
    ``(a/2) exp(-a|u|)``, ``lam`` for Cauchy(1/lam) with density
    ``(lam/pi) / (1 + lam^2 u^2)``. The quasi-Cauchy slab has no parameter.
    """

    family: str
    param: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown slab family {self.family!r}")
        if self.family == QUASI_CAUCHY:
            if self.param is not None:
                raise ConfigurationError("the quasi-Cauchy slab takes no parameter")
            return
        if self.param is None or not np.isfinite(self.param) or self.param <= 0:
            raise ConfigurationError(
                f"{self.family} slab needs a positive parameter, got {self.param!r}"
            )
        object.__setattr__(self, "param", float(self.param))

    @classmethod
    def parse(cls, text: str) -> "SlabSpec":
        """Parse ``lap:<a>``, ``cauchy:<lambda>`` or ``quasicauchy``."""
        name, _, value = text.strip().lower().partition(":")
        family = _FAMILY_ALIASES.get(name)
        if family is None:
            raise ConfigurationError(f"cannot parse slab specification {text!r}")
        if family == QUASI_CAUCHY:
            if value:
                raise ConfigurationError("the quasi-Cauchy slab takes no parameter")
            return cls(family)
        if not value:
            raise ConfigurationError(f"slab {text!r} is missing its parameter")
        try:
            param = float(value)
        except ValueError as exc:
            raise ConfigurationError(f"bad slab parameter in {text!r}") from exc
        return cls(family, param)

    def __str__(self) -> str:
        if self.param is None:
            return _SHORT_NAMES[self.family]
        return f"{_SHORT_NAMES[self.family]}:{self.param:g}"

    @property
    def kappa(self) -> float:
        """Tail index: ``gamma(y)^-1 int_y^inf gamma ~ y^(kappa-1)``.

        1 for Laplace, 2 for Cauchy; quasi-Cauchy shares the Cauchy tails and
        is assigned 2 as well.
        """
        return 1.0 if self.family == LAPLACE else 2.0

    def density_at(self, u):
        """Scalar density; avoids numpy overhead inside quadrature integrands."""
        au = abs(u)
        if self.family == LAPLACE:
            return 0.5 * self.param * math.exp(-self.param * au)
        if self.family == CAUCHY:
            lam = self.param
            return (lam / math.pi) / (1.0 + (lam * u) ** 2)
        return -_INV_SQRT_2PI * sp.mills_deriv(au)

    def density(self, u):
        u = np.asarray(u, dtype=float)
        au = np.abs(u)
        if self.family == LAPLACE:
            a = self.param
            return 0.5 * a * np.exp(-a * au)
        if self.family == CAUCHY:
            lam = self.param
            return (lam / math.pi) / (1.0 + (lam * u) ** 2)
        return -_INV_SQRT_2PI * sp.mills_deriv(au)


def laplace(a: float = 1.0) -> SlabSpec:
    return SlabSpec(LAPLACE, a)


def cauchy(lam: float = 1.0) -> SlabSpec:
    return SlabSpec(CAUCHY, lam)


def quasi_cauchy() -> SlabSpec:
    return SlabSpec(QUASI_CAUCHY)


class MarginalEval(NamedTuple):
    """``log(g/phi)``, ``g'/g`` and ``g''/g`` at a set of points."""

    log_ratio: np.ndarray
    dlog: np.ndarray
    d2: np.ndarray


def _scalar_out(arr, like):
    return arr[()] if np.ndim(like) == 0 else arr


@dataclass(frozen=True)
class MarginalDensity:
    """The marginal ``g = phi * gamma`` of a slab.

    Immutable; every method is a pure function of its arguments.
    """

    slab: SlabSpec
    backend: str = "closed"
    rtol: float = DEFAULT_RTOL

    def __post_init__(self):
        if self.backend not in ("closed", "quad"):
            raise ConfigurationError(f"unknown backend {self.backend!r}")

    # -- core evaluation ---------------------------------------------------
    def evaluate(self, x) -> MarginalEval:
        x = np.asarray(x, dtype=float)
        if self.backend == "quad":
            return self._quad_evaluate(x)
        fam = self.slab.family
        if fam == LAPLACE:
            out = _laplace_eval(self.slab.param, x)
        elif fam == CAUCHY:
            out = _cauchy_eval(self.slab.param, x)
        else:
            out = _quasi_cauchy_eval(x)
        return MarginalEval(*(_scalar_out(v, x) for v in out))

    def log_ratio(self, x):
        """``log(g/phi)(x)``; stays finite where phi underflows."""
        return self.evaluate(x).log_ratio

    def ratio(self, x):
        return np.exp(self.log_ratio(x))

    def beta(self, x):
        """``beta(x) = g/phi(x) - 1`` (overflows to inf only past |x| ~ 38)."""
        with np.errstate(over="ignore"):
            return np.expm1(self.log_ratio(x))

    def g(self, x):
        x = np.asarray(x, dtype=float)
        if self.backend == "quad":
            return _vec(self._quad_g)(x)
        return np.exp(self.log_ratio(x) + sp.log_std_normal(x))

    def derivs(self, x):
        """``(g, g', g'')`` at ``x``."""
        x = np.asarray(x, dtype=float)
        if self.backend == "quad":
            vals = _vec3(self._quad_derivs)(x)
            return tuple(_scalar_out(v, x) for v in vals)
        ev = self.evaluate(x)
        g = np.exp(ev.log_ratio + sp.log_std_normal(x))
        return g, g * ev.dlog, g * ev.d2

    # -- pieces needed by the posterior median ----------------------------
    def half_difference(self, x):
        """``D(x) = (g_+ - g_-)/phi(x)``, g_+ and g_- the parts of g from u > 0, u < 0.

        Odd and increasing; the posterior median threshold t(alpha) solves
        ``D(t) = (1 - alpha)/alpha``.
        """
        x = np.asarray(x, dtype=float)
        if self.slab.family == LAPLACE and self.backend == "closed":
            a = self.slab.param
            ax = np.abs(x)
            with np.errstate(over="ignore"):
                d = 0.5 * a * (sp.mills(a - ax) - sp.mills(a + ax))
            return np.sign(x) * d
        return _vec(self._quad_half_difference)(x)

    def upper_fraction(self, x):
        """``P(u > 0)`` under the slab posterior ``gamma_x``."""
        x = np.asarray(x, dtype=float)
        if self.slab.family == LAPLACE and self.backend == "closed":
            a = self.slab.param
            return sc.expit(sp.log_mills(a - x) - sp.log_mills(a + x))
        return _vec(self._quad_upper_fraction)(x)

    def posterior_sf(self, x, m):
        """``P(u > m)`` under ``gamma_x(u) = phi(x - u) gamma(u) / g(x)``."""
        x, m = np.broadcast_arrays(np.asarray(x, float), np.asarray(m, float))
        if self.slab.family == LAPLACE and self.backend == "closed":
            return _laplace_sf(self.slab.param, x, m)
        return _vec(self._quad_sf)(x, m)

    def posterior_density(self, x, u):
        x = float(x)
        return sp.std_normal(x - np.asarray(u, float)) * self.slab.density(u) / self.g(x)

    def posterior_moment(self, x, mu, k):
        """``int (u - mu)^k gamma_x(u) du`` by quadrature."""
        x = float(x)
        g = self._quad_g(x)
        f = lambda u: (u - mu) ** k * _phi(x - u) * self.slab.density_at(u)
        lo, hi = x - GAUSS_HALF_WIDTH, x + GAUSS_HALF_WIDTH
        scale = (1.0 + abs(x - mu)) ** k
        return integrate_1d(f, lo, hi, points=(0.0, x, mu), rtol=self.rtol,
                            atol=self.rtol * 1e-3 * g * scale) / g

    # -- quadrature implementations ---------------------------------------
    def _window(self, x):
        return x - GAUSS_HALF_WIDTH, x + GAUSS_HALF_WIDTH

    def _quad_g(self, x):
        dens = self.slab.density_at
        lo, hi = self._window(x)
        return integrate_1d(lambda u: _phi(x - u) * dens(u), lo, hi,
                            points=(0.0, x), rtol=self.rtol)

    def _quad_derivs(self, x):
        dens = self.slab.density_at
        lo, hi = self._window(x)
        g = self._quad_g(x)
        atol = self.rtol * 1e-2 * g
        g1 = integrate_1d(lambda u: (u - x) * _phi(x - u) * dens(u), lo, hi,
                          points=(0.0, x), rtol=self.rtol, atol=atol)
        g2 = integrate_1d(lambda u: ((x - u) ** 2 - 1.0) * _phi(x - u) * dens(u),
                          lo, hi, points=(0.0, x - 1.0, x, x + 1.0), rtol=self.rtol,
                          atol=atol)
        return g, g1, g2

    def _quad_evaluate(self, x):
        vals = _vec3(self._quad_derivs)(x)
        g, g1, g2 = (np.asarray(v, float) for v in vals)
        log_ratio = np.log(g) - sp.log_std_normal(x)
        return MarginalEval(*(_scalar_out(v, x) for v in (log_ratio, g1 / g, g2 / g)))

    def _quad_half_difference(self, x):
        if x == 0.0:
            return 0.0
        ax = abs(x)
        dens = self.slab.density_at
        # 2 sinh(xu) exp(-u^2/2) = exp(x^2/2) exp(-(u-x)^2/2) (1 - exp(-2xu))
        f = lambda u: (math.exp(-0.5 * (u - ax) ** 2) * -math.expm1(-2.0 * ax * u)
                       * float(dens(u)))
        val = integrate_1d(f, 0.0, ax + GAUSS_HALF_WIDTH, points=(ax,), rtol=self.rtol)
        return math.copysign(math.exp(math.log(val) + 0.5 * ax * ax), x)

    def _quad_upper_fraction(self, x):
        dens = self.slab.density_at
        hi = max(x, 0.0) + GAUSS_HALF_WIDTH
        num = integrate_1d(lambda u: _phi(x - u) * dens(u), 0.0, hi,
                           points=(x,), rtol=self.rtol)
        return num / self._quad_g(x)

    def _quad_sf(self, x, m):
        dens = self.slab.density_at
        hi = x + GAUSS_HALF_WIDTH
        if m >= hi:
            return 0.0
        lo = max(m, x - GAUSS_HALF_WIDTH)
        num = integrate_1d(lambda u: _phi(x - u) * dens(u), lo, hi,
                           points=(0.0, x), rtol=self.rtol)
        return min(1.0, num / self._quad_g(x))


def _vec(f):
    return np.vectorize(f, otypes=[float])


def _vec3(f):
    return np.vectorize(f, otypes=[float, float, float])


# -- closed forms ------------------------------------------------------------

def _laplace_eval(a, x):
    """Laplace(a): g/phi = (a/2) [M(a - x) + M(a + x)], M the Mills ratio.

    Then g'/g = a (M(a+x) - M(a-x)) / (M(a+x) + M(a-x)) and g'' = a^2 (g - phi).
    """
    return laplace_evaluate(x, a)


def _laplace_sf(a, x, m):
    # On u > 0 the slab posterior is a N(x - a, 1) restricted to (0, inf),
    # on u < 0 a N(x + a, 1) restricted to (-inf, 0). Ratios of normal tails
    # are taken in log space so that a large rate a (a sharp spike) is fine.
    out = np.empty(x.shape, dtype=float)
    pos = m >= 0
    xp, mp = x[pos], m[pos]
    frac = sc.expit(sp.log_mills(a - xp) - sp.log_mills(a + xp))
    out[pos] = frac * np.exp(sc.log_ndtr(xp - a - mp) - sc.log_ndtr(xp - a))
    neg = ~pos
    xn, mn = -x[neg], -m[neg]
    frac = sc.expit(sp.log_mills(a - xn) - sp.log_mills(a + xn))
    out[neg] = 1.0 - frac * np.exp(sc.log_ndtr(xn - a - mn) - sc.log_ndtr(xn - a))
    return out[()] if out.ndim == 0 else out


def _cauchy_eval(lam, x):
    """Cauchy(1/lam) convolved with N(0,1) is a Voigt profile.

    With z = (x + i/lam)/sqrt(2) and w the Faddeeva function,
    g = Re w(z) / sqrt(2 pi) and w'(z) = -2 z w + 2i/sqrt(pi).
    """
    z = (x + 1j / lam) / _SQRT2
    w = sc.wofz(z)
    re_w = w.real
    log_ratio = np.log(re_w) + 0.5 * x * x
    dlog = -_SQRT2 * (z * w).real / re_w
    d2 = -(w - 2.0 * z * z * w + 2j * _INV_SQRT_PI * z).real / re_w
    return log_ratio, dlog, d2


def _quasi_cauchy_eval(x):
    ax = np.abs(x)
    y = 0.5 * ax * ax
    log_ratio = np.empty_like(ax)
    dlog = np.empty_like(ax)
    d2 = np.empty_like(ax)

    small = y < _QC_SERIES_Y
    ys, xs = y[small], ax[small]
    h = np.zeros_like(ys)
    h1 = np.zeros_like(ys)
    h2 = np.zeros_like(ys)
    for k in range(_QC_TERMS - 1, -1, -1):
        c = _QC_COEF[k]
        h = h * ys + c
        if k >= 1:
            h1 = h1 * ys + k * c
        if k >= 2:
            h2 = h2 * ys + k * (k - 1) * c
    # g = c h(y) / 2 and phi = c exp(-y), c = (2 pi)^(-1/2)
    log_ratio[small] = ys + np.log(0.5 * h)
    dlog[small] = xs * h1 / h
    d2[small] = (h1 + xs * xs * h2) / h

    big = ~small
    yb, xb = y[big], ax[big]
    e = np.exp(-yb)
    one_minus_e = -np.expm1(-yb)
    u = one_minus_e / (xb * xb)
    log_ratio[big] = np.log(one_minus_e) - 2.0 * np.log(xb) + yb
    dlog[big] = (e - 2.0 * u) / (xb * u)
    d2[big] = (-e * (1.0 + 3.0 / (xb * xb)) + 6.0 * u / (xb * xb)) / u

    return log_ratio, np.sign(x) * dlog, d2
