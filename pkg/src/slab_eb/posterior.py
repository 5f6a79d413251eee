"""Coordinatewise spike-and-slab posterior for a fixed mixing weight.

For prior ``(1 - alpha) delta_0 + alpha G`` and one observation ``x`` the
posterior is ``(1 - a(x)) delta_0 + a(x) gamma_x`` with

    a(x) = alpha g(x) / ((1 - alpha) phi(x) + alpha g(x)),
    gamma_x(u) = phi(x - u) gamma(u) / g(x).

All functions take the model first and broadcast over ``x`` where that is
cheap. Threshold solvers work on scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special as sc

from . import special as sp
from .exceptions import ConfigurationError, DomainError, NumericalError
from .slabs import LAPLACE, MarginalDensity, SlabSpec

# Thresholds beyond this are not representable: phi(x) underflows and the
# half-difference D(x) overflows near x = 37.7.
X_MAX = 37.0
X_TOL = 1e-12


@dataclass(frozen=True)
class Thresholds:
    alpha: float
    t: float
    zeta: float
    tau: float
    tau_tilde: float


@dataclass(frozen=True)
class SasModel:
    """Spike-and-slab prior on ``n`` coordinates.

    ``alpha0`` (where ``tau(alpha0) = 1``) is fixed at construction, so an
    instance is immutable and can be shared freely.
    """

    n: int
    slab: SlabSpec
    md: MarginalDensity = None
    alpha0: float = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"n must be an integer >= 2, got {self.n!r}")
        if self.md is None:
            object.__setattr__(self, "md", MarginalDensity(self.slab))
        elif self.md.slab != self.slab:
            raise ConfigurationError("marginal density was built for a different slab")
        # a(1) = 1/2  <=>  alpha/(1 - alpha) * (g/phi)(1) = 1
        object.__setattr__(self, "alpha0", float(1.0 / (1.0 + self.md.ratio(1.0))))

    @classmethod
    def from_spec(cls, n, slab, backend="closed"):
        if isinstance(slab, str):
            slab = SlabSpec.parse(slab)
        return cls(n, slab, MarginalDensity(slab, backend))


def _check_alpha(alpha, lo_open=False, hi_open=False):
    ok = (alpha > 0 if lo_open else alpha >= 0) and (alpha < 1 if hi_open else alpha <= 1)
    if not ok:
        raise DomainError(f"alpha={alpha!r} outside its admissible range")


def weight_from_log_ratio(alpha, log_ratio):
    """Posterior slab weight from ``log(g/phi)``; exact at alpha in {0, 1}."""
    log_ratio = np.asarray(log_ratio, dtype=float)
    if alpha == 0:
        return np.zeros_like(log_ratio)[()]
    if alpha == 1:
        return np.ones_like(log_ratio)[()]
    # a = 1 / (1 + exp(-(logit(alpha) + log_ratio)))
    return sc.expit(math.log(alpha) - math.log1p(-alpha) + log_ratio)


def post_weight(model: SasModel, alpha, x):
    _check_alpha(alpha)
    return weight_from_log_ratio(alpha, model.md.log_ratio(x))


def cond_moment(model: SasModel, x, mu, k):
    """Central moment ``int (u - mu)^k gamma_x(u) du`` of the slab posterior.

    k = 1 and k = 2 use ``g'/g`` and ``g''/g``; k = 4 is integrated directly.
    """
    if k == 4:
        return np.vectorize(lambda xx, mm: model.md.posterior_moment(xx, mm, 4),
                            otypes=[float])(x, mu)[()]
    if k not in (1, 2):
        raise DomainError("only k in {1, 2, 4} is supported")
    x = np.asarray(x, float)
    ev = model.md.evaluate(x)
    dx = x - mu
    if k == 1:
        return dx + ev.dlog
    return dx * dx + ev.d2 + 1.0 + 2.0 * dx * ev.dlog


def post_mean(model: SasModel, alpha, x):
    _check_alpha(alpha)
    x = np.asarray(x, float)
    ev = model.md.evaluate(x)
    return weight_from_log_ratio(alpha, ev.log_ratio) * (x + ev.dlog)


def risk_r2(model: SasModel, alpha, mu, x):
    """``int (u - mu)^2 dPi_alpha(u | x)``."""
    _check_alpha(alpha)
    x = np.asarray(x, float)
    ev = model.md.evaluate(x)
    a = weight_from_log_ratio(alpha, ev.log_ratio)
    dx = x - mu
    slab_part = dx * dx + ev.d2 + 1.0 + 2.0 * dx * ev.dlog
    return (1.0 - a) * mu * mu + a * slab_part


def risk_r4(model: SasModel, alpha, mu, x):
    _check_alpha(alpha)
    a = post_weight(model, alpha, x)
    return (1.0 - a) * np.asarray(mu, float) ** 4 + a * cond_moment(model, x, mu, 4)


# -- posterior median --------------------------------------------------------

def _median_positive(md: MarginalDensity, w, x):
    """Median of (1 - w) delta_0 + w gamma_x for one x >= 0."""
    frac = float(md.upper_fraction(x))
    if w * frac <= 0.5:
        if w * (1.0 - frac) <= 0.5:
            return 0.0
        # More than half the mass on u < 0 despite x >= 0; cannot happen for a
        # symmetric slab but handled for completeness.
        return -_median_positive(md, w, -x) if x != 0 else 0.0
    if md.slab.family == LAPLACE and md.backend == "closed":
        a = md.slab.param
        q = sc.ndtr(x - a) / (2.0 * w * frac)
        return float(x - a - sc.ndtri(q))
    target = 0.5 / w
    f = lambda m: float(md.posterior_sf(x, m)) - target
    hi = max(x, 0.0) + 1.0
    while f(hi) > 0:
        hi += 2.0 * max(hi, 1.0)
        if hi > 1e6:
            raise NumericalError("posterior median bracket search failed")
    return optimize.brentq(f, 0.0, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps)


def median_given_weight(md: MarginalDensity, w, x):
    """Posterior median for given slab weights ``w`` at points ``x`` (vectorised)."""
    x = np.asarray(x, float)
    w = np.broadcast_to(np.asarray(w, float), x.shape)
    out = np.zeros(x.shape)
    flat_x, flat_w, flat_o = x.reshape(-1), w.reshape(-1), out.reshape(-1)
    for i in range(flat_x.size):
        xi = flat_x[i]
        flat_o[i] = math.copysign(_median_positive(md, flat_w[i], abs(xi)), xi) if xi else 0.0
    return out[()] if out.ndim == 0 else out


def median_laplace(a, w, x):
    """Vectorised closed-form posterior median for a Laplace(a) slab."""
    x = np.asarray(x, float)
    ax = np.abs(x)
    frac = sc.expit(sp.log_mills(a - ax) - sp.log_mills(a + ax))
    nonzero = w * frac > 0.5
    out = np.zeros_like(ax)
    q = sc.ndtr(ax[nonzero] - a) / (2.0 * np.broadcast_to(w, ax.shape)[nonzero] * frac[nonzero])
    out[nonzero] = ax[nonzero] - a - sc.ndtri(q)
    return np.sign(x) * out


def post_median(model: SasModel, alpha, x):
    """Posterior median; exactly zero for ``|x| <= t(alpha)``."""
    _check_alpha(alpha)
    x = np.asarray(x, float)
    w = post_weight(model, alpha, x)
    if model.slab.family == LAPLACE and model.md.backend == "closed":
        return median_laplace(model.slab.param, w, x)[()]
    return median_given_weight(model.md, w, x)


# -- thresholds ---------------------------------------------------------------

def _increasing_root(f, target, lo, hi, what):
    """Solve f(x) = target for increasing f on [lo, hi]."""
    flo, fhi = f(lo) - target, f(hi) - target
    if flo > 0 or fhi < 0:
        raise DomainError(f"{what}: no solution in [{lo:g}, {hi:g}]")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    return optimize.brentq(lambda v: f(v) - target, lo, hi, xtol=X_TOL,
                           rtol=4 * np.finfo(float).eps)


def threshold_t(model: SasModel, alpha):
    """Posterior-median threshold: ``D(t) = (1 - alpha)/alpha``."""
    _check_alpha(alpha, lo_open=True, hi_open=True)
    target = (1.0 - alpha) / alpha
    return _increasing_root(lambda v: float(model.md.half_difference(v)), target, 0.0,
                            X_MAX, "threshold t")


def threshold_t_inverse(model: SasModel, tval):
    """``alpha`` with ``t(alpha) = tval``; explicit since D is known."""
    if not 0 < tval <= X_MAX:
        raise DomainError(f"t={tval!r} outside (0, {X_MAX}]")
    return float(1.0 / (1.0 + model.md.half_difference(tval)))


def threshold_zeta(model: SasModel, alpha):
    """Pseudo-threshold: ``beta(zeta) = 1/alpha``."""
    _check_alpha(alpha, lo_open=True)
    target = math.log1p(1.0 / alpha)
    return _increasing_root(lambda v: float(model.md.log_ratio(v)), target, 0.0, X_MAX,
                            "threshold zeta")


def threshold_tau(model: SasModel, alpha):
    """Half-weight threshold ``a(tau) = 1/2``; zero once ``a(0) >= 1/2``."""
    _check_alpha(alpha, lo_open=True, hi_open=True)
    target = math.log((1.0 - alpha) / alpha)
    if float(model.md.log_ratio(0.0)) >= target:
        return 0.0
    return _increasing_root(lambda v: float(model.md.log_ratio(v)), target, 0.0, X_MAX,
                            "threshold tau")


def tau_tilde(model: SasModel, alpha):
    return threshold_tau(model, min(alpha, model.alpha0))


def thresholds(model: SasModel, alpha) -> Thresholds:
    return Thresholds(
        alpha=alpha,
        t=threshold_t(model, alpha),
        zeta=threshold_zeta(model, alpha),
        tau=threshold_tau(model, alpha),
        tau_tilde=tau_tilde(model, alpha),
    )
