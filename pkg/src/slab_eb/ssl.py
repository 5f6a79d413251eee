"""Spike-and-slab LASSO: a Laplace(lambda0) spike instead of a point mass.

The prior on each coordinate is ``(1 - alpha) Lap(lambda0) + alpha G1`` with
``lambda0`` of order n, so the spike marginal ``g0 = phi * Lap(lambda0)``
differs from ``phi`` only by ``O(1/lambda0^2)``. Writing ``g0/phi`` through the
Mills ratio gives

    g0/phi(x) = (lambda0/2) [M(lambda0 - x) + M(lambda0 + x)],

and with ``M'(z) = z M(z) - 1`` (about ``-1/z^2``)

    g0/phi - 1 = 1/2 [M'(lambda0 - x) + M'(lambda0 + x) + x (M(lambda0 - x) - M(lambda0 + x))],

which keeps full relative accuracy in the small difference; ``exp(lambda0^2/2)``
is never formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special as sc

from . import special as sp
from .exceptions import ConfigurationError, DomainError, NumericalError
from .mmle import EbFit, log_marginal_from_log_ratio, maximise_from_beta, score_from_beta
from .posterior import X_TOL
from .slabs import CAUCHY, LAPLACE, MarginalDensity, SlabSpec, _laplace_eval, _laplace_sf

L0_DEFAULT = 5.0 * math.sqrt(2.0 * math.pi)
L1_DEFAULT = 0.05
CALIBRATION_CAP = 10**6
# Below this distance from lambda0 the generic Laplace formulas take over.
_NEAR_SPIKE_EDGE = 1.0


@dataclass(frozen=True)
class SslModel:
    """SSL prior configuration.

    ``slab1`` is ``"cauchy"`` (Cauchy(1/lambda1), the default) or ``"lap"``
    (Laplace(lambda1)). ``calibration_constant`` defaults to the smallest
    integer C with ``beta(sqrt(2 log n)) >= n / (C log n)``.
    """

    n: int
    lambda0: float | None = None
    lambda1: float = L1_DEFAULT
    slab1: str = CAUCHY
    calibration_constant: float | None = None
    md1: MarginalDensity = field(init=False, repr=False)
    alpha0: float = field(init=False)
    alpha_star: float = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"n must be an integer >= 2, got {self.n!r}")
        if self.lambda0 is None:
            object.__setattr__(self, "lambda0", L0_DEFAULT * self.n)
        if self.lambda0 <= 0 or self.lambda1 <= 0:
            raise ConfigurationError("lambda0 and lambda1 must be positive")
        family = {"cauchy": CAUCHY, "lap": LAPLACE, "laplace": LAPLACE}.get(self.slab1)
        if family is None:
            raise ConfigurationError(f"slab1 must be 'cauchy' or 'lap', got {self.slab1!r}")
        object.__setattr__(self, "slab1", "cauchy" if family == CAUCHY else "lap")
        object.__setattr__(self, "md1", MarginalDensity(SlabSpec(family, self.lambda1)))
        if self.calibration_constant is None:
            object.__setattr__(self, "calibration_constant", self._default_calibration())
        elif self.calibration_constant < 1:
            raise ConfigurationError("calibration constant must be >= 1")
        lr0 = float(self.md1.log_ratio(0.0))
        object.__setattr__(self, "alpha_star", 1.0 / (1.0 + 2.0 * math.exp(lr0)))
        lr1 = float(self.md1.log_ratio(self.lambda1))
        object.__setattr__(self, "alpha0", 1.0 / (1.0 + 2.0 * math.exp(lr1)))

    @classmethod
    def parse(cls, text: str) -> "SslModel":
        """Parse ``ssl:<n>[:lambda0=<v>][:lambda1=<v>][:slab1=cauchy|lap]``."""
        parts = text.strip().split(":")
        if parts[0].lower() != "ssl" or len(parts) < 2:
            raise ConfigurationError(f"cannot parse SSL model {text!r}")
        try:
            kwargs = {"n": int(float(parts[1]))}
            for item in parts[2:]:
                key, _, value = item.partition("=")
                if key in ("lambda0", "lambda1"):
                    kwargs[key] = float(value)
                elif key == "slab1":
                    kwargs[key] = value
                elif key in ("C", "calibration"):
                    kwargs["calibration_constant"] = float(value)
                else:
                    raise ConfigurationError(f"unknown SSL option {key!r}")
        except ValueError as exc:
            raise ConfigurationError(f"cannot parse SSL model {text!r}") from exc
        return cls(**kwargs)

    def __str__(self):
        return (f"ssl:{self.n}:lambda0={self.lambda0:.17g}:lambda1={self.lambda1:g}"
                f":slab1={self.slab1}")

    def _default_calibration(self):
        log_n = math.log(self.n)
        b = float(ssl_beta(self, math.sqrt(2.0 * log_n)))
        if b <= 0:
            return float(CALIBRATION_CAP)
        return float(min(CALIBRATION_CAP, max(1, math.ceil(self.n / (log_n * b)))))

    @property
    def alpha_lower(self):
        return self.calibration_constant * math.log(self.n) / self.n

    @property
    def interval(self):
        """``J_n = [2 lambda1, sqrt(2 log n)]``, where beta is increasing."""
        return 2.0 * self.lambda1, math.sqrt(2.0 * math.log(self.n))


# -- spike marginal ------------------------------------------------------------

def _g0_core(lambda0, x):
    """``(log(g0/phi), g0/phi - 1, g0'/g0)``; the log survives where rho overflows."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    rho = np.empty_like(ax)
    lr0 = np.empty_like(ax)
    dlog = np.empty_like(ax)
    far = lambda0 - ax > _NEAR_SPIKE_EDGE
    xa = ax[far]
    zm, zp = lambda0 - xa, lambda0 + xa
    dm, dp = sp.mills_deriv(zm), sp.mills_deriv(zp)
    # M(z) = (1 + M'(z)) / z
    diff = 2.0 * xa / (zm * zp) + dm / zm - dp / zp
    total = (1.0 + dm) / zm + (1.0 + dp) / zp
    rho[far] = 0.5 * (dm + dp + xa * diff)
    lr0[far] = np.log1p(rho[far])
    dlog[far] = -lambda0 * diff / total
    near = ~far
    if np.any(near):
        lr, dl, _ = _laplace_eval(lambda0, ax[near])
        lr0[near] = lr
        with np.errstate(over="ignore"):
            rho[near] = np.expm1(lr)
        dlog[near] = dl
    return lr0, rho, np.sign(x) * dlog


def g0_parts(lambda0, x):
    """``(g0/phi - 1, g0'/g0, g0''/g0)`` for the Laplace(lambda0) spike."""
    lr0, rho, dlog = _g0_core(lambda0, x)
    # g0''/g0 = lambda0^2 (1 - phi/g0)
    d2 = -lambda0 * lambda0 * np.expm1(-lr0)
    return tuple(v[()] if v.ndim == 0 else v for v in (rho, dlog, d2))


def g0_eval(model: SslModel, x):
    """``(g0, g0', g0'')`` with ``g0'' = lambda0^2 (g0 - phi)``."""
    x = np.asarray(x, dtype=float)
    rho, dlog, _ = g0_parts(model.lambda0, x)
    phi = sp.std_normal(x)
    g0 = phi * (1.0 + rho)
    return g0, g0 * dlog, model.lambda0**2 * phi * rho


def g0_second_derivative_direct(lambda0, x):
    """``g0''`` by differentiating ``(lambda0/2) phi (M(l0-x) + M(l0+x))`` twice.

    An independent route to the same quantity; only sensible for moderate
    lambda0 (it cancels catastrophically when lambda0 is large).
    """
    x = np.asarray(x, dtype=float)
    mm, mp = sp.mills(lambda0 - x), sp.mills(lambda0 + x)
    d1m, d1p = (lambda0 - x) * mm - 1.0, (lambda0 + x) * mp - 1.0
    d2m, d2p = mm + (lambda0 - x) * d1m, mp + (lambda0 + x) * d1p
    phi = sp.std_normal(x)
    # d/dx M(l0 - x) = -M'(l0 - x), d2/dx2 M(l0 - x) = M''(l0 - x)
    s0 = mm + mp
    s1 = -d1m + d1p
    s2 = d2m + d2p
    return 0.5 * lambda0 * phi * ((x * x - 1.0) * s0 - 2.0 * x * s1 + s2)


def ssl_log_ratio(model: SslModel, x):
    """``log(g1/g0)(x)``."""
    lr0, _, _ = _g0_core(model.lambda0, x)
    out = model.md1.log_ratio(x) - lr0
    return out[()] if np.ndim(out) == 0 else out


def ssl_beta(model: SslModel, x):
    with np.errstate(over="ignore"):
        return np.expm1(ssl_log_ratio(model, x))


def _check_alpha(alpha):
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha={alpha!r} outside [0, 1]")


def ssl_post_weight(model: SslModel, alpha, x):
    _check_alpha(alpha)
    lr = np.asarray(ssl_log_ratio(model, x))
    if alpha == 0:
        return np.zeros_like(lr)[()]
    if alpha == 1:
        return np.ones_like(lr)[()]
    return sc.expit(math.log(alpha) - math.log1p(-alpha) + lr)


def ssl_component_density(model: SslModel, k, x):
    """Density ``gamma_{k,x}(u) = phi(x - u) gamma_k(u) / g_k(x)`` as a callable."""
    x = float(x)
    if k == 0:
        spike = SlabSpec(LAPLACE, model.lambda0)
        g0 = float(g0_eval(model, x)[0])
        return lambda u: sp.std_normal(x - np.asarray(u, float)) * spike.density(u) / g0
    if k == 1:
        return lambda u: model.md1.posterior_density(x, u)
    raise DomainError("component index must be 0 or 1")


def _component_moments(model, x):
    x = np.asarray(x, dtype=float)
    _, dlog0, d20 = g0_parts(model.lambda0, x)
    ev1 = model.md1.evaluate(x)
    return dlog0, d20, ev1


def ssl_r2(model: SslModel, alpha, mu, x):
    """``(1 - a) int (u-mu)^2 gamma_{0,x} + a int (u-mu)^2 gamma_{1,x}``."""
    x = np.asarray(x, dtype=float)
    a = ssl_post_weight(model, alpha, x)
    dlog0, d20, ev1 = _component_moments(model, x)
    dx = x - mu
    m0 = dx * dx + 1.0 + d20 + 2.0 * dx * dlog0
    m1 = dx * dx + 1.0 + ev1.d2 + 2.0 * dx * ev1.dlog
    return (1.0 - a) * m0 + a * m1


def ssl_post_mean(model: SslModel, alpha, x):
    x = np.asarray(x, dtype=float)
    a = ssl_post_weight(model, alpha, x)
    dlog0, _, ev1 = _component_moments(model, x)
    return (1.0 - a) * (x + dlog0) + a * (x + ev1.dlog)


def _ssl_median_scalar(model, a, x):
    def cdf(m):
        f0 = 1.0 - float(_laplace_sf(model.lambda0, np.asarray(x), np.asarray(m)))
        f1 = 1.0 - float(model.md1.posterior_sf(x, m))
        return (1.0 - a) * f0 + a * f1 - 0.5

    # both components shrink towards zero, so the median normally lies
    # between 0 and x; the wide window is a fallback
    lo, hi = min(0.0, x), max(0.0, x)
    if cdf(lo) > 0 or cdf(hi) < 0:
        lo, hi = -abs(x) - 40.0, abs(x) + 40.0
        if cdf(lo) > 0 or cdf(hi) < 0:
            raise NumericalError("SSL posterior median is not bracketed")
    return optimize.brentq(cdf, lo, hi, xtol=X_TOL, rtol=4 * np.finfo(float).eps)


def ssl_post_median(model: SslModel, alpha, x):
    """Median of the two-component posterior (not a thresholding rule)."""
    x = np.asarray(x, dtype=float)
    a = np.broadcast_to(ssl_post_weight(model, alpha, x), x.shape)
    out = np.array([_ssl_median_scalar(model, ai, xi)
                    for ai, xi in zip(a.reshape(-1), x.reshape(-1))])
    return out.reshape(x.shape)[()]


# -- marginal likelihood -------------------------------------------------------

def ssl_log_marginal(model: SslModel, alpha, data):
    _check_alpha(alpha)
    data = np.asarray(data, dtype=float).reshape(-1)
    lr0, _, _ = _g0_core(model.lambda0, data)
    base = log_marginal_from_log_ratio(ssl_log_ratio(model, data), data, alpha)
    return base + float(np.sum(lr0))


def ssl_score(model: SslModel, alpha, data):
    _check_alpha(alpha)
    return score_from_beta(ssl_beta(model, np.asarray(data, float).reshape(-1)), alpha)


def ssl_fit_from_beta(model: SslModel, beta) -> EbFit:
    lower = model.alpha_lower
    if lower >= 1:
        raise DomainError(f"n={model.n} too small: C log n / n = {lower:g} >= 1")
    alpha_hat, at_lo, at_hi, s = maximise_from_beta(beta, lower)
    try:
        zeta = ssl_zeta(model, alpha_hat)
    except DomainError:
        zeta = None
    return EbFit(alpha_hat=alpha_hat, zeta_hat=zeta, t_hat=None, alpha_lower=lower,
                 at_lower_boundary=at_lo, at_upper_boundary=at_hi, score_at_solution=s)


def ssl_fit_mmle(model: SslModel, data) -> EbFit:
    data = np.asarray(data, dtype=float).reshape(-1)
    if data.size != model.n:
        raise DomainError(f"expected {model.n} observations, got {data.size}")
    if model.alpha_lower >= 1:
        raise DomainError(f"n={model.n} too small: C log n / n >= 1")
    return ssl_fit_from_beta(model, ssl_beta(model, data))


# -- thresholds ----------------------------------------------------------------

def _root(f, target, lo, hi, what):
    flo, fhi = f(lo) - target, f(hi) - target
    if flo > 0 or fhi < 0:
        raise DomainError(f"{what}: no solution in [{lo:g}, {hi:g}]")
    if flo == 0 or fhi == 0:
        return lo if flo == 0 else hi
    return optimize.brentq(lambda v: f(v) - target, lo, hi, xtol=X_TOL,
                           rtol=4 * np.finfo(float).eps)


def ssl_zeta(model: SslModel, alpha):
    """``beta(zeta) = 1/alpha`` solved on ``J_n``."""
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha={alpha!r} outside (0, 1]")
    lo, hi = model.interval
    return _root(lambda v: float(ssl_log_ratio(model, v)), math.log1p(1.0 / alpha), lo, hi,
                 "SSL zeta")


def ssl_tau(model: SslModel, alpha):
    """Solves ``alpha/(1-alpha) * 2 g1/phi(tau) = 1``; zero for alpha >= alpha*."""
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha={alpha!r} outside (0, 1]")
    if alpha >= model.alpha_star:
        return 0.0
    target = math.log((1.0 - alpha) / (2.0 * alpha))
    f = lambda v: float(model.md1.log_ratio(v))
    hi = 1.0
    while f(hi) < target:
        hi *= 2.0
        if hi > 37.0:
            raise DomainError("SSL tau: no solution below x = 37")
    return _root(f, target, 0.0, hi, "SSL tau")


def ssl_tau_tilde(model: SslModel, alpha):
    return ssl_tau(model, min(alpha, model.alpha0))


@dataclass(frozen=True)
class SslThresholds:
    alpha: float
    zeta: float
    tau: float
    tau_tilde: float


def ssl_thresholds(model: SslModel, alpha) -> SslThresholds:
    if not model.alpha_lower < alpha <= 1:
        raise DomainError(f"alpha={alpha!r} outside (C log n / n, 1]")
    return SslThresholds(alpha, ssl_zeta(model, alpha), ssl_tau(model, alpha),
                         ssl_tau_tilde(model, alpha))
