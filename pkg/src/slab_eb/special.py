"""Gaussian special functions used throughout the package.

Everything here is vectorised over numpy arrays and stays finite far into
the Gaussian tails by working with the Mills ratio

    M(z) = Phi_bar(z) / phi(z) = exp(z**2 / 2) * int_z^inf exp(-u**2 / 2) du

instead of the tail probability itself.
"""
import math

import numpy as np
from scipy import special as sc

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
SQRT_HALF_PI = math.sqrt(0.5 * math.pi)
INV_SQRT2 = 1.0 / math.sqrt(2.0)

# Above this the asymptotic series for z*M(z) - 1 is used.
_ASYMPTOTIC_CUTOFF = 15.0
_ASYMPTOTIC_TERMS = 14


def std_normal(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x - LOG_SQRT_2PI)


def log_std_normal(x):
    x = np.asarray(x, dtype=float)
    return -0.5 * x * x - LOG_SQRT_2PI


def upper_tail(x):
    """Phi_bar(x) = P[N(0, 1) > x], accurate in relative terms in both tails."""
    return sc.ndtr(-np.asarray(x, dtype=float))


def log_upper_tail(x):
    return sc.log_ndtr(-np.asarray(x, dtype=float))


def mills(z):
    """Mills ratio M(z); overflows to inf only for z below about -37.5."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= -1.0
    out[pos] = SQRT_HALF_PI * sc.erfcx(z[pos] * INV_SQRT2)
    neg = ~pos
    zn = z[neg]
    with np.errstate(over="ignore"):
        out[neg] = sc.ndtr(-zn) * np.exp(0.5 * zn * zn + LOG_SQRT_2PI)
    return out[()] if out.ndim == 0 else out


def log_mills(z):
    """log M(z), finite for every finite z."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= -1.0
    out[pos] = np.log(SQRT_HALF_PI * sc.erfcx(z[pos] * INV_SQRT2))
    neg = ~pos
    zn = z[neg]
    out[neg] = np.log(sc.ndtr(-zn)) + 0.5 * zn * zn + LOG_SQRT_2PI
    return out[()] if out.ndim == 0 else out


def mills_deriv(z):
    """M'(z) = z M(z) - 1, without the cancellation of the direct formula.

    For large z this is about -1/z**2, so the direct difference loses all
    accuracy; there the (convergent-in-practice) asymptotic series is used.
    """
    if np.ndim(z) == 0:
        return _mills_deriv_scalar(float(z))
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    big = z > _ASYMPTOTIC_CUTOFF
    zb = z[big]
    inv2 = 1.0 / (zb * zb)
    term = np.ones_like(zb)
    acc = np.zeros_like(zb)
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term = -term * (2 * k - 1) * inv2
        acc += term
    out[big] = acc
    small = ~big
    with np.errstate(over="ignore", invalid="ignore"):
        out[small] = z[small] * mills(z[small]) - 1.0
    return out[()] if out.ndim == 0 else out


def _mills_deriv_scalar(z):
    # quadrature integrands call this once per node; numpy overhead dominates
    if z > _ASYMPTOTIC_CUTOFF:
        inv2 = 1.0 / (z * z)
        term, acc = 1.0, 0.0
        for k in range(1, _ASYMPTOTIC_TERMS + 1):
            term = -term * (2 * k - 1) * inv2
            acc += term
        return acc
    if z >= -1.0:
        return z * SQRT_HALF_PI * float(sc.erfcx(z * INV_SQRT2)) - 1.0
    return z * float(sc.ndtr(-z)) * math.exp(0.5 * z * z + LOG_SQRT_2PI) - 1.0
