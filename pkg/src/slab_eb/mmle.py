"""Marginal maximum likelihood for the mixing weight.

The log marginal likelihood of the mixing weight is

    l(alpha) = sum_i log((1 - alpha) phi(X_i) + alpha g(X_i))

and its derivative, the score, is ``S(alpha) = sum_i beta_i / (1 + alpha beta_i)``
with ``beta_i = beta(X_i)``. Each summand is decreasing in alpha, so the
maximiser over an interval is found by a bracketed root search on S. Both
are evaluated from a vector of ``beta_i`` computed once per data set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import special as sp
from ._kernels import score_sum
from .exceptions import DomainError
from .posterior import SasModel, threshold_t, threshold_t_inverse, threshold_zeta

ALPHA_RTOL = 1e-12
# S is evaluated at 1 - ALPHA_TOP instead of 1 so that 1 + alpha * beta stays
# away from 0 when some beta_i is close to -1.
ALPHA_TOP = 1e-15


@dataclass(frozen=True)
class ModifiedFit:
    A: float
    alpha_A: float
    t_n: float
    t_A: float
    triggered: bool


@dataclass(frozen=True)
class EbFit:
    alpha_hat: float
    zeta_hat: float | None
    t_hat: float | None
    alpha_lower: float
    at_lower_boundary: bool
    at_upper_boundary: bool
    score_at_solution: float
    modified: ModifiedFit | None = None

    @property
    def alpha(self):
        """The weight to plug in: ``alpha_A`` for a modified fit, else ``alpha_hat``."""
        if self.modified is not None and self.modified.triggered:
            return self.modified.alpha_A
        return self.alpha_hat

    def as_dict(self):
        out = {
            "alpha_hat": self.alpha_hat,
            "zeta_hat": self.zeta_hat,
            "t_hat": self.t_hat,
            "alpha_lower": self.alpha_lower,
            "at_lower_boundary": self.at_lower_boundary,
            "at_upper_boundary": self.at_upper_boundary,
            "score_at_solution": self.score_at_solution,
        }
        if self.modified is not None:
            m = self.modified
            out.update(A=m.A, alpha_A=m.alpha_A, t_n=m.t_n, t_A=m.t_A, triggered=m.triggered)
        return out


def score_from_beta(beta, alpha):
    """``sum beta / (1 + alpha beta)``; an infinite beta contributes 1/alpha."""
    beta = np.ascontiguousarray(beta, dtype=float).reshape(-1)
    return float(score_sum(beta, float(alpha)))


def log_marginal_from_log_ratio(log_ratio, x, alpha):
    if alpha == 0:
        tail = 0.0
    elif alpha == 1:
        tail = np.sum(log_ratio)
    else:
        tail = np.sum(np.logaddexp(math.log1p(-alpha), math.log(alpha) + log_ratio))
    return float(np.sum(sp.log_std_normal(x)) + tail)


def _check_data(model, data):
    data = np.asarray(data, dtype=float).reshape(-1)
    if data.size != model.n:
        raise DomainError(f"expected {model.n} observations, got {data.size}")
    return data


def log_marginal(model, alpha, data):
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha={alpha!r} outside [0, 1]")
    data = _check_data(model, data)
    return log_marginal_from_log_ratio(model.md.log_ratio(data), data, alpha)


def score(model, alpha, data):
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha={alpha!r} outside [0, 1]")
    data = _check_data(model, data)
    return score_from_beta(model.md.beta(data), alpha)


def alpha_lower(model: SasModel):
    """``alpha_n`` with ``t(alpha_n) = sqrt(2 log n)``."""
    return threshold_t_inverse(model, math.sqrt(2.0 * math.log(model.n)))


def maximise_from_beta(beta, lower):
    """Maximise the marginal likelihood over ``[lower, 1]``.

    Returns ``(alpha_hat, at_lower, at_upper, score_at_solution)``.
    """
    s_lo = score_from_beta(beta, lower)
    if s_lo <= 0:
        return lower, s_lo < 0, False, s_lo
    top = 1.0 - ALPHA_TOP
    s_hi = score_from_beta(beta, top)
    if s_hi >= 0:
        return 1.0, False, True, s_hi
    root = optimize.brentq(lambda a: score_from_beta(beta, a), lower, top,
                           xtol=1e-300, rtol=ALPHA_RTOL)
    return root, False, False, score_from_beta(beta, root)


def _safe(fn, *args):
    try:
        return fn(*args)
    except DomainError:
        return None


def fit_from_beta(model: SasModel, beta, lower=None) -> EbFit:
    if lower is None:
        lower = alpha_lower(model)
    alpha_hat, at_lo, at_hi, s = maximise_from_beta(beta, lower)
    t_hat = 0.0 if alpha_hat >= 1 else _safe(threshold_t, model, alpha_hat)
    return EbFit(
        alpha_hat=alpha_hat,
        zeta_hat=_safe(threshold_zeta, model, alpha_hat),
        t_hat=t_hat,
        alpha_lower=lower,
        at_lower_boundary=at_lo,
        at_upper_boundary=at_hi,
        score_at_solution=s,
    )


def fit_mmle(model: SasModel, data) -> EbFit:
    data = _check_data(model, data)
    return fit_from_beta(model, model.md.beta(data))


def modify_fit(model: SasModel, fit: EbFit, A: float) -> EbFit:
    """Swap in ``alpha_A = t^-1(sqrt(2(1+A) log n))`` when ``t(alpha_hat) > t_n``."""
    n = model.n
    if n < 3:
        raise DomainError("the modified estimator needs n >= 3")
    if A < 0:
        raise DomainError(f"A must be nonnegative, got {A!r}")
    log_n = math.log(n)
    t_n = math.sqrt(2.0 * log_n - 5.0 * math.log(log_n))
    t_A = math.sqrt(2.0 * (1.0 + A) * log_n)
    alpha_A = threshold_t_inverse(model, t_A)
    t_hat = fit.t_hat if fit.t_hat is not None else threshold_t(model, fit.alpha_hat)
    triggered = t_hat > t_n
    mod = ModifiedFit(A=float(A), alpha_A=alpha_A, t_n=t_n, t_A=t_A, triggered=triggered)
    return EbFit(**{**fit.__dict__, "modified": mod})


def fit_modified(model: SasModel, data, A: float) -> EbFit:
    if model.n < 3:
        raise DomainError("the modified estimator needs n >= 3")
    return modify_fit(model, fit_mmle(model, data), A)
