"""Score moments, calibration equations, rate quantities and inequality checks.

The score summand is ``beta(x, alpha) = beta(x) / (1 + alpha beta(x))``. Its
moments under ``X ~ N(mu, 1)`` are

    m1(mu, alpha) = E_mu beta(X, alpha),   m2(mu, alpha) = E_mu beta(X, alpha)^2,
    m_tilde(alpha) = -m1(0, alpha).

Functions here accept either a :class:`SasModel` or an :class:`SslModel`.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from . import posterior as post
from . import special as sp
from . import ssl
from .exceptions import DomainError
from .posterior import SasModel
from .quadrature import GAUSS_HALF_WIDTH, integrate_1d
from .slabs import LAPLACE, MarginalDensity

MOMENT_RTOL = 1e-12


def _beta(model):
    if isinstance(model, ssl.SslModel):
        return lambda x: ssl.ssl_beta(model, x)
    return model.md.beta


def _log_ratio(model):
    if isinstance(model, ssl.SslModel):
        return lambda x: ssl.ssl_log_ratio(model, x)
    return model.md.log_ratio


def _zeta(model, alpha):
    try:
        if isinstance(model, ssl.SslModel):
            return ssl.ssl_zeta(model, alpha)
        return post.threshold_zeta(model, alpha)
    except DomainError:
        return None


def _check_alpha(alpha):
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha={alpha!r} outside (0, 1]")


def score_summand(model, x, alpha):
    b = np.asarray(_beta(model)(x), dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = b / (1.0 + alpha * b)
    return np.where(np.isinf(b), 1.0 / alpha, out)[()]


def m_tilde(model, alpha):
    """``m_tilde(alpha) = -2 int_0^inf beta(z, alpha) phi(z) dz``.

    For a SAS model ``int_0^inf (g - phi) = 0``, so this equals
    ``2 alpha int_0^inf beta^2 phi / (1 + alpha beta)``, whose integrand is
    positive; that form is integrated on [0, 40], split at zeta(alpha), and the
    remainder beyond 40 is ``2 (1 - G(40))`` to double precision.
    """
    _check_alpha(alpha)
    zeta = _zeta(model, alpha)
    pts = () if zeta is None else (zeta,)
    if isinstance(model, ssl.SslModel):
        f = lambda z: float(score_summand(model, z, alpha)) * float(sp.std_normal(z))
        return -2.0 * integrate_1d(f, 0.0, GAUSS_HALF_WIDTH, points=pts, rtol=MOMENT_RTOL,
                                   atol=1e-16)
    log_ratio = model.md.log_ratio

    def f(z):
        lr = float(log_ratio(z))
        b = math.expm1(min(lr, 700.0))
        frac = b / (1.0 + alpha * b) if lr < 700.0 else 1.0 / alpha
        # beta(z) phi(z) = g(z) - phi(z), kept finite for large z
        log_phi = float(sp.log_std_normal(z))
        b_phi = b * math.exp(log_phi) if lr <= 0 else -math.expm1(-lr) * math.exp(lr + log_phi)
        return frac * b_phi

    body = integrate_1d(f, 0.0, GAUSS_HALF_WIDTH, points=pts, rtol=MOMENT_RTOL)
    tail = _slab_tail(model.md, GAUSS_HALF_WIDTH)
    return 2.0 * alpha * body + 2.0 * tail


def _slab_tail(md, x0):
    """``int_x0^inf g = P(U + Z > x0)``; negligible unless the slab has polynomial tails.

    Written as ``P(U > x0) + int (Phibar(x0 - u) - 1{u > x0}) gamma(u) du``; the
    correction is supported near ``u = x0`` and the slab tail is integrated
    after mapping ``u = x0 / t``.
    """
    if md.slab.family == LAPLACE:
        return 0.0
    dens = md.slab.density
    slab_tail = integrate_1d(lambda t: float(dens(x0 / t)) * x0 / (t * t), 0.0, 1.0, rtol=1e-12)
    corr = lambda u: (float(sp.upper_tail(x0 - u)) - (u > x0)) * float(dens(u))
    near = integrate_1d(corr, x0 - GAUSS_HALF_WIDTH, x0 + GAUSS_HALF_WIDTH, points=(x0,),
                        rtol=1e-12, atol=1e-18)
    return slab_tail + near


def _moment(model, mu, alpha, power):
    _check_alpha(alpha)
    zeta = _zeta(model, alpha)
    pts = [mu] + ([] if zeta is None else [zeta, -zeta])

    def f(x):
        return float(score_summand(model, x, alpha)) ** power * float(sp.std_normal(x - mu))

    lo, hi = mu - GAUSS_HALF_WIDTH, mu + GAUSS_HALF_WIDTH
    return integrate_1d(f, lo, hi, points=pts, rtol=1e-11, atol=1e-15)


def m1(model, mu, alpha):
    """``E_mu beta(X, alpha)``; decreasing in alpha."""
    return _moment(model, mu, alpha, 1)


def m2(model, mu, alpha):
    return _moment(model, mu, alpha, 2)


def monte_carlo_moments(model, mu, alpha, draws=10**7, seed=0, chunk=10**6):
    """Plain Monte-Carlo estimates of (m1, m2) with their standard errors."""
    rng = np.random.default_rng(seed)
    s1 = s2 = s4 = 0.0
    done = 0
    while done < draws:
        k = min(chunk, draws - done)
        v = score_summand(model, mu + rng.standard_normal(k), alpha)
        v2 = v * v
        s1 += v.sum()
        s2 += v2.sum()
        s4 += (v2 * v2).sum()
        done += k
    mean1, mean2 = s1 / draws, s2 / draws
    se1 = math.sqrt(max(mean2 - mean1**2, 0.0) / draws)
    se2 = math.sqrt(max(s4 / draws - mean2**2, 0.0) / draws)
    return (mean1, se1), (mean2, se2)


# -- calibration ---------------------------------------------------------------

@dataclass(frozen=True)
class RateQuantities:
    n: int
    s: int
    eta: float
    r_n: float
    R_n: float
    zeta1: float | None
    alpha1: float | None
    d: float


def rate_quantities(n, s):
    """Minimax rate ``2 s log(n/s)`` and Laplace-slab excess factor R_n."""
    if not 1 <= s < n:
        raise DomainError(f"need 1 <= s < n, got n={n}, s={s}")
    L = math.log(n / s)
    return 2.0 * s * L, math.exp(math.sqrt(2.0 * L)) / L


def solve_alpha1(model, n, s, d=1.0) -> RateQuantities:
    """Solve ``d alpha m_tilde(alpha) = s/n`` (d = 4 gives alpha*)."""
    if not 0 < s <= n:
        raise DomainError(f"need 0 < s <= n, got n={n}, s={s}")
    if d <= 0:
        raise DomainError("d must be positive")
    eta = s / n
    h = lambda la: math.log(d * math.exp(la) * m_tilde(model, math.exp(la))) - math.log(eta)
    top = h(0.0)
    if top < 0:
        raise DomainError(f"eta={eta:g} exceeds d * m_tilde(1)")
    if top == 0:
        log_alpha = 0.0
    else:
        lo = math.log(eta)
        while h(lo) > 0:
            lo -= 2.0
            if lo < -700:
                raise DomainError("alpha1 bracket search underflowed")
        log_alpha = optimize.brentq(h, lo, 0.0, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    alpha1 = math.exp(log_alpha)
    r_n, R_n = rate_quantities(n, s) if s < n else (float("nan"), float("nan"))
    return RateQuantities(n=n, s=s, eta=eta, r_n=r_n, R_n=R_n, zeta1=_zeta(model, alpha1),
                          alpha1=alpha1, d=float(d))


def signal_fraction(theta, tau):
    """Proportion of coordinates with ``|theta_i| >= tau``."""
    if tau < 0:
        raise DomainError("tau must be nonnegative")
    theta = np.asarray(theta, dtype=float)
    return float(np.count_nonzero(np.abs(theta) >= tau)) / theta.size


# -- inequality suite -----------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_margin: float
    worst_point: dict = field(default_factory=dict)
    detail: str = ""


@dataclass
class VerificationReport:
    model: str
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_json(self):
        return json.dumps({"model": self.model, "passed": self.passed,
                           "checks": [asdict(c) for c in self.checks]}, indent=2)

    def format_text(self):
        lines = [f"model {self.model}"]
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            where = "" if c.passed else f"  at {c.worst_point}"
            lines.append(f"  [{flag}] {c.name:<34s} worst margin {c.worst_margin: .3e}{where}")
        lines.append(f"{len(self.checks) - len(self.failures())}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def _margin_check(name, points, margins, detail=""):
    """A check passes when every margin is >= 0; reports the smallest."""
    margins = np.asarray(margins, dtype=float)
    i = int(np.argmin(margins))
    point = {k: float(v) for k, v in points[i].items()}
    return CheckResult(name, bool(margins[i] >= 0), float(margins[i]), point, detail)


ALPHA_GRID = (1e-6, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.3)
X_GRID = tuple(np.round(np.linspace(-8.0, 8.0, 33), 10))


def _check_sandwich(model: SasModel):
    ref = MarginalDensity(model.slab, "quad")
    pts, margins = [], []
    xs = np.array(X_GRID)
    ratio = ref.ratio(xs)
    for alpha in ALPHA_GRID + (0.5, 0.9):
        a = post.post_weight(model, alpha, xs)
        lower = alpha * ratio / np.maximum(ratio, 1.0)
        upper = np.minimum(1.0, alpha / (1.0 - alpha) * ratio)
        tol = 1e-12
        for x, ai, lo, hi in zip(xs, a, lower, upper):
            pts.append({"alpha": alpha, "x": x})
            margins.append(min(ai - lo, hi - ai) / max(hi, 1e-300) + tol)
    return _margin_check("sandwich a(x) bounds", pts, margins)


def _check_tail_weight(model: SasModel):
    pts, margins = [], []
    xs = np.linspace(0.0, 10.0, 101)
    for alpha in ALPHA_GRID:
        tt = post.tau_tilde(model, alpha)
        one_minus_a = 1.0 - post.post_weight(model, alpha, xs)
        bound = np.where(xs <= tt, 1.0, np.exp(-0.5 * (xs - tt) ** 2))
        for x, v, b in zip(xs, one_minus_a, bound):
            pts.append({"alpha": alpha, "x": x})
            margins.append(b - v + 1e-15)
    return _margin_check("1 - a(x) tail bound", pts, margins)


def _check_ordering(model: SasModel):
    pts, margins = [], []
    for alpha in ALPHA_GRID:
        th = post.thresholds(model, alpha)
        pts.append({"alpha": alpha, "tau": th.tau, "t": th.t, "zeta": th.zeta})
        margins.append(min(th.t - th.tau, th.zeta - th.t) + 1e-12)
    return _margin_check("threshold ordering tau <= t <= zeta", pts, margins)


def _check_half_weight(model: SasModel):
    pts, margins = [], []
    for alpha in ALPHA_GRID:
        tau = post.threshold_tau(model, alpha)
        err = abs(float(post.post_weight(model, alpha, tau)) - 0.5) if tau > 0 else 0.0
        pts.append({"alpha": alpha, "tau": tau})
        margins.append(1e-10 - err)
    return _margin_check("a(tau(alpha)) = 1/2", pts, margins)


def _check_shrinkage(model: SasModel):
    pts, margins = [], []
    xs = np.linspace(0.0, 12.0, 97)
    for alpha in ALPHA_GRID + (0.5, 0.9, 1.0):
        m = post.post_mean(model, alpha, xs)
        for x, v in zip(xs, m):
            pts.append({"alpha": alpha, "x": x})
            margins.append(min(v, x - v) + 1e-12 * (1 + x))
    return _margin_check("shrinkage 0 <= mean(x) <= x", pts, margins)


def _check_mtilde_increasing(model):
    alphas = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.3, 0.5)
    vals = [m_tilde(model, a) for a in alphas]
    pts = [{"alpha": a} for a in alphas[1:]]
    margins = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    margins = [min(m, vals[i + 1]) for i, m in enumerate(margins)]
    return _margin_check("m_tilde positive and increasing", pts, margins)


def _check_m1_decreasing(model):
    alphas = (1e-4, 1e-3, 1e-2, 0.1, 0.3, 0.6)
    pts, margins = [], []
    for mu in (0.0, 1.0, 3.0, 6.0):
        vals = [m1(model, mu, a) for a in alphas]
        for i in range(len(vals) - 1):
            pts.append({"mu": mu, "alpha": alphas[i + 1]})
            margins.append(vals[i] - vals[i + 1] + 1e-12 * abs(vals[i]))
    return _margin_check("m1 decreasing in alpha", pts, margins)


def _check_beta_bound(model):
    beta0 = float(_beta(model)(0.0))
    c1 = (1.0 + beta0) / abs(beta0)
    xs = np.linspace(-12.0, 12.0, 121)
    pts, margins = [], []
    for alpha in ALPHA_GRID + (0.5, 1.0):
        v = np.abs(score_summand(model, xs, alpha))
        bound = 1.0 / min(alpha, c1)
        for x, vi in zip(xs, v):
            pts.append({"alpha": alpha, "x": x})
            margins.append((bound - vi) / bound + 1e-12)
    return _margin_check("|beta(x, alpha)| <= 1/(alpha ^ c1)", pts, margins,
                         detail=f"c1 = {c1:.6g}")


def _negative_part(md, t):
    """``g_-(t)/phi(t) = int_0^inf exp(-t u - u^2/2) gamma(u) du``."""
    dens = md.slab.density
    f = lambda u: math.exp(-t * u - 0.5 * u * u) * float(dens(u))
    return integrate_1d(f, 0.0, GAUSS_HALF_WIDTH, rtol=1e-12)


def _check_alpha_A(model: SasModel):
    # With g/phi = 1 + beta = D + 2 g_-/phi and alpha_A = 1/(1 + D(t_A)),
    # 1 - alpha_A beta(t_A) = 2 (1 - g_-/phi) / (1 + D); this avoids the
    # rounding of the product to exactly 1 for heavy-tailed slabs.
    pts, margins = [], []
    for n in (10**3, 10**5, 10**7):
        for A in (0.0, 0.5, 1.0, 2.0):
            t_A = math.sqrt(2.0 * (1.0 + A) * math.log(n))
            D = float(model.md.half_difference(t_A))
            direct = 1.0 - post.threshold_t_inverse(model, t_A) * float(model.md.beta(t_A))
            stable = 2.0 * (1.0 - _negative_part(model.md, t_A)) / (1.0 + D)
            pts.append({"n": n, "A": A, "direct": direct})
            margins.append(stable)
    return _margin_check("alpha_A * beta(t_A) < 1", pts, margins)


def _check_zeta1_band(model, d=1.0):
    """Bounded-band check for zeta1^2/2 - log(n/s).

    The band constants are estimated on the first grid point and widened by
    one unit; the remaining points must stay inside.
    """
    kappa = model.slab.kappa if isinstance(model, SasModel) else 2.0
    grid = [(10**4, 10), (10**5, 10), (10**6, 10), (10**7, 10), (10**6, 100), (10**8, 100)]
    lows, highs = [], []
    for n, s in grid:
        rq = solve_alpha1(model, n, s, d)
        half = rq.zeta1**2 / 2.0
        lows.append(half - math.log(n / s))
        highs.append(half - math.log(n / s) - 0.5 * (kappa - 1.0) * math.log(math.log(n)))
    c1, c2 = lows[0] - 1.0, highs[0] + 1.0
    pts = [{"n": n, "s": s} for n, s in grid[1:]]
    margins = [min(lo - c1, c2 - hi) for lo, hi in zip(lows[1:], highs[1:])]
    return _margin_check("zeta1^2/2 band around log(n/s)", pts, margins,
                         detail=f"c1 = {c1:.4g}, c2 = {c2:.4g}")


# SSL ---------------------------------------------------------------------------

def _check_spike_near_phi(model: ssl.SslModel):
    # beyond 37 phi is subnormal and the ratios below lose meaning
    xs = np.concatenate([np.linspace(0.0, 10.0, 201),
                         [math.sqrt(2.0 * math.log(model.n)), min(model.lambda0 / 4, 37.0)]])
    g0 = ssl.g0_eval(model, xs)[0]
    phi = sp.std_normal(xs)
    inv_l2 = 1.0 / model.lambda0**2
    pts = [{"x": x} for x in xs]
    m_close = [(inv_l2 - abs(a - b)) / inv_l2 for a, b in zip(g0, phi)]
    m_low = [(a - b / 2) / max(b, 1e-300) for a, b in zip(g0, phi)]
    return [_margin_check("|g0 - phi| <= 1/lambda0^2", pts, m_close),
            _margin_check("g0 >= phi/2", pts, m_low)]


def _check_spike_upper(model: ssl.SslModel):
    xs = np.linspace(0.0, min(model.lambda0 / 2, 37.0), 401)
    g0, g0p, _ = ssl.g0_eval(model, xs)
    phi = sp.std_normal(xs)
    pts = [{"x": x} for x in xs]
    ok = np.where(phi > 0, (2.0 * phi - g0) / np.where(phi > 0, phi, 1.0), 1.0)
    rho, dlog0, _ = ssl.g0_parts(model.lambda0, xs)
    slope = (dlog0 + xs) + 1e-12 * (1.0 + xs)
    return [_margin_check("g0 <= 2 phi on [0, lambda0/2]", pts, ok),
            _margin_check("(log g0)' >= -x", pts, slope)]


def _check_ssl_monotone(model: ssl.SslModel):
    lo, hi = model.interval
    xs = np.linspace(lo, hi, 200)
    b = ssl.ssl_log_ratio(model, xs)
    pts = [{"x": x} for x in xs[1:]]
    return _margin_check("SSL beta increasing on J_n", pts, np.diff(b))


def _check_ssl_near_zero(model: ssl.SslModel):
    x = 2.0 * model.lambda1
    ratio = math.exp(float(ssl.ssl_log_ratio(model, x)))
    res = [_margin_check("(g1/g0)(2 lambda1) < 0.25", [{"x": x}], [0.25 - ratio])]
    xs = np.linspace(0.0, x, 21)
    b = ssl.ssl_beta(model, xs)
    res.append(_margin_check("SSL beta < 0 on [0, 2 lambda1]", [{"x": v} for v in xs], -b))
    return res


def _check_ssl_at_universal(model: ssl.SslModel):
    log_n = math.log(model.n)
    b = float(ssl.ssl_beta(model, math.sqrt(2.0 * log_n)))
    need = model.n / (model.calibration_constant * log_n)
    return _margin_check("beta(sqrt(2 log n)) >= n/(C log n)", [{"C": model.calibration_constant}],
                         [(b - need) / need])


def _check_ssl_thresholds(model: ssl.SslModel):
    pts, zeta_m, tau_m = [], [], []
    lo = model.alpha_lower
    for alpha in np.geomspace(lo * 1.01, 1.0, 8):
        th = ssl.ssl_thresholds(model, float(alpha))
        resid = abs(float(ssl.ssl_beta(model, th.zeta)) * alpha - 1.0)
        pts.append({"alpha": float(alpha)})
        zeta_m.append(1e-10 - resid)
        tau_m.append(th.tau_tilde - model.lambda1 + 1e-12)
    return [_margin_check("SSL beta(zeta) alpha = 1", pts, zeta_m),
            _margin_check("SSL tau_tilde >= lambda1", pts, tau_m)]


def verify_lemmas(model, report_sink=None, workers=1) -> VerificationReport:
    """Run every grid-checkable inequality for ``model`` and report margins.

    ``report_sink`` (optional) is called with each :class:`CheckResult`.
    """
    if isinstance(model, ssl.SslModel):
        jobs = [_check_spike_near_phi, _check_spike_upper, _check_ssl_monotone, _check_ssl_near_zero, _check_ssl_at_universal,
                _check_ssl_thresholds, _check_mtilde_increasing, _check_m1_decreasing]
        label = str(model)
    else:
        jobs = [_check_sandwich, _check_ordering, _check_half_weight, _check_shrinkage,
                _check_mtilde_increasing, _check_m1_decreasing, _check_beta_bound,
                _check_alpha_A, _check_zeta1_band]
        if model.slab.family != LAPLACE:
            jobs.insert(1, _check_tail_weight)
        label = f"sas:{model.n}:{model.slab}"
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outputs = list(pool.map(lambda job: job(model), jobs))
    checks = []
    for out in outputs:
        for c in out if isinstance(out, list) else [out]:
            checks.append(c)
            if report_sink is not None:
                report_sink(c)
    return VerificationReport(label, checks)
