"""Seeded Monte-Carlo risk experiments.

Each repetition draws ``X = theta0 + Z``, fits the mixing weight by marginal
maximum likelihood and then evaluates, exactly and without inner sampling,

    R2     = sum_i int (u - theta0_i)^2 dPi(u | X_i),
    Rmean  = sum_i (posterior mean_i - theta0_i)^2,
    Rmedian = sum_i (posterior median_i - theta0_i)^2.

The per-coordinate quantities ``log(g/phi)``, ``g'/g`` and ``g''/g`` are
computed once per data set and shared by the fit and all three risks.

Repetition ``r`` of a run with seed ``seed`` uses the Philox stream of
``SeedSequence(seed, spawn_key=(r,))``, so results do not depend on how
repetitions are spread over threads.
"""
from __future__ import annotations

import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ssl
from ._kernels import risk_sums
from .exceptions import ConfigurationError, DomainError, NumericalError
from .mmle import alpha_lower, fit_from_beta, modify_fit
from .posterior import SasModel, median_given_weight, median_laplace, threshold_t
from .slabs import LAPLACE, SlabSpec, laplace, quasi_cauchy
from .theory import rate_quantities

GENERATOR = "numpy.random.Philox(SeedSequence(seed, spawn_key=(rep,)))"


@dataclass(frozen=True)
class SignalConfig:
    """``s`` nonzero means on the first coordinates; ``value=None`` is sqrt(2 log(n/s))."""

    n: int
    s: int
    value: float | None = None

    def __post_init__(self):
        if not 0 <= self.s <= self.n:
            raise ConfigurationError(f"need 0 <= s <= n, got n={self.n}, s={self.s}")

    @property
    def signal(self):
        if self.value is not None:
            return float(self.value)
        if self.s == 0:
            return 0.0
        return math.sqrt(2.0 * math.log(self.n / self.s))

    @classmethod
    def from_cli(cls, n, s, signal="auto"):
        return cls(int(n), int(s), None if signal == "auto" else float(signal))


def gen_signal(cfg: SignalConfig):
    theta = np.zeros(cfg.n)
    theta[: cfg.s] = cfg.signal
    return theta


def rep_rng(seed, rep):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(rep,))))


def gen_data(theta0, rng):
    return theta0 + rng.standard_normal(theta0.shape[0])


@dataclass
class RiskEstimate:
    R2_hat: float
    Rmean_hat: float
    Rmedian_hat: float
    per_rep: dict
    stderr: dict
    reps: int
    seed: int
    wall_time: float
    model: str = ""

    @classmethod
    def from_reps(cls, per_rep, seed, wall_time, model=""):
        reps = len(per_rep["r2"])

        def se(v):
            v = np.asarray(v, float)
            return float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("nan")

        return cls(
            R2_hat=float(np.mean(per_rep["r2"])),
            Rmean_hat=float(np.mean(per_rep["mean"])),
            Rmedian_hat=float(np.mean(per_rep["median"])),
            per_rep=per_rep,
            stderr={k: se(per_rep[k]) for k in ("r2", "mean", "median")},
            reps=reps,
            seed=seed,
            wall_time=wall_time,
            model=model,
        )


# -- per-rep engines ---------------------------------------------------------

class _SasEngine:
    def __init__(self, model: SasModel, modified=None):
        self.model = model
        self.modified = modified
        self.lower = alpha_lower(model)
        self.laplace = model.slab.family == LAPLACE and model.md.backend == "closed"

    def label(self):
        return f"sas:{self.model.slab}"

    def fit(self, x):
        ev = self.model.md.evaluate(x)
        with np.errstate(over="ignore"):
            beta = np.expm1(ev.log_ratio)
        fit = fit_from_beta(self.model, beta, self.lower)
        if self.modified is not None:
            fit = modify_fit(self.model, fit, self.modified)
        return ev, fit

    def risks(self, x, theta, ev, alpha):
        if alpha == 0:
            logit = -math.inf
        elif alpha == 1:
            logit = math.inf
        else:
            logit = math.log(alpha) - math.log1p(-alpha)
        w = np.empty_like(x)
        r2, rmean = risk_sums(x, theta, ev.log_ratio, ev.dlog, ev.d2, logit, w)
        # The median vanishes for |x| <= t(alpha); only the rest needs work.
        if alpha == 0:
            sel = np.zeros(x.shape, bool)
        elif alpha == 1:
            sel = np.ones(x.shape, bool)
        else:
            sel = np.abs(x) > threshold_t(self.model, alpha)
        if self.laplace:
            med = median_laplace(self.model.slab.param, w[sel], x[sel])
        else:
            med = median_given_weight(self.model.md, w[sel], x[sel])
        rmed = float(np.sum(theta[~sel] ** 2) + np.sum((med - theta[sel]) ** 2))
        return r2, rmean, rmed


class _SslEngine:
    def __init__(self, model: ssl.SslModel, median=True):
        self.model = model
        self.median = median

    def label(self):
        return str(self.model)

    def fit(self, x):
        return None, ssl.ssl_fit_from_beta(self.model, ssl.ssl_beta(self.model, x))

    def risks(self, x, theta, ev, alpha):
        m = self.model
        r2 = float(np.sum(ssl.ssl_r2(m, alpha, theta, x)))
        rmean = float(np.sum((ssl.ssl_post_mean(m, alpha, x) - theta) ** 2))
        rmed = (float(np.sum((ssl.ssl_post_median(m, alpha, x) - theta) ** 2))
                if self.median else float("nan"))
        return r2, rmean, rmed


def _engine(model, modified, median):
    if isinstance(model, ssl.SslModel):
        if modified is not None:
            raise ConfigurationError("the modified estimator is defined for SAS models only")
        return _SslEngine(model, median)
    if isinstance(model, SasModel):
        return _SasEngine(model, modified)
    raise ConfigurationError(f"unsupported model {model!r}")


def run_rep(engine, theta, seed, rep, alpha_override=None):
    """One repetition; returns (alpha, r2, rmean, rmedian)."""
    try:
        x = gen_data(theta, rep_rng(seed, rep))
        ev, fit = engine.fit(x)
        alpha = fit.alpha if alpha_override is None else float(alpha_override)
        return (alpha,) + tuple(engine.risks(x, theta, ev, alpha))
    except (ArithmeticError, ValueError) as exc:
        raise NumericalError(f"repetition {rep} (seed {seed}) failed: {exc}") from exc


def estimate_risks(model, cfg: SignalConfig, reps, seed, modified=None, threads=1,
                   alpha_override=None, median=True) -> RiskEstimate:
    """Average the three exact risks over ``reps`` seeded repetitions.

    ``modified`` is the constant A of the modified estimator (None for the
    plain MMLE). ``alpha_override`` bypasses the fit; it is a test hook.
    """
    if reps < 1:
        raise DomainError("reps must be at least 1")
    if cfg.n != model.n:
        raise ConfigurationError(f"signal has n={cfg.n} but the model has n={model.n}")
    engine = _engine(model, modified, median)
    theta = gen_signal(cfg)
    start = time.perf_counter()
    job = lambda r: run_rep(engine, theta, seed, r, alpha_override)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(job, range(reps)))
    else:
        rows = [job(r) for r in range(reps)]
    rows = np.array(rows, dtype=float)
    per_rep = {"alpha": rows[:, 0], "r2": rows[:, 1], "mean": rows[:, 2], "median": rows[:, 3]}
    return RiskEstimate.from_reps(per_rep, seed, time.perf_counter() - start, engine.label())


# -- experiments ---------------------------------------------------------------

@dataclass
class Table:
    """Rows of named columns plus the comment header lines of the CSV."""

    columns: list
    rows: list = field(default_factory=list)
    header: dict = field(default_factory=dict)

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        for key, value in self.header.items():
            buf.write(f"# {key}={value}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


TABLE1_COLUMNS = ["slab", "a", "second_moment", "median", "mean",
                  "se_second_moment", "se_median", "se_mean", "reps"]


def table1_experiment(a_values, n, s, reps, seed, threads=1, modified=None,
                      quasi_cauchy_row=False) -> Table:
    """Risks of the Laplace(a) slab for each a, all rows on the same data sets."""
    if any(not a > 0 for a in a_values):
        raise DomainError("Laplace scales must be positive")
    cfg = SignalConfig(n, s)
    slabs = [laplace(float(a)) for a in a_values]
    if quasi_cauchy_row:
        slabs.append(quasi_cauchy())
    table = Table(TABLE1_COLUMNS, header=_header(seed, f"sas n={n} s={s} signal=auto "
                                                       f"modified={modified}"))
    for slab in slabs:
        est = estimate_risks(SasModel(n, slab), cfg, reps, seed, modified, threads)
        a = slab.param if slab.family == LAPLACE else float("nan")
        table.rows.append([str(slab), a, est.R2_hat, est.Rmedian_hat, est.Rmean_hat,
                           est.stderr["r2"], est.stderr["median"], est.stderr["mean"], reps])
    return table


RATES_COLUMNS = ["slab", "n", "s", "second_moment", "ratio_to_rate", "r_n", "R_n",
                 "se_second_moment", "reps"]


def rate_scaling_experiment(slabs, n_grid, s, reps, seed, threads=1) -> Table:
    """``R2_hat / r_n`` across ``n`` for each slab; Laplace grows, Cauchy stays flat."""
    table = Table(RATES_COLUMNS, header=_header(seed, f"sas s={s} signal=auto"))
    for slab in slabs:
        if isinstance(slab, str):
            slab = SlabSpec.parse(slab)
        for n in n_grid:
            est = estimate_risks(SasModel(int(n), slab), SignalConfig(int(n), s), reps, seed,
                                 threads=threads)
            r_n, R_n = rate_quantities(int(n), s)
            table.rows.append([str(slab), int(n), s, est.R2_hat, est.R2_hat / r_n, r_n, R_n,
                               est.stderr["r2"], reps])
    return table


def risk_table(est: RiskEstimate, cfg: SignalConfig) -> Table:
    cols = ["rep", "alpha", "second_moment", "median", "mean"]
    table = Table(cols, header=_header(est.seed, f"{est.model} n={cfg.n} s={cfg.s} "
                                                 f"signal={cfg.signal!r}"))
    p = est.per_rep
    for r in range(est.reps):
        table.rows.append([r, p["alpha"][r], p["r2"][r], p["median"][r], p["mean"][r]])
    table.rows.append(["mean", float(np.mean(p["alpha"])), est.R2_hat, est.Rmedian_hat,
                       est.Rmean_hat])
    table.rows.append(["stderr", float("nan"), est.stderr["r2"], est.stderr["median"],
                       est.stderr["mean"]])
    return table


def _header(seed, model):
    return {"seed": seed, "model": model, "generator": GENERATOR}
