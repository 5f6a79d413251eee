"""Empirical Bayes spike-and-slab posteriors for the sparse normal means model.

The main entry points:

* :class:`SlabSpec`, :class:`MarginalDensity` -- slab distributions and the
  marginal density ``g = phi * gamma`` with its first two derivatives;
* :class:`SasModel` and the posterior functionals in :mod:`slab_eb.posterior`;
* :func:`fit_mmle` -- marginal maximum likelihood for the mixing weight;
* :class:`SslModel` -- the spike-and-slab LASSO variant;
* :mod:`slab_eb.theory` -- score moments, calibration and inequality checks;
* :mod:`slab_eb.simulation` -- seeded risk experiments.
"""
from .exceptions import ConfigurationError, DomainError, NumericalError
from .mmle import EbFit, fit_mmle, fit_modified, log_marginal, score
from .posterior import (
    SasModel,
    cond_moment,
    post_mean,
    post_median,
    post_weight,
    risk_r2,
    risk_r4,
    threshold_t,
    threshold_t_inverse,
    threshold_tau,
    threshold_zeta,
    thresholds,
)
from .simulation import (
    RiskEstimate,
    SignalConfig,
    estimate_risks,
    gen_data,
    gen_signal,
    rate_scaling_experiment,
    table1_experiment,
)
from .slabs import MarginalDensity, SlabSpec, cauchy, laplace, quasi_cauchy
from .ssl import SslModel, ssl_fit_mmle
from .theory import (
    m1,
    m2,
    m_tilde,
    rate_quantities,
    signal_fraction,
    solve_alpha1,
    verify_lemmas,
)

__version__ = "0.1.0"
