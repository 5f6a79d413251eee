"""Fit the mixing weight on one sparse vector and look at the plug-in posterior.

Twenty nonzero means sit at sqrt(2 log(n/s)) among n = 10^5 noise
coordinates. We fit alpha by marginal maximum likelihood for a Laplace and a
Cauchy slab, print the resulting thresholds and count how many coordinates
each posterior median keeps.

    python demos/sparse_fit.py
"""
import math

import numpy as np

from slab_eb import SasModel, cauchy, fit_mmle, laplace, post_mean, post_median, thresholds
from slab_eb.simulation import SignalConfig, gen_data, gen_signal, rep_rng

N, S = 10**5, 20


def main():
    cfg = SignalConfig(N, S)
    theta = gen_signal(cfg)
    x = gen_data(theta, rep_rng(2024, 0))
    print(f"n={N}  s={S}  signal={cfg.signal:.3f}  universal threshold={math.sqrt(2 * math.log(N)):.3f}")
    print(f"{'slab':<10}{'alpha_hat':>12}{'t':>8}{'zeta':>8}{'kept':>6}{'loss(median)':>14}{'loss(mean)':>12}")
    for slab in (laplace(1.0), cauchy(1.0)):
        model = SasModel(N, slab)
        fit = fit_mmle(model, x)
        th = thresholds(model, fit.alpha_hat)
        med = post_median(model, fit.alpha_hat, x)
        mean = post_mean(model, fit.alpha_hat, x)
        kept = int(np.count_nonzero(med))
        print(f"{str(slab):<10}{fit.alpha_hat:12.3e}{th.t:8.3f}{th.zeta:8.3f}{kept:6d}"
              f"{np.sum((med - theta) ** 2):14.2f}{np.sum((mean - theta) ** 2):12.2f}")
    # the median is a thresholding rule: zero exactly on |x| <= t
    print("expected loss of the zero estimator:", float(np.sum(theta**2)))


if __name__ == "__main__":
    main()
