"""The spike-and-slab LASSO prior: a Laplace spike instead of a point mass.

The spike rate lambda0 grows with n, so the spike is nearly a Dirac mass and
its marginal g0 is close to the standard normal density. This script prints
how far g0 is from phi, fits alpha on a sparse vector and shows the two
thresholds of the fitted posterior.

    python demos/ssl_prior.py
"""
import numpy as np

from slab_eb import SslModel, ssl_fit_mmle
from slab_eb.simulation import SignalConfig, gen_data, gen_signal, rep_rng
from slab_eb.ssl import g0_eval, ssl_post_mean, ssl_thresholds

N, S = 5000, 100


def main():
    model = SslModel(N)
    print(model, f" alpha lower end {model.alpha_lower:.4g}")
    grid = np.linspace(0.0, 6.0, 7)
    phi = np.exp(-grid**2 / 2) / np.sqrt(2 * np.pi)
    g0, _, _ = g0_eval(model, grid)
    gap = np.abs(g0 - phi)
    print("max |g0 - phi| on [0, 6]:", f"{gap.max():.2e}", " 1/lambda0^2:", f"{model.lambda0 ** -2:.2e}")

    theta = gen_signal(SignalConfig(N, S, 8.0))
    x = gen_data(theta, rep_rng(7, 0))
    fit = ssl_fit_mmle(model, x)
    if fit.at_lower_boundary:
        # the thresholds are only defined strictly above the lower end
        print("alpha_hat sits on the lower boundary; no thresholds")
        return
    th = ssl_thresholds(model, fit.alpha_hat)
    mean = ssl_post_mean(model, fit.alpha_hat, x)
    print(f"alpha_hat={fit.alpha_hat:.4g}  zeta={th.zeta:.3f}  tau={th.tau:.3f}")
    print(f"squared error of the posterior mean: {np.sum((mean - theta) ** 2):.2f}")


if __name__ == "__main__":
    main()
