"""Why the slab tails matter: R2/r_n as n grows, Laplace against Cauchy.

The posterior second moment risk of the Laplace slab grows faster than the
minimax rate r_n = 2 s log(n/s), while the Cauchy slab keeps pace. With a
handful of repetitions the trend is already visible; the acceptance suite
runs the same experiment with 50 repetitions up to n = 10^6.

    python demos/slab_tails.py [--reps 10]
"""
import argparse

from slab_eb import cauchy, laplace, rate_scaling_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    table = rate_scaling_experiment([laplace(1.0), cauchy(1.0)], [10**3, 10**4, 10**5], 10,
                                    args.reps, args.seed)
    print(f"{'slab':<10}{'n':>8}{'R2_hat':>10}{'r_n':>8}{'ratio':>8}{'R_n':>8}")
    for slab, n, s, r2, ratio, r_n, R_n, se, reps in table.rows:
        print(f"{slab:<10}{n:8d}{r2:10.1f}{r_n:8.1f}{ratio:8.3f}{R_n:8.2f}")


if __name__ == "__main__":
    main()
