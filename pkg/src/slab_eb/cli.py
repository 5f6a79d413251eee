"""Command line entry point ``slab-eb``.

    slab-eb fit --model sas --slab cauchy:1 --in data.txt
    slab-eb risk --model sas --slab lap:1 --n 10000000 --s 10 --reps 100 --seed 42
    slab-eb table1 --a 0.5,1,1.5,2,2.5,3,3.5 --n 10000000 --s 10 --reps 100
    slab-eb rates --n 10000 --s 10
    slab-eb verify --model ssl --n 1000
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import ssl
from .exceptions import ConfigurationError, DomainError, NumericalError
from .mmle import fit_mmle, modify_fit
from .posterior import SasModel
from .simulation import (
    SignalConfig,
    Table,
    estimate_risks,
    rate_scaling_experiment,
    risk_table,
    table1_experiment,
)
from .slabs import SlabSpec
from .theory import rate_quantities, solve_alpha1, verify_lemmas


def _add_model_args(p, with_n=True):
    p.add_argument("--model", type=_model_kind, default="sas",
                   help="sas, ssl, or ssl:<n>[:lambda0=<v>][:lambda1=<v>][:slab1=cauchy|lap]")
    p.add_argument("--slab", default="lap:1", help="lap:<a>, cauchy:<lambda> or quasicauchy")
    if with_n:
        p.add_argument("--n", type=_int, required=True)
    p.add_argument("--lambda0", type=float, default=None, help="SSL spike rate")
    p.add_argument("--lambda1", type=float, default=ssl.L1_DEFAULT, help="SSL slab parameter")
    p.add_argument("--slab1", choices=("cauchy", "lap"), default="cauchy")


def _int(text):
    # accept 1e7 as well as 10000000
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not an integer: {text}")
    return int(value)


def _model_kind(text):
    if text in ("sas", "ssl") or text.startswith("ssl:"):
        return text
    raise argparse.ArgumentTypeError(f"unknown model {text!r}")


def _build_model(args, n):
    if args.model.startswith("ssl:"):
        model = ssl.SslModel.parse(args.model)
        if model.n != n:
            raise ConfigurationError(f"model string has n={model.n} but the data has n={n}")
        return model
    if args.model == "ssl":
        return ssl.SslModel(n, args.lambda0, args.lambda1, args.slab1)
    return SasModel(n, SlabSpec.parse(args.slab))


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _read_data(path, fmt):
    if fmt == "f64le":
        if path == "-":
            return np.frombuffer(sys.stdin.buffer.read(), dtype="<f8").astype(float)
        return np.fromfile(path, dtype="<f8").astype(float)
    src = sys.stdin if path == "-" else path
    return np.loadtxt(src, dtype=float, ndmin=1)


def cmd_fit(args):
    data = _read_data(args.input, args.format)
    if data.size < 2:
        raise DomainError("need at least two observations")
    model = _build_model(args, data.size)
    if isinstance(model, ssl.SslModel):
        fit = ssl.ssl_fit_mmle(model, data)
    else:
        fit = fit_mmle(model, data)
        if args.modified is not None:
            fit = modify_fit(model, fit, args.modified)
    label = str(model) if isinstance(model, ssl.SslModel) else f"sas:{model.slab}"
    out = {"model": label, "n": int(data.size)}
    out.update(fit.as_dict())
    print(json.dumps(out, indent=2))
    return 0


def cmd_risk(args):
    model = _build_model(args, args.n)
    cfg = SignalConfig.from_cli(args.n, args.s, args.signal)
    est = estimate_risks(model, cfg, args.reps, args.seed, args.modified, args.threads,
                         median=not args.no_median)
    _write(risk_table(est, cfg).to_csv(), args.out)
    print(f"R2 {est.R2_hat:.6g}  mean {est.Rmean_hat:.6g}  median {est.Rmedian_hat:.6g}  "
          f"({est.reps} reps, {est.wall_time:.1f} s)", file=sys.stderr)
    return 0


def cmd_table1(args):
    a_values = [float(v) for v in args.a.split(",") if v]
    table = table1_experiment(a_values, args.n, args.s, args.reps, args.seed, args.threads,
                              args.modified, quasi_cauchy_row=args.quasi_cauchy)
    _write(table.to_csv(), args.out)
    return 0


def cmd_rates(args):
    r_n, R_n = rate_quantities(args.n, args.s)
    slab = SlabSpec.parse(args.slab)
    rq = solve_alpha1(SasModel(args.n, slab), args.n, args.s, args.d)
    table = Table(["n", "s", "slab", "d", "r_n", "R_n", "zeta1", "alpha1"],
                  header={"model": f"sas:{slab}"})
    table.rows.append([args.n, args.s, str(slab), float(args.d), r_n, R_n,
                       math.nan if rq.zeta1 is None else rq.zeta1, rq.alpha1])
    _write(table.to_csv(), args.out)
    return 0


def cmd_scaling(args):
    slabs = [SlabSpec.parse(v) for v in args.slabs.split(",") if v]
    n_grid = [_int(v) for v in args.n_grid.split(",") if v]
    table = rate_scaling_experiment(slabs, n_grid, args.s, args.reps, args.seed, args.threads)
    _write(table.to_csv(), args.out)
    return 0


def cmd_verify(args):
    model = _build_model(args, args.n)
    report = verify_lemmas(model, workers=args.threads)
    if args.json == "-":
        print(report.to_json())
    else:
        print(report.format_text())
        if args.json:
            with open(args.json, "w") as fh:
                fh.write(report.to_json())
    return 0 if report.passed else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="slab-eb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="marginal maximum likelihood for one data vector")
    _add_model_args(p, with_n=False)
    p.add_argument("--in", dest="input", default="-", help="data file ('-' for stdin)")
    p.add_argument("--format", choices=("txt", "f64le"), default="txt")
    p.add_argument("--modified", type=float, default=None, metavar="A")
    p.set_defaults(func=cmd_fit)

    def experiment_args(p, s_default=None):
        p.add_argument("--s", type=_int, required=s_default is None, default=s_default)
        p.add_argument("--reps", type=_int, default=100)
        p.add_argument("--seed", type=_int, default=0)
        p.add_argument("--threads", type=_int, default=1)
        p.add_argument("--out", default="-")

    p = sub.add_parser("risk", help="Monte-Carlo risks of the plug-in posterior")
    _add_model_args(p)
    experiment_args(p)
    p.add_argument("--signal", default="auto", help="'auto' for sqrt(2 log(n/s)) or a value")
    p.add_argument("--modified", type=float, default=None, metavar="A")
    p.add_argument("--no-median", action="store_true")
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("table1", help="risks across Laplace slab scales")
    p.add_argument("--a", default="0.5,1,1.5,2,2.5,3,3.5")
    p.add_argument("--n", type=_int, default=10**7)
    experiment_args(p, s_default=10)
    p.add_argument("--modified", type=float, default=None, metavar="A")
    p.add_argument("--quasi-cauchy", action="store_true", help="append a quasi-Cauchy row")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("rates", help="minimax rate, R_n and the zeta1/alpha1 calibration")
    p.add_argument("--n", type=_int, required=True)
    p.add_argument("--s", type=_int, required=True)
    p.add_argument("--slab", default="cauchy:1")
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("scaling", help="R2/r_n across n for several slabs")
    p.add_argument("--slabs", default="lap:1,cauchy:1")
    p.add_argument("--n-grid", default="10000,100000,1000000")
    experiment_args(p)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("verify", help="grid checks of the posterior inequalities")
    _add_model_args(p)
    p.add_argument("--threads", type=_int, default=1)
    p.add_argument("--json", default=None, help="write JSON report here ('-' for stdout only)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DomainError, NumericalError) as exc:
        print(f"slab-eb: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
