"""Command-line front end: ``covtest {test,path,simulate-null,power,qq}``.

Exit codes: 0 success, 1 failed KKT verification, 2 usage or input error,
3 numerical degeneracy (knot tie, rank failure).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .covariance_test import ChiSq1, ExpScale, FTwo, test_sequence
from .design import DesignMatrix, center, read_csv, standardize
from .elastic_net import ElasticNetProblem, enet_test_sequence
from .exceptions import CovTestError, InputError, NumericalError
from .lasso_path import compute_path, kkt_report, write_coefficients_csv, write_path_csv
from .simulation import (SimulationConfig, null_table, power_curve, qq_data,
                         step_statistics, stepwise_statistics)

SEED_ENV = "COVTEST_SEED"


def _g(x):
    return f"{x:.17g}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _load(args):
    X, y, names, _ = read_csv(args.csv, header=not args.no_header, response=args.response)
    if args.center:
        dm, y = center(DesignMatrix(X, names=tuple(names)), y)
    else:
        dm = DesignMatrix(X, names=tuple(names))
    if args.standardize:
        dm = standardize(dm)
    return dm, y


def _data_flags(p):
    p.add_argument("csv", help="input CSV; the response is the last column unless --response is given")
    p.add_argument("--no-header", action="store_true", help="the first row is data, not column names")
    p.add_argument("--response", help="response column name (or 0-based index without a header)")
    p.add_argument("--center", dest="center", action="store_true", default=True,
                   help="center y and the columns of X (default)")
    p.add_argument("--no-center", dest="center", action="store_false")
    p.add_argument("--standardize", action="store_true", help="scale columns of X to unit norm")
    p.add_argument("-o", "--output", help="write here instead of stdout, plus a .manifest.json sidecar")


def _sim_flags(p, default_reps):
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--corr", default="equal-data",
                   choices=["orthogonal", "equal-data", "equal-population", "ar1", "block"])
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--reps", type=int, default=default_reps)
    p.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV} or 0")
    p.add_argument("--k-true", type=int, default=0, help="number of leading nonzero true coefficients")
    p.add_argument("--beta-value", type=float, default=4.0, help="value of each nonzero true coefficient")
    p.add_argument("--sigma", type=float, default=1.0, help="noise standard deviation")
    p.add_argument("--step", type=int, default=None, help="entry step to test (default k-true + 1)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output")


def _config(args, **extra):
    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, "0"))
    args.seed = seed
    step = args.step if args.step is not None else args.k_true + 1
    return SimulationConfig(
        n=args.n, p=args.p, correlation=args.corr.replace("-", "_"), rho=args.rho,
        beta_spec=tuple((i, args.beta_value) for i in range(args.k_true)),
        sigma=args.sigma, replications=args.reps, seed=seed, step_to_test=step, **extra)


def cmd_test(args, out):
    dm, y = _load(args)
    if args.estimate_sigma:
        if args.gamma:
            raise InputError("--estimate-sigma cannot be combined with --gamma > 0")
        sigma2 = "estimate"
    else:
        if not args.sigma > 0:
            raise InputError("--sigma must be positive")
        sigma2 = args.sigma ** 2
    if args.gamma:
        results = enet_test_sequence(ElasticNetProblem(dm, y, args.gamma), sigma2, args.max_steps)
    else:
        results = test_sequence(dm, y, sigma2, max_steps=args.max_steps)
    cols = ["step", "variable", "lambda_k", "lambda_k+1", "statistic", "form", "null_law", "p_value"]
    if args.gamma:
        cols += ["scaled_statistic", "scaled_p_value"]
    rows = []
    for r in results:
        row = [r.step, dm.names[r.variable], r.lambda_k, r.lambda_next, r.statistic,
               r.form, str(r.null_law), r.p_value]
        if args.gamma:
            row += [r.scaled_statistic, r.scaled_p_value]
        rows.append(dict(zip(cols, row)))
    if args.format == "json":
        json.dump(rows, out, indent=2)
        out.write("\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_g(v) if isinstance(v, float) else v for v in row.values()])


def cmd_path(args, out):
    dm, y = _load(args)
    if args.verify:
        return _verify(args, dm, y, out)
    path = compute_path(dm, y, max_steps=args.max_steps, lambda_min=args.lambda_min)
    write_path_csv(path, out)
    if args.coef_out:
        with open(args.coef_out, "w", newline="") as fh:
            write_coefficients_csv(path, fh, list(dm.names))
    for note in path.notes:
        print(f"note: {note}", file=sys.stderr)


def _verify(args, dm, y, out):
    with open(args.verify, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["k", "lambda"] or len(rows[0]) != dm.p + 2:
        raise InputError(f"{args.verify}: not a coefficient table for {dm.p} predictors")
    checked = bad = 0
    worst = 0.0
    for row in rows[1:]:
        lam = float(row[1])
        beta = np.array([float(v) for v in row[2:]])
        rep = kkt_report(dm, y, beta, lam, tol=args.tol)
        checked += 1
        bad += rep.violations.size
        worst = max(worst, rep.max_violation)
    out.write(f"knots_checked,{checked}\nviolations,{bad}\nmax_violation,{_g(worst)}\n")
    return 0 if bad == 0 else 1


_SUMMARY_COLS = ["correlation", "rho", "n", "p", "k_true", "step", "reps", "mean", "var", "tail",
                 "se_mean", "se_var", "se_tail", "discarded_fraction", "q95_reference"]


def cmd_simulate_null(args, out):
    cfg = _config(args, estimate_sigma=args.estimate_sigma)
    s = null_table(cfg, threads=args.threads)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(_SUMMARY_COLS)
    w.writerow([cfg.correlation, _g(cfg.rho), cfg.n, cfg.p, args.k_true, cfg.step_to_test,
                cfg.replications, *(_g(v) for v in (s.mean, s.variance, s.tail_prob, s.se_mean,
                                                     s.se_variance, s.se_tail, s.discarded_fraction,
                                                     s.q95_reference))])


def cmd_power(args, out):
    cfg = _config(args)
    try:
        effects = [float(e) for e in args.effects.split(",") if e.strip()]
    except ValueError:
        raise InputError(f"cannot parse --effects {args.effects!r}") from None
    curve = power_curve(cfg, effects, threads=args.threads)
    w = csv.writer(out, lineterminator="\n")
    fields = ["effect", "covtest_exp_rate", "covtest_exp_se", "lasso_calibrated_rate",
              "lasso_calibrated_se", "stepwise_calibrated_rate", "stepwise_calibrated_se",
              "stepwise_chisq_rate", "stepwise_chisq_se"]
    w.writerow(fields + ["lasso_cutpoint", "stepwise_cutpoint", "null_stepwise_chisq_rate"])
    for pt in curve.points:
        w.writerow([_g(getattr(pt, f)) for f in fields]
                   + [_g(curve.lasso_cutpoint), _g(curve.stepwise_cutpoint),
                      _g(curve.null_stepwise_chisq_rate)])


def cmd_qq(args, out):
    cfg = _config(args, estimate_sigma=args.stat == "covtest" and args.law == "f")
    if args.stat == "stepwise":
        samples = stepwise_statistics(cfg, threads=args.threads)
    else:
        values, discarded = step_statistics(cfg, (cfg.step_to_test,), threads=args.threads)
        samples = values[~discarded, 0]
        samples = samples[np.isfinite(samples)]
    law = args.law or ("chisq1" if args.stat == "stepwise" else "exp")
    dist = {"exp": ExpScale(args.scale), "f": FTwo(cfg.n - cfg.p), "chisq1": ChiSq1()}[law]
    theo, emp = qq_data(samples, dist)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["theoretical", "empirical"])
    for a, b in zip(theo, emp):
        w.writerow([_g(a), _g(b)])


def build_parser():
    parser = _Parser(prog="covtest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="covariance test for each variable entering the lasso path")
    _data_flags(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--sigma", type=float, help="known noise standard deviation")
    g.add_argument("--estimate-sigma", action="store_true",
                   help="estimate sigma^2 from the full least-squares fit (needs n > p)")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--gamma", type=float, default=0.0, help="elastic-net ridge weight")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("path", help="export the knots of the lasso path")
    _data_flags(p)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--lambda-min", type=float, default=0.0)
    p.add_argument("--coef-out", help="also write the wide table of coefficients at each knot")
    p.add_argument("--verify", metavar="COEF_CSV",
                   help="re-check KKT conditions for a coefficient table written by --coef-out")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("simulate-null", help="Monte Carlo null summary of the statistic")
    _sim_flags(p, 500)
    p.add_argument("--estimate-sigma", action="store_true", help="use the F statistic with estimated sigma^2")
    p.set_defaults(func=cmd_simulate_null)

    p = sub.add_parser("power", help="power curves of the covariance test and forward stepwise")
    _sim_flags(p, 1000)
    p.add_argument("--effects", default="0,1,2,3,4,5", help="comma-separated effect sizes")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("qq", help="quantile-quantile pairs of a simulated statistic")
    _sim_flags(p, 1000)
    p.add_argument("--stat", choices=["covtest", "stepwise"], default="covtest")
    p.add_argument("--law", choices=["exp", "f", "chisq1"], default=None)
    p.add_argument("--scale", type=float, default=1.0, help="scale of the Exp law")
    p.set_defaults(func=cmd_qq)
    return parser


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(args, elapsed):
    inputs = {}
    for key in ("csv", "verify"):
        path = getattr(args, key, None)
        if path:
            inputs[path] = _digest(path)
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {"subcommand": args.command, "flags": flags, "inputs": inputs,
                "seed": getattr(args, "seed", None), "version": __version__,
                "duration_seconds": elapsed}
    with open(args.output + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv=None):
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        buf = io.StringIO()
        status = args.func(args, buf) or 0
        if args.output:
            with open(args.output, "w", newline="") as fh:
                fh.write(buf.getvalue())
            _write_manifest(args, time.perf_counter() - start)
        else:
            sys.stdout.write(buf.getvalue())
        return status
    except NumericalError as exc:
        print(f"covtest: numerical degeneracy: {exc}", file=sys.stderr)
        return 3
    except (CovTestError, OSError, ValueError) as exc:
        print(f"covtest: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
