"""Command-line interface.

Subcommands: ``fit`` (CSV in, coefficient/interval/support JSON out),
``simulate`` (experiment spec in, metrics report JSON + per-replication CSV
out), ``mspe`` (k-fold prediction error on a dataset), ``probe`` (lemma and
tail-bound checks as CSV), ``density`` (marginal-density grid as CSV).

Exit codes: 0 success, 2 domain error, 3 numeric error, 4 I/O error.
"""

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict

import numpy as np

from .bench import ExperimentSpec, cross_validated_mspe, run_experiment
from .dss import dss_select
from .errors import DataError, DomainError, NbpError, NumericError
from .gibbs import McemConfig, run_mcem
from .model import NbpHyperparams, standardize
from .rand_dist import RngStream
from .theory import (
    lemma1_ratio,
    marginal_density_grid,
    stochastic_dominance_check,
    tail_mass_bound,
)
from .varem import VarEmConfig, run_var_em, varem_posterior_summary

SCHEMA_VERSION = 1


def _read_csv(path, response):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataError(f"{path}: empty file")
            rows = [row for row in reader if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    header = [h.strip() for h in header]
    if response not in header:
        raise DataError(f"{path}: response column {response!r} not in header {header}")
    ridx = header.index(response)
    try:
        mat = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric cell ({exc})") from exc
    if mat.ndim != 2 or mat.shape[1] != len(header):
        raise DataError(f"{path}: ragged rows")
    y = mat[:, ridx]
    X = np.delete(mat, ridx, axis=1)
    names = [h for i, h in enumerate(header) if i != ridx]
    return X, y, names


def _write_text(path, text):
    try:
        if path is None or path == "-":
            sys.stdout.write(text)
        else:
            with open(path, "w") as fh:
                fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def _engine_configs(args):
    mcem = McemConfig(
        total_iters=args.iters,
        burn_in=args.burnin,
        em_block=args.em_block,
        em_tol=args.em_tol,
        seed=args.seed,
        a0=args.a0,
        b0=args.b0,
    )
    varem = VarEmConfig(tol=args.em_tol if args.em_tol != 1e-6 else 1e-3, a0=args.a0, b0=args.b0)
    return mcem, varem


def _fit_engine(data, args):
    mcem_cfg, varem_cfg = _engine_configs(args)
    if args.engine == "mcem":
        hyper = NbpHyperparams(args.a0, args.b0, args.c, args.d)
        summary = run_mcem(data, mcem_cfg, hyper_init=hyper)
    else:
        fit = run_var_em(data, varem_cfg)
        summary = varem_posterior_summary(fit.params, fit.a_hat, fit.b_hat, fit.ab_trace)
    return summary


def cmd_fit(args):
    X, y, _names = _read_csv(args.data, args.response)
    t0 = time.time()
    data = standardize(X, y)
    summary = _fit_engine(data, args)
    sel = dss_select(data.X, summary.beta_mean, folds=args.folds, rng=RngStream(args.seed, 777))
    report = {
        "schema_version": SCHEMA_VERSION,
        "engine": args.engine,
        "a_hat": summary.a_hat,
        "b_hat": summary.b_hat,
        "beta_median": summary.beta_median.tolist(),
        "beta_mean": summary.beta_mean.tolist(),
        "ci_lower": summary.credible_lower.tolist(),
        "ci_upper": summary.credible_upper.tolist(),
        "support": [int(i) for i in sel.support],
        "em_trace": [[float(a), float(b)] for a, b in summary.em_trace],
        "elapsed_seconds": time.time() - t0,
    }
    _write_text(args.out, json.dumps(report, indent=2) + "\n")
    return 0


def cmd_simulate(args):
    if args.spec_json:
        try:
            with open(args.spec_json) as fh:
                spec = ExperimentSpec(**json.load(fh))
        except OSError as exc:
            raise DataError(f"cannot read {args.spec_json}: {exc}") from exc
        except TypeError as exc:
            raise DomainError(f"bad spec fields: {exc}") from exc
    else:
        spec = ExperimentSpec(
            n=args.n,
            p=args.p,
            n_active=args.n_active,
            signal_law=args.signal_law,
            signal_lo=args.signal_lo,
            signal_hi=args.signal_hi,
            signal_value=args.signal_value,
            sigma2_true=args.sigma2,
            correlation_rho=args.rho,
            replications=args.replications,
            seed=args.seed,
            engine=args.engine,
            fixed_support=args.fixed_support,
        )
    mcem_cfg, varem_cfg = _engine_configs(args)
    t0 = time.time()
    report = run_experiment(
        spec, engine_config=mcem_cfg if spec.engine == "mcem" else varem_cfg, threads=args.threads
    )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "spec": asdict(spec),
        "mse": report.mse,
        "fdr": report.fdr,
        "fnr": report.fnr,
        "mp": report.mp,
        "se": report.se,
        "n_failed": report.n_failed,
        "failures": report.failures,
        "elapsed_seconds": time.time() - t0,
    }
    base = args.out or "-"
    if base == "-":
        _write_text(None, json.dumps(payload, indent=2) + "\n")
    else:
        _write_text(base + ".json", json.dumps(payload, indent=2) + "\n")
        cols = ["replication", "mse", "fdr", "fnr", "mp", "tp", "fp", "fn", "tn", "a_hat", "b_hat"]
        lines = [",".join(cols)]
        for row in report.per_replication:
            lines.append(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols))
        _write_text(base + ".csv", "\n".join(lines) + "\n")
    return 0


def cmd_mspe(args):
    X, y, _names = _read_csv(args.data, args.response)
    data = standardize(X, y)
    mcem_cfg, varem_cfg = _engine_configs(args)
    value = cross_validated_mspe(
        data,
        folds=args.folds,
        engine=args.engine,
        engine_config=mcem_cfg if args.engine == "mcem" else varem_cfg,
        rng=RngStream(args.seed, 555),
    )
    payload = {"schema_version": SCHEMA_VERSION, "folds": args.folds, "mspe": value}
    _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_probe(args):
    rng = np.random.default_rng(args.seed)
    lines = ["check,a,b,k,value,bound_lo,bound_hi,ok"]
    for _ in range(args.cases):
        a = float(rng.uniform(0.01, 1.0))
        b = float(rng.uniform(1.01, 5.0))
        ratio, lo, hi = lemma1_ratio(a, b)
        lines.append(f"lemma_ratio,{a!r},{b!r},,{ratio!r},{lo!r},{hi!r},{lo <= ratio <= hi}")
    for _ in range(max(args.cases // 10, 1)):
        a = float(rng.uniform(0.05, 1.0))
        b = float(rng.uniform(1.05, 4.0))
        ok = stochastic_dominance_check(a, b, np.logspace(-2, 2, 9))
        lines.append(f"dominance,{a!r},{b!r},,,,,{ok}")
        k = float(rng.uniform(0.05, 2.0))
        tail, bound = tail_mass_bound(k, a, b)
        lines.append(f"tail_bound,{a!r},{b!r},{k!r},{tail!r},,{bound!r},{tail <= bound}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_density(args):
    rows = marginal_density_grid(
        args.a, args.b, args.sigma2, lo=args.lo, hi=args.hi, n_points=args.points
    )
    lines = ["beta,density"] + [f"{x!r},{g!r}" for x, g in rows]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _add_engine_flags(sub):
    sub.add_argument("--engine", choices=["mcem", "varem"], default="mcem")
    sub.add_argument("--iters", type=int, default=15000)
    sub.add_argument("--burnin", type=int, default=10000)
    sub.add_argument("--em-block", type=int, default=100)
    sub.add_argument("--em-tol", type=float, default=1e-6)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--a0", type=float, default=0.01)
    sub.add_argument("--b0", type=float, default=0.01)
    sub.add_argument("--c", type=float, default=1e-5)
    sub.add_argument("--d", type=float, default=1e-5)
    sub.add_argument("--threads", type=int, default=None)
    sub.add_argument("--out", default=None, help="output path ('-' or omitted: stdout)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nbp", description="Self-adaptive normal-beta-prime shrinkage regression"
    )
    subs = parser.add_subparsers(dest="command", required=True)

    fit = subs.add_parser("fit", help="fit a CSV dataset; JSON report out")
    fit.add_argument("--data", required=True)
    fit.add_argument("--response", required=True)
    fit.add_argument("--folds", type=int, default=10, help="DSS cross-validation folds")
    _add_engine_flags(fit)
    fit.set_defaults(func=cmd_fit)

    sim = subs.add_parser("simulate", help="run a simulation experiment")
    sim.add_argument("--spec-json", default=None, help="JSON file with ExperimentSpec fields")
    sim.add_argument("--n", type=int, default=60)
    sim.add_argument("--p", type=int, default=100)
    sim.add_argument("--n-active", type=int, default=10)
    sim.add_argument("--signal-law", choices=["uniform_pm", "fixed"], default="uniform_pm")
    sim.add_argument("--signal-lo", type=float, default=0.5)
    sim.add_argument("--signal-hi", type=float, default=2.0)
    sim.add_argument("--signal-value", type=float, default=5.0)
    sim.add_argument("--sigma2", type=float, default=2.0)
    sim.add_argument("--rho", type=float, default=0.5)
    sim.add_argument("--replications", type=int, default=20)
    sim.add_argument("--fixed-support", action="store_true")
    _add_engine_flags(sim)
    sim.set_defaults(func=cmd_simulate)

    mspe = subs.add_parser("mspe", help="k-fold mean squared prediction error")
    mspe.add_argument("--data", required=True)
    mspe.add_argument("--response", required=True)
    mspe.add_argument("--folds", type=int, default=5)
    _add_engine_flags(mspe)
    mspe.set_defaults(func=cmd_mspe)

    probe = subs.add_parser("probe", help="lemma/tail-bound checks as CSV")
    probe.add_argument("--cases", type=int, default=100)
    probe.add_argument("--seed", type=int, default=0)
    probe.add_argument("--out", default=None)
    probe.set_defaults(func=cmd_probe)

    dens = subs.add_parser("density", help="marginal density grid as CSV")
    dens.add_argument("--a", type=float, required=True)
    dens.add_argument("--b", type=float, required=True)
    dens.add_argument("--sigma2", type=float, default=1.0)
    dens.add_argument("--lo", type=float, default=-5.0)
    dens.add_argument("--hi", type=float, default=5.0)
    dens.add_argument("--points", type=int, default=201)
    dens.add_argument("--out", default=None)
    dens.set_defaults(func=cmd_density)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except (DataError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except NbpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
