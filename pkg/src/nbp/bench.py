"""Simulation experiments, metrics, replication orchestration, and MSPE.

Designs follow the evaluation protocol: rows of X are AR-correlated Gaussian
(corr rho^|i-j|), columns centered and scaled, y = X beta0 + noise with fixed
true variance, active coordinates drawn without replacement, signal sizes
either uniform on +-[lo, hi] or a fixed value.  Point estimation uses the
posterior median; selection applies DSS to the posterior mean; reported
metrics are MSE = ||bhat - b0||^2 / p and the FDR / FNR / MP counts.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dss import dss_select
from .errors import DomainError, NbpError
from .gibbs import McemConfig, run_mcem
from .model import standardize
from .rand_dist import RngStream
from .varem import VarEmConfig, run_var_em, varem_posterior_summary


@dataclass(frozen=True)
class ExperimentSpec:
    n: int
    p: int
    n_active: int
    signal_law: str = "uniform_pm"  # or "fixed"
    signal_lo: float = 0.5
    signal_hi: float = 2.0
    signal_value: float = 5.0
    sigma2_true: float = 2.0
    correlation_rho: float = 0.5
    replications: int = 20
    seed: int = 0
    engine: str = "mcem"
    fixed_support: bool = False

    def __post_init__(self):
        if self.n_active > self.p:
            raise DomainError(f"n_active ({self.n_active}) exceeds p ({self.p})")
        if not self.sigma2_true > 0:
            raise DomainError(f"sigma2_true must be > 0, got {self.sigma2_true}")
        if not abs(self.correlation_rho) < 1:
            raise DomainError(f"|correlation_rho| must be < 1, got {self.correlation_rho}")
        if self.signal_law not in ("uniform_pm", "fixed"):
            raise DomainError(f"unknown signal_law {self.signal_law!r}")
        if self.engine not in ("mcem", "varem"):
            raise DomainError(f"unknown engine {self.engine!r}")


@dataclass
class MetricsReport:
    mse: float
    fdr: float
    fnr: float
    mp: float
    se: dict
    per_replication: list
    n_failed: int
    failures: list = field(default_factory=list)


def _derived_seed(seed, tag, index):
    s = RngStream(seed, stream=tag * 1_000_003 + index)
    return int(s.state[0])


def gen_experiment(spec, replication_index):
    """(standardized data, true beta, true support) for one replication."""
    rng = RngStream(spec.seed, stream=10_000 + replication_index)
    n, p, rho = spec.n, spec.p, spec.correlation_rho
    Z = rng.normal_vector(n * p).reshape(n, p)
    X = np.empty((n, p))
    X[:, 0] = Z[:, 0]
    scale = math.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        X[:, j] = rho * X[:, j - 1] + scale * Z[:, j]
    X = (X - X.mean(axis=0)) / X.std(axis=0, ddof=1)

    support_rng = (
        RngStream(spec.seed, stream=20_000)
        if spec.fixed_support
        else RngStream(spec.seed, stream=20_000 + replication_index)
    )
    support = support_rng.choice_without_replacement(p, spec.n_active)
    beta0 = np.zeros(p)
    if spec.signal_law == "uniform_pm":
        mags = spec.signal_lo + (spec.signal_hi - spec.signal_lo) * rng.uniform_vector(
            spec.n_active
        )
        signs = np.where(rng.uniform_vector(spec.n_active) < 0.5, -1.0, 1.0)
        beta0[support] = mags * signs
    else:
        beta0[support] = spec.signal_value
    y = X @ beta0 + math.sqrt(spec.sigma2_true) * rng.normal_vector(n)
    return standardize(X, y), beta0, support


def compute_metrics(beta_hat, selected, true_beta, true_support):
    """One replication's metric row; zero-denominator rates report 0."""
    p = len(true_beta)
    if len(beta_hat) != p:
        raise DomainError("beta_hat and true_beta dimensions disagree")
    sel = set(int(i) for i in selected)
    tru = set(int(i) for i in true_support)
    tp = len(sel & tru)
    fp = len(sel - tru)
    fn = len(tru - sel)
    tn = p - tp - fp - fn
    mse = float(np.sum((np.asarray(beta_hat) - np.asarray(true_beta)) ** 2)) / p
    fdr = fp / (tp + fp) if (tp + fp) > 0 else 0.0
    fnr = fn / (tn + fn) if (tn + fn) > 0 else 0.0
    mp = (fp + fn) / p
    return {"mse": mse, "fdr": fdr, "fnr": fnr, "mp": mp, "tp": tp, "fp": fp, "fn": fn, "tn": tn}


def _fit_replication(spec, rep, engine_config):
    data, beta0, support = gen_experiment(spec, rep)
    fit_seed = _derived_seed(spec.seed, 3, rep)
    if spec.engine == "mcem":
        config = engine_config or McemConfig()
        summary = run_mcem(data, replace(config, seed=fit_seed))
    else:
        config = engine_config or VarEmConfig()
        fit = run_var_em(data, config)
        summary = varem_posterior_summary(fit.params, fit.a_hat, fit.b_hat, fit.ab_trace)
    sel = dss_select(data.X, summary.beta_mean, rng=RngStream(spec.seed, stream=30_000 + rep))
    row = compute_metrics(summary.beta_median, sel.support, beta0, support)
    row["replication"] = rep
    row["a_hat"] = summary.a_hat
    row["b_hat"] = summary.b_hat
    return row


def run_experiment(spec, engine_config=None, threads=None):
    """All replications (concurrently), aggregated with standard errors."""
    reps = spec.replications
    threads = threads or min(reps, os.cpu_count() or 1)
    rows = [None] * reps
    failures = []

    def work(r):
        try:
            rows[r] = _fit_replication(spec, r, engine_config)
        except NbpError as exc:
            failures.append((r, f"{type(exc).__name__}: {exc}"))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(reps)))
    else:
        for r in range(reps):
            work(r)
    ok = [r for r in rows if r is not None]
    if not ok:
        raise NbpError("every replication failed")
    means = {}
    ses = {}
    for key in ("mse", "fdr", "fnr", "mp"):
        vals = np.array([r[key] for r in ok])
        means[key] = float(vals.mean())
        ses[key] = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return MetricsReport(
        mse=means["mse"],
        fdr=means["fdr"],
        fnr=means["fnr"],
        mp=means["mp"],
        se=ses,
        per_replication=ok,
        n_failed=len(failures),
        failures=sorted(failures),
    )


def cross_validated_mspe(data, folds=5, engine="mcem", engine_config=None, rng=None):
    """K-fold mean squared prediction error with per-fold restandardization.

    Each fold refits on the training rows (standardized by training
    statistics) and scores the held-out rows with the posterior median
    coefficients on the original scale.
    """
    n = data.n
    if folds < 2 or n < folds:
        raise DomainError(f"need 2 <= folds <= n, got folds={folds}, n={n}")
    raw_x = data.X * data.column_scales + data.column_means
    raw_y = data.y + data.y_mean
    if rng is None:
        rng = RngStream(0)
    perm = rng.permutation(n)
    fold_id = np.empty(n, dtype=np.int64)
    for k, i in enumerate(perm):
        fold_id[i] = k % folds
    if np.bincount(fold_id, minlength=folds).min() < 2:
        raise DomainError("a fold has fewer than 2 rows")
    fold_mse = []
    for f in range(folds):
        tr = fold_id != f
        train = standardize(raw_x[tr], raw_y[tr])
        fit_seed = _derived_seed(int(rng.seed), 5, f)
        if engine == "mcem":
            config = engine_config or McemConfig()
            summary = run_mcem(train, replace(config, seed=fit_seed))
        elif engine == "varem":
            config = engine_config or VarEmConfig()
            fit = run_var_em(train, config)
            summary = varem_posterior_summary(fit.params, fit.a_hat, fit.b_hat, fit.ab_trace)
        else:
            raise DomainError(f"unknown engine {engine!r}")
        x_te = (raw_x[~tr] - train.column_means) / train.column_scales
        pred = x_te @ summary.beta_median + train.y_mean
        resid = raw_y[~tr] - pred
        fold_mse.append(float(resid @ resid) / resid.shape[0])
    return float(np.mean(fold_mse))
