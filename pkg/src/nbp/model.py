"""Core data types shared by the Gibbs/MCEM and variational engines."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass
class RegressionData:
    """Standardized design and response with the inverse-transform metadata.

    After ``standardize`` every column of X has mean 0 and unit sample
    standard deviation (n-1 denominator) and y has mean 0.
    """

    X: np.ndarray
    y: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    y_mean: float
    standardized: bool = True

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class NbpHyperparams:
    """(a, b) of the beta prime scale prior and (c, d) of the noise prior."""

    a: float
    b: float
    c: float = 1e-5
    d: float = 1e-5

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"hyperparameter {name} must be finite and > 0, got {v}")


@dataclass
class LatentState:
    """One Gibbs configuration: coefficients and all scale parameters."""

    beta: np.ndarray
    lambda2: np.ndarray
    xi2: np.ndarray
    sigma2: float

    @classmethod
    def initial(cls, p):
        return cls(beta=np.zeros(p), lambda2=np.ones(p), xi2=np.ones(p), sigma2=1.0)

    def validate(self, context=""):
        if not (
            np.all(np.isfinite(self.beta))
            and np.all(self.lambda2 > 0)
            and np.all(np.isfinite(self.lambda2))
            and np.all(self.xi2 > 0)
            and np.all(np.isfinite(self.xi2))
            and self.sigma2 > 0
            and math.isfinite(self.sigma2)
        ):
            from .errors import NumericError

            raise NumericError(f"non-finite or non-positive latent state {context}")


@dataclass
class PosteriorSummary:
    """Retained draws plus the point/interval summaries used downstream."""

    samples: np.ndarray  # S x p retained coefficient draws
    sigma2_samples: np.ndarray
    beta_median: np.ndarray
    beta_mean: np.ndarray
    credible_lower: np.ndarray
    credible_upper: np.ndarray
    a_hat: float
    b_hat: float
    em_trace: list = field(default_factory=list)

    @classmethod
    def from_draws(cls, samples, sigma2_samples, a_hat, b_hat, em_trace):
        return cls(
            samples=samples,
            sigma2_samples=sigma2_samples,
            beta_median=np.median(samples, axis=0),
            beta_mean=samples.mean(axis=0),
            credible_lower=np.quantile(samples, 0.025, axis=0),
            credible_upper=np.quantile(samples, 0.975, axis=0),
            a_hat=a_hat,
            b_hat=b_hat,
            em_trace=list(em_trace),
        )


def standardize(raw_x, raw_y):
    """Center/scale X columns to mean 0, sd 1 (n-1 denominator); center y."""
    X = np.ascontiguousarray(raw_x, dtype=np.float64)
    y = np.asarray(raw_y, dtype=np.float64).ravel()
    if X.ndim != 2:
        raise DomainError(f"design matrix must be 2-d, got shape {X.shape}")
    n, p = X.shape
    if n != y.shape[0]:
        raise DomainError(f"X has {n} rows but y has {y.shape[0]} entries")
    if n < 2:
        raise DomainError("standardization needs at least 2 rows")
    means = X.mean(axis=0)
    scales = X.std(axis=0, ddof=1)
    zero = np.flatnonzero(scales == 0.0)
    if zero.size:
        raise DomainError(f"column {zero[0]} has zero variance; drop it before fitting")
    y_mean = float(y.mean())
    return RegressionData(
        X=(X - means) / scales,
        y=y - y_mean,
        column_means=means,
        column_scales=scales,
        y_mean=y_mean,
    )


def destandardize(data):
    """Recover the raw (X, y) that produced a RegressionData."""
    return data.X * data.column_scales + data.column_means, data.y + data.y_mean
