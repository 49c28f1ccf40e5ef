"""Scalar distribution toolkit: Normal, Exponential, Beta and Gamma.

Each family exposes ``pdf``, ``log_pdf``, ``cdf``, ``quantile`` and
``sample``.  All evaluators accept scalars or arrays and broadcast;
parameters are validated once at construction.  Only what the four
families need is implemented, this is not a general special-function
library.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "Distribution",
    "Normal",
    "Exponential",
    "Beta",
    "Gamma",
    "MarginalPair",
]


def _require_positive(value: float, name: str) -> None:
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class Distribution:
    """Base class; subclasses implement the scalar family evaluators."""

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def log_pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, u):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def _check_unit_interval(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0.0) or np.any(u >= 1.0):
            raise ValueError("quantile argument must lie strictly inside (0, 1)")
        return u


@dataclass(frozen=True)
class Normal(Distribution):
    """Gaussian with ``mean`` and ``variance`` (not standard deviation)."""

    mean: float
    variance: float

    def __post_init__(self):
        _require_positive(self.variance, "variance")

    @property
    def support(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        return -0.5 * (np.log(2.0 * np.pi * self.variance) + (x - self.mean) ** 2 / self.variance)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mean) / np.sqrt(self.variance)
        return 0.5 * special.erfc(-z / np.sqrt(2.0))

    def quantile(self, u):
        u = self._check_unit_interval(u)
        return self.mean + np.sqrt(self.variance) * special.ndtri(u)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(self.mean, np.sqrt(self.variance), size)


@dataclass(frozen=True)
class Exponential(Distribution):
    """Exponential with rate ``lam``; density lam * exp(-lam * x) on x >= 0."""

    lam: float

    def __post_init__(self):
        _require_positive(self.lam, "rate")

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, np.inf)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, np.log(self.lam) - self.lam * x, -np.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, -np.expm1(-self.lam * x), 0.0)

    def quantile(self, u):
        u = self._check_unit_interval(u)
        return -np.log1p(-u) / self.lam

    def sample(self, rng: np.random.Generator, size=None):
        return rng.exponential(1.0 / self.lam, size)


@dataclass(frozen=True)
class Beta(Distribution):
    """Beta(a, b) on (0, 1).

    The b = 1 case the generators rely on uses the closed forms
    cdf(x) = x**a and quantile(u) = u**(1/a); general (a, b) goes
    through the regularized incomplete beta function.
    """

    a: float
    b: float = 1.0

    def __post_init__(self):
        _require_positive(self.a, "a")
        _require_positive(self.b, "b")

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, 1.0)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0.0) & (x <= 1.0)
        xs = np.where(inside, x, 0.5)
        lp = (
            special.xlogy(self.a - 1.0, xs)
            + special.xlog1py(self.b - 1.0, -xs)
            - special.betaln(self.a, self.b)
        )
        return np.where(inside, lp, -np.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, 0.0, 1.0)
        if self.b == 1.0:
            return xc**self.a
        return special.betainc(self.a, self.b, xc)

    def quantile(self, u):
        u = self._check_unit_interval(u)
        if self.b == 1.0:
            return u ** (1.0 / self.a)
        return special.betaincinv(self.a, self.b, u)

    def sample(self, rng: np.random.Generator, size=None):
        if self.b == 1.0:
            return rng.random(size) ** (1.0 / self.a)
        return rng.beta(self.a, self.b, size)


@dataclass(frozen=True)
class Gamma(Distribution):
    """Gamma with ``shape`` alpha and ``scale`` theta; mean alpha * theta."""

    shape: float
    scale: float

    def __post_init__(self):
        _require_positive(self.shape, "shape")
        _require_positive(self.scale, "scale")

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, np.inf)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = x >= 0.0
        xs = np.where(inside, x, 1.0)
        lp = (
            special.xlogy(self.shape - 1.0, xs)
            - xs / self.scale
            - special.gammaln(self.shape)
            - self.shape * np.log(self.scale)
        )
        return np.where(inside, lp, -np.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return special.gammainc(self.shape, np.maximum(x, 0.0) / self.scale)

    def quantile(self, u):
        u = self._check_unit_interval(u)
        return special.gammaincinv(self.shape, u) * self.scale

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.shape, self.scale, size)


@dataclass(frozen=True)
class MarginalPair:
    """Per-modality marginal under each hypothesis, shared across indices."""

    h0: Distribution
    h1: Distribution

    def under(self, hypothesis_index: int) -> Distribution:
        return self.h1 if hypothesis_index else self.h0
