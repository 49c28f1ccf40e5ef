"""Bivariate copula densities, Kendall-tau parameter maps and fitting.

Families: Independence, Gaussian, Student-t, Gumbel and Clayton.  All
are exchangeable, so log_density(u, v) == log_density(v, u).  Gumbel
and Clayton model positive dependence only; fitting them to
negatively dependent data falls back to Independence with a warning.

``log_density`` requires arguments strictly inside the unit interval.
Marginal cdf values of extreme samples hit 0.0 or 1.0 in finite
precision, where the Archimedean densities are singular, so scoring
callers clamp through ``clamp_unit`` first and keep the clamp count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.stats import kendalltau

__all__ = [
    "UnfittableTauError",
    "CopulaFitWarning",
    "CopulaSpec",
    "IndependenceCopula",
    "GaussianCopula",
    "StudentTCopula",
    "GumbelCopula",
    "ClaytonCopula",
    "FAMILIES",
    "clamp_unit",
    "tau_to_param",
    "empirical_kendall_tau",
    "fit_copula",
]

UNIT_EPS = 1e-10
RHO_CLAMP = 0.9999


class UnfittableTauError(ValueError):
    """Requested Kendall tau is outside the family's attainable range."""


class CopulaFitWarning(UserWarning):
    pass


def clamp_unit(u: np.ndarray, eps: float = UNIT_EPS) -> tuple[np.ndarray, int]:
    """Clamp to [eps, 1 - eps]; returns (clamped, number of clamped entries)."""
    u = np.asarray(u, dtype=float)
    clamped = np.clip(u, eps, 1.0 - eps)
    return clamped, int(np.count_nonzero(clamped != u))


def _check_open_unit(*arrays) -> list[np.ndarray]:
    out = []
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if np.any(a <= 0.0) or np.any(a >= 1.0):
            raise ValueError("copula arguments must lie strictly inside (0, 1)")
        out.append(a)
    return out


@dataclass(frozen=True)
class CopulaSpec:
    """Base copula; subclasses define ``log_density`` on (0, 1)^2."""

    _family_name = ""

    @property
    def family(self) -> str:
        return self._family_name

    def log_density(self, u, v):
        raise NotImplementedError

    def to_dict(self) -> dict:
        out = {"family": self.family}
        out.update({k: float(val) for k, val in self.__dict__.items()})
        return out


@dataclass(frozen=True)
class IndependenceCopula(CopulaSpec):
    _family_name = "independence"

    def log_density(self, u, v):
        u, v = _check_open_unit(u, v)
        return np.zeros(np.broadcast(u, v).shape)


@dataclass(frozen=True)
class GaussianCopula(CopulaSpec):
    rho: float

    _family_name = "gaussian"

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho!r}")

    def log_density(self, u, v):
        u, v = _check_open_unit(u, v)
        z1 = special.ndtri(u)
        z2 = special.ndtri(v)
        r = self.rho
        one_m = 1.0 - r * r
        return -0.5 * np.log(one_m) - (r * r * (z1 * z1 + z2 * z2) - 2.0 * r * z1 * z2) / (
            2.0 * one_m
        )


@dataclass(frozen=True)
class StudentTCopula(CopulaSpec):
    rho: float
    nu: float = 5.0

    _family_name = "t"

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho!r}")
        if self.nu <= 0.0:
            raise ValueError(f"nu must be > 0, got {self.nu!r}")

    def log_density(self, u, v):
        u, v = _check_open_unit(u, v)
        nu, r = self.nu, self.rho
        t1 = special.stdtrit(nu, u)
        t2 = special.stdtrit(nu, v)
        one_m = 1.0 - r * r
        quad = (t1 * t1 - 2.0 * r * t1 * t2 + t2 * t2) / (nu * one_m)
        return (
            special.gammaln((nu + 2.0) / 2.0)
            + special.gammaln(nu / 2.0)
            - 2.0 * special.gammaln((nu + 1.0) / 2.0)
            - 0.5 * np.log(one_m)
            - (nu + 2.0) / 2.0 * np.log1p(quad)
            + (nu + 1.0) / 2.0 * (np.log1p(t1 * t1 / nu) + np.log1p(t2 * t2 / nu))
        )


@dataclass(frozen=True)
class GumbelCopula(CopulaSpec):
    theta: float

    _family_name = "gumbel"

    def __post_init__(self):
        if self.theta < 1.0:
            raise ValueError(f"Gumbel theta must be >= 1, got {self.theta!r}")

    def log_density(self, u, v):
        u, v = _check_open_unit(u, v)
        th = self.theta
        a = -np.log(u)
        b = -np.log(v)
        s = a**th + b**th
        w = s ** (1.0 / th)
        return (
            -w
            + (a + b)
            + (th - 1.0) * (np.log(a) + np.log(b))
            + (1.0 / th - 2.0) * np.log(s)
            + np.log(w + th - 1.0)
        )


@dataclass(frozen=True)
class ClaytonCopula(CopulaSpec):
    theta: float

    _family_name = "clayton"

    def __post_init__(self):
        if self.theta <= 0.0:
            raise ValueError(f"Clayton theta must be > 0, got {self.theta!r}")

    def log_density(self, u, v):
        u, v = _check_open_unit(u, v)
        th = self.theta
        lu = np.log(u)
        lv = np.log(v)
        # u^-th + v^-th - 1 written via expm1 so the theta -> 0 limit is stable
        log_t = np.log1p(np.expm1(-th * lu) + np.expm1(-th * lv))
        return np.log1p(th) - (th + 1.0) * (lu + lv) - (2.0 + 1.0 / th) * log_t


FAMILIES = ("independence", "gaussian", "t", "gumbel", "clayton")


def tau_to_param(family: str, tau: float, *, nu: float = 5.0) -> CopulaSpec:
    """Standard Kendall-tau inversion for each family.

    Gaussian/Student-t: rho = sin(pi tau / 2).  Gumbel: theta = 1/(1-tau),
    attainable only for tau >= 0.  Clayton: theta = 2 tau / (1 - tau),
    attainable only for tau > 0 (tau == 0 degenerates to Independence).
    """
    if not -1.0 < tau < 1.0:
        raise UnfittableTauError(f"tau must lie in (-1, 1), got {tau!r}")
    family = family.lower()
    if family == "independence":
        return IndependenceCopula()
    if family in ("gaussian", "t"):
        rho = float(np.clip(np.sin(np.pi * tau / 2.0), -RHO_CLAMP, RHO_CLAMP))
        return GaussianCopula(rho) if family == "gaussian" else StudentTCopula(rho, nu)
    if family == "gumbel":
        if tau < 0.0:
            raise UnfittableTauError(f"Gumbel cannot represent negative tau ({tau:.4f})")
        return GumbelCopula(1.0 / (1.0 - tau))
    if family == "clayton":
        if tau < 0.0:
            raise UnfittableTauError(f"Clayton cannot represent negative tau ({tau:.4f})")
        if tau == 0.0:
            return IndependenceCopula()
        return ClaytonCopula(2.0 * tau / (1.0 - tau))
    raise ValueError(f"unknown copula family {family!r}")


def empirical_kendall_tau(x, y) -> float:
    """Concordant-minus-discordant pair fraction, ties contributing zero.

    Computed from the O(n log n) tau-b statistic by undoing its tie
    normalization: tau_a = (C - D) / (n choose 2) with
    C - D = tau_b * sqrt((n0 - n1) * (n0 - n2)).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = x.size
    if n < 2 or y.size != n:
        raise ValueError("need at least 2 pairs of equal length")
    n0 = n * (n - 1) / 2.0
    tie_pairs = lambda a: float(sum(c * (c - 1) / 2.0 for c in np.unique(a, return_counts=True)[1]))
    n1 = tie_pairs(x)
    n2 = tie_pairs(y)
    if n1 == n0 or n2 == n0:
        return 0.0  # one margin is constant, every pair is a tie
    tau_b = kendalltau(x, y).statistic
    return float(tau_b * np.sqrt((n0 - n1) * (n0 - n2)) / n0)


def fit_copula(family: str, x, y, *, nu: float = 5.0) -> CopulaSpec:
    """Rank-based fit: empirical Kendall tau pushed through tau_to_param.

    Positive-dependence-only families presented with negative dependence
    fall back to Independence and emit a CopulaFitWarning.
    """
    family = family.lower()
    if family == "independence":
        return IndependenceCopula()
    tau = empirical_kendall_tau(x, y)
    try:
        return tau_to_param(family, tau, nu=nu)
    except UnfittableTauError as exc:
        warnings.warn(
            f"{family} copula unfittable ({exc}); falling back to independence",
            CopulaFitWarning,
        )
        return IndependenceCopula()
