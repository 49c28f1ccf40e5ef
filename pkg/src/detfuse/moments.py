"""First and second moments of the uncompressed data, analytic and empirical.

The analytic models exploit the per-index independence of the
generators: every covariance block is an N x N diagonal matrix, so a
model stores one scalar diagonal vector per (modality, modality) block
and only materializes the dense LN x LN matrix when the projection
pushforward needs it.

``mc_moments`` is the verification oracle: it estimates the full dense
mean and covariance (no structural zeros imposed) together with
standard errors, so analytic entries can be checked entrywise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .generators import CaseOneParams, CaseTwoParams, Hypothesis, ModalityGenerator

__all__ = [
    "MomentModel",
    "MomentEstimate",
    "case1_moments",
    "case2_moments",
    "mc_moments",
    "max_sigma_deviation",
]


@dataclass(frozen=True, eq=False)
class MomentModel:
    """Means and blockwise-diagonal covariances under both hypotheses.

    ``mean0``/``mean1`` have shape (L, N).  ``cov0``/``cov1`` have shape
    (L, L, N); entry [j, k, n] is the n-th diagonal element of
    covariance block (j, k).
    """

    mean0: np.ndarray
    mean1: np.ndarray
    cov0: np.ndarray
    cov1: np.ndarray

    def __post_init__(self):
        L, N = self.mean0.shape
        for name in ("mean1",):
            if getattr(self, name).shape != (L, N):
                raise ValueError("mean arrays must share shape (L, N)")
        for name in ("cov0", "cov1"):
            cov = getattr(self, name)
            if cov.shape != (L, L, N):
                raise ValueError("cov arrays must have shape (L, L, N)")
            if not np.allclose(cov, np.swapaxes(cov, 0, 1)):
                raise ValueError(f"{name} blocks must be symmetric across (j, k)")
            if np.any(np.diagonal(cov, axis1=0, axis2=1) <= 0.0):
                raise ValueError(f"{name} diagonal blocks must be strictly positive")
            # every per-index L x L cross-moment matrix must be PSD
            per_index = np.moveaxis(cov, 2, 0)
            eig = np.linalg.eigvalsh(per_index)
            if np.any(eig < -1e-12 * eig.max()):
                raise ValueError(f"{name} has an indefinite per-index block")

    @property
    def num_modalities(self) -> int:
        return self.mean0.shape[0]

    @property
    def n(self) -> int:
        return self.mean0.shape[1]

    def mean_vector(self, hypothesis: Hypothesis | int) -> np.ndarray:
        """Stacked length-LN mean [m_1; ...; m_L]."""
        mean = self.mean1 if int(hypothesis) else self.mean0
        return mean.reshape(-1).copy()

    def block_diagonals(self, hypothesis: Hypothesis | int) -> np.ndarray:
        return (self.cov1 if int(hypothesis) else self.cov0).copy()

    def dense_cov(self, hypothesis: Hypothesis | int) -> np.ndarray:
        """Materialize the LN x LN covariance (test and small-N use only)."""
        cov = self.cov1 if int(hypothesis) else self.cov0
        L, _, N = cov.shape
        out = np.zeros((L * N, L * N))
        idx = np.arange(N)
        for j in range(L):
            for k in range(L):
                out[j * N + idx, k * N + idx] = cov[j, k]
        return out

    def to_dict(self) -> dict:
        """JSON-ready form: dimensions, means, and per-block diagonals."""
        L = self.num_modalities
        return {
            "num_modalities": L,
            "n": self.n,
            "mean0": self.mean0.tolist(),
            "mean1": self.mean1.tolist(),
            "cov0_diagonals": self.cov0.tolist(),
            "cov1_diagonals": self.cov1.tolist(),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "MomentModel":
        model = cls(
            mean0=np.asarray(raw["mean0"], dtype=float),
            mean1=np.asarray(raw["mean1"], dtype=float),
            cov0=np.asarray(raw["cov0_diagonals"], dtype=float),
            cov1=np.asarray(raw["cov1_diagonals"], dtype=float),
        )
        if model.num_modalities != raw["num_modalities"] or model.n != raw["n"]:
            raise ValueError("stored dimensions disagree with the array payload")
        return model


def _homogeneous_model(means: list[list[float]], covs: list[list[list[float]]], n: int) -> MomentModel:
    ones = np.ones(n)
    mean0, mean1 = (np.asarray(m, dtype=float)[:, None] * ones for m in means)
    cov0, cov1 = (np.asarray(c, dtype=float)[:, :, None] * ones for c in covs)
    return MomentModel(mean0=mean0, mean1=mean1, cov0=cov0, cov1=cov1)


def case1_moments(params: CaseOneParams, n: int) -> MomentModel:
    """Gaussian/exponential case.  The cross block vanishes under both
    hypotheses: Cov(x1, x1**2 + w**2) = E[x1**3] = 0 for centered x1."""
    lam1 = params.lambda1
    means = [
        [0.0, 1.0 / params.lambda0],
        [0.0, 1.0 / lam1],
    ]
    covs = [
        [[params.sigma0_sq, 0.0], [0.0, 1.0 / params.lambda0**2]],
        [[params.sigma1_sq, 0.0], [0.0, 1.0 / lam1**2]],
    ]
    return _homogeneous_model(means, covs, n)


def case2_moments(params: CaseTwoParams, n: int) -> MomentModel:
    """Exponential/beta case.

    The H1 cross covariance comes from the representation
    u = s * b, x1 = s * (1 - b) with s ~ Gamma(a1 + 1, theta1)
    independent of b ~ Beta(a1, 1), which gives
    Cov(x1, x2) = -E[s] * Var(b) = -a1 * theta1 / ((a1 + 1) (a1 + 2)).
    """
    a0, a1, th1 = params.a0, params.a1, params.theta1
    beta_mean = lambda a: a / (a + 1.0)
    beta_var = lambda a: a / ((a + 1.0) ** 2 * (a + 2.0))
    cross1 = -a1 * th1 / ((a1 + 1.0) * (a1 + 2.0))
    means = [
        [1.0 / params.lambda0, beta_mean(a0)],
        [1.0 / params.lambda1, beta_mean(a1)],
    ]
    covs = [
        [[1.0 / params.lambda0**2, 0.0], [0.0, beta_var(a0)]],
        [[1.0 / params.lambda1**2, cross1], [cross1, beta_var(a1)]],
    ]
    return _homogeneous_model(means, covs, n)


@dataclass(frozen=True, eq=False)
class MomentEstimate:
    """Dense Monte Carlo moment estimate with standard errors.

    ``mean`` has shape (L, n); ``cov`` and ``cov_se`` are the full
    (L*n) x (L*n) sample covariance of the stacked vector, with no
    structure forced onto them.
    """

    mean: np.ndarray
    mean_se: np.ndarray
    cov: np.ndarray
    cov_se: np.ndarray
    trials: int


def mc_moments(
    generator: ModalityGenerator,
    hypothesis: Hypothesis,
    trials: int,
    seed: int,
    n: int = 2,
) -> MomentEstimate:
    """Estimate stacked means and the dense covariance from iid trials.

    Standard errors for covariance entries are the empirical standard
    deviations of the centered products, so the 3-sigma comparison
    against an analytic model needs no distributional assumptions.
    """
    if trials < 10_000:
        raise ValueError("trials must be >= 10_000 for a usable oracle")
    L = generator.num_modalities
    draws = generator.sample_many(hypothesis, trials, n, seed)  # (T, L, n)
    flat = draws.reshape(trials, L * n)

    mean_flat = flat.mean(axis=0)
    mean_se_flat = flat.std(axis=0, ddof=1) / np.sqrt(trials)
    dev = flat - mean_flat

    dim = L * n
    sum_p = np.zeros((dim, dim))
    sum_p2 = np.zeros((dim, dim))
    chunk = max(1, 10_000_000 // (dim * dim))
    for start in range(0, trials, chunk):
        d = dev[start : start + chunk]
        prod = d[:, :, None] * d[:, None, :]
        sum_p += prod.sum(axis=0)
        sum_p2 += (prod**2).sum(axis=0)

    cov = sum_p / (trials - 1)
    prod_var = sum_p2 / trials - (sum_p / trials) ** 2
    cov_se = np.sqrt(np.maximum(prod_var, 0.0) / trials)

    variances = np.diag(cov)
    if np.any(variances <= 1e-300):
        warnings.warn("degenerate (zero-variance) moment estimate", RuntimeWarning)

    return MomentEstimate(
        mean=mean_flat.reshape(L, n),
        mean_se=mean_se_flat.reshape(L, n),
        cov=cov,
        cov_se=cov_se,
        trials=trials,
    )


def max_sigma_deviation(model: MomentModel, estimate: MomentEstimate, hypothesis: Hypothesis) -> float:
    """Largest |analytic - estimate| / SE over all mean and covariance
    entries; the structural comparison happens here, never inside the
    estimate."""
    n = estimate.mean.shape[1]
    sub = MomentModel(
        mean0=model.mean0[:, :n],
        mean1=model.mean1[:, :n],
        cov0=model.cov0[:, :, :n],
        cov1=model.cov1[:, :, :n],
    )
    mean_z = np.abs(sub.mean_vector(hypothesis) - estimate.mean.reshape(-1)) / estimate.mean_se.reshape(-1)
    cov_se = np.where(estimate.cov_se > 0.0, estimate.cov_se, np.inf)
    cov_z = np.abs(sub.dense_cov(hypothesis) - estimate.cov) / cov_se
    return float(max(mean_z.max(), cov_z.max()))
