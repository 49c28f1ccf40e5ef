"""Hypothesis-conditional generators for dependent two-modality data.

Two concrete constructions are provided.  In the first, modality 1 is
zero-mean Gaussian and modality 2 is exponential; under the signal
hypothesis the exponential values are built as x1**2 + w**2 so the two
modalities are dependent but uncorrelated.  In the second, modality 1
is exponential and modality 2 is Beta(a, 1); under the signal
hypothesis modality 2 is u / (u + x1) with an independent gamma u,
which makes the pair strongly negatively dependent while preserving
the stated marginals.

Entries within a modality vector are independent draws; dependence
exists only across modalities at the same index.  Every sampling call
is a pure function of (params, hypothesis, n, seed).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import Beta, Exponential, MarginalPair, Normal

__all__ = [
    "Hypothesis",
    "SampleBlock",
    "CaseOneParams",
    "CaseTwoParams",
    "ModalityGenerator",
    "CaseOneGenerator",
    "CaseTwoGenerator",
    "IndexJointGenerator",
    "sample_case1",
    "sample_case2",
    "CASE1_PRESET",
    "CASE2_PRESET",
]


class Hypothesis(enum.IntEnum):
    H0 = 0
    H1 = 1


@dataclass(frozen=True, eq=False)
class SampleBlock:
    """One realization: values[j] is the length-n vector of modality j."""

    values: np.ndarray  # shape (L, n)
    hypothesis: Hypothesis
    seed: int

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-d (L, n) array")

    @property
    def num_modalities(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CaseOneParams:
    """Gaussian/exponential pair; the H1 exponential rate is tied to the
    H1 Gaussian variance (lambda1 = 1 / (2 * sigma1_sq)) and never stored."""

    sigma0_sq: float = 5.0
    sigma1_sq: float = 5.1
    lambda0: float = 0.1

    def __post_init__(self):
        for name in ("sigma0_sq", "sigma1_sq", "lambda0"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")

    @property
    def lambda1(self) -> float:
        return 1.0 / (2.0 * self.sigma1_sq)

    def marginal_pairs(self) -> list[MarginalPair]:
        return [
            MarginalPair(Normal(0.0, self.sigma0_sq), Normal(0.0, self.sigma1_sq)),
            MarginalPair(Exponential(self.lambda0), Exponential(self.lambda1)),
        ]


@dataclass(frozen=True)
class CaseTwoParams:
    """Exponential/beta pair; under H1 the beta shape equals the gamma
    shape alpha1 and the gamma scale equals the H1 exponential mean."""

    lambda0: float = 0.1
    lambda1: float = 1.0 / 10.2
    a0: float = 9.8
    alpha1: float = 10.0

    def __post_init__(self):
        for name in ("lambda0", "lambda1", "a0", "alpha1"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")

    @property
    def a1(self) -> float:
        return self.alpha1

    @property
    def theta1(self) -> float:
        return 1.0 / self.lambda1

    def marginal_pairs(self) -> list[MarginalPair]:
        return [
            MarginalPair(Exponential(self.lambda0), Exponential(self.lambda1)),
            MarginalPair(Beta(self.a0, 1.0), Beta(self.a1, 1.0)),
        ]


CASE1_PRESET = CaseOneParams()
CASE2_PRESET = CaseTwoParams()


class ModalityGenerator:
    """Sampler of dependent modality blocks plus the matching marginals."""

    num_modalities: int = 2

    def marginal_pairs(self) -> list[MarginalPair]:
        raise NotImplementedError

    def _draw(self, hypothesis: Hypothesis, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def sample(self, hypothesis: Hypothesis, n: int, seed: int) -> SampleBlock:
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(seed)
        values = self._draw(Hypothesis(hypothesis), int(n), rng)
        return SampleBlock(values=values, hypothesis=Hypothesis(hypothesis), seed=seed)

    def sample_many(self, hypothesis: Hypothesis, trials: int, n: int, seed: int) -> np.ndarray:
        """Vectorized iid trials, shape (trials, L, n).

        Valid because entries within a modality are independent across
        indices: a single block of length trials * n regroups into
        trials blocks of length n.
        """
        if trials < 1:
            raise ValueError("trials must be >= 1")
        block = self.sample(hypothesis, trials * n, seed)
        return np.swapaxes(block.values.reshape(self.num_modalities, trials, n), 0, 1)


class CaseOneGenerator(ModalityGenerator):
    def __init__(self, params: CaseOneParams = CASE1_PRESET):
        self.params = params

    def marginal_pairs(self) -> list[MarginalPair]:
        return self.params.marginal_pairs()

    def _draw(self, hypothesis, n, rng):
        p = self.params
        if hypothesis == Hypothesis.H1:
            x1 = rng.normal(0.0, np.sqrt(p.sigma1_sq), n)
            w = rng.normal(0.0, np.sqrt(p.sigma1_sq), n)
            x2 = x1**2 + w**2
        else:
            x1 = rng.normal(0.0, np.sqrt(p.sigma0_sq), n)
            x2 = rng.exponential(1.0 / p.lambda0, n)
        return np.stack([x1, x2])


class CaseTwoGenerator(ModalityGenerator):
    def __init__(self, params: CaseTwoParams = CASE2_PRESET):
        self.params = params

    def marginal_pairs(self) -> list[MarginalPair]:
        return self.params.marginal_pairs()

    def _draw(self, hypothesis, n, rng):
        p = self.params
        if hypothesis == Hypothesis.H1:
            x1 = rng.exponential(1.0 / p.lambda1, n)
            u = rng.gamma(p.alpha1, p.theta1, n)
            x2 = u / (u + x1)
        else:
            x1 = rng.exponential(1.0 / p.lambda0, n)
            x2 = rng.random(n) ** (1.0 / p.a0)
        return np.stack([x1, x2])


class IndexJointGenerator(ModalityGenerator):
    """Generator built from a user-supplied per-index joint sampler.

    ``joint_sampler(hypothesis, n, rng)`` must return an (L, n) array
    whose columns are iid draws of the L-variate per-index joint law.
    """

    def __init__(
        self,
        joint_sampler: Callable[[Hypothesis, int, np.random.Generator], np.ndarray],
        marginal_pairs: list[MarginalPair],
    ):
        if len(marginal_pairs) < 2:
            raise ValueError("at least two modalities are required")
        self._joint_sampler = joint_sampler
        self._marginal_pairs = list(marginal_pairs)
        self.num_modalities = len(marginal_pairs)

    def marginal_pairs(self) -> list[MarginalPair]:
        return list(self._marginal_pairs)

    def _draw(self, hypothesis, n, rng):
        values = np.asarray(self._joint_sampler(hypothesis, n, rng), dtype=float)
        if values.shape != (self.num_modalities, n):
            raise ValueError(
                f"joint sampler returned shape {values.shape}, expected {(self.num_modalities, n)}"
            )
        return values


def sample_case1(
    params: CaseOneParams, hypothesis: Hypothesis, n: int, seed: int
) -> SampleBlock:
    return CaseOneGenerator(params).sample(hypothesis, n, seed)


def sample_case2(
    params: CaseTwoParams, hypothesis: Hypothesis, n: int, seed: int
) -> SampleBlock:
    return CaseTwoGenerator(params).sample(hypothesis, n, seed)
