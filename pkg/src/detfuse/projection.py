"""Random projections and the Gaussian moment pushforward.

Each sensor gets its own M x N matrix with iid standard normal
entries; the joint operator is their ML x NL block-diagonal assembly.
Entry variance 1 is a free choice: the compressed-Gaussian detector is
invariant to per-sensor rescaling of the projection because the same
matrix enters both the data compression and the moment pushforward.

``push_moments`` maps a blockwise-diagonal moment model through the
projection and caches the Cholesky factors and log-determinants of the
two compressed covariances; all downstream likelihood and divergence
computations use triangular solves against these factors, never an
explicit inverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .generators import SampleBlock
from .moments import MomentModel

__all__ = [
    "FactorizationError",
    "ProjectionSet",
    "CompressedMoments",
    "draw_projection",
    "compress",
    "push_moments",
]


class FactorizationError(RuntimeError):
    """Compressed covariance for one hypothesis is numerically singular."""

    def __init__(self, hypothesis: int):
        super().__init__(f"covariance factorization failed under hypothesis H{hypothesis}")
        self.hypothesis = hypothesis


@dataclass(frozen=True, eq=False)
class ProjectionSet:
    """L per-sensor projection matrices sharing the shape (M, N)."""

    blocks: tuple[np.ndarray, ...]
    seed: int | None = None

    def __post_init__(self):
        shapes = {b.shape for b in self.blocks}
        if len(shapes) != 1:
            raise ValueError("all projection blocks must share one (M, N) shape")
        m, n = self.blocks[0].shape
        if m > n:
            raise ValueError(f"M must not exceed N, got M={m} > N={n}")

    @property
    def m(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def n(self) -> int:
        return self.blocks[0].shape[1]

    @property
    def num_sensors(self) -> int:
        return len(self.blocks)

    def scaled(self, factor: float) -> "ProjectionSet":
        return ProjectionSet(tuple(factor * b for b in self.blocks), seed=None)

    @classmethod
    def identity(cls, n: int, num_sensors: int) -> "ProjectionSet":
        return cls(tuple(np.eye(n) for _ in range(num_sensors)), seed=None)


def draw_projection(m: int, n: int, num_sensors: int, seed: int) -> ProjectionSet:
    """Draw iid standard normal blocks, one per sensor, from one stream."""
    if not (1 <= m <= n):
        raise ValueError(f"need 1 <= M <= N, got M={m}, N={n}")
    if num_sensors < 1:
        raise ValueError("need at least one sensor")
    rng = np.random.default_rng(seed)
    blocks = tuple(rng.standard_normal((m, n)) for _ in range(num_sensors))
    return ProjectionSet(blocks, seed=seed)


def compress(proj: ProjectionSet, x: SampleBlock | np.ndarray) -> np.ndarray:
    """Apply the block-diagonal operator: y = [A_1 x_1; ...; A_L x_L].

    ``x`` may be a SampleBlock, an (L, N) array, or a batch (..., L, N);
    the result has shape (..., M * L).
    """
    values = x.values if isinstance(x, SampleBlock) else np.asarray(x, dtype=float)
    if values.shape[-2] != proj.num_sensors or values.shape[-1] != proj.n:
        raise ValueError(
            f"data shape {values.shape} does not match projection "
            f"(L={proj.num_sensors}, N={proj.n})"
        )
    parts = [values[..., j, :] @ proj.blocks[j].T for j in range(proj.num_sensors)]
    return np.concatenate(parts, axis=-1)


@dataclass(frozen=True, eq=False)
class CompressedMoments:
    """Compressed-domain Gaussian description under both hypotheses.

    Cholesky factors (lower) and log-determinants of both covariances
    are computed once at construction.
    """

    mu0: np.ndarray
    mu1: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    chol0: np.ndarray = field(init=False, repr=False)
    chol1: np.ndarray = field(init=False, repr=False)
    logdet0: float = field(init=False)
    logdet1: float = field(init=False)

    def __post_init__(self):
        k = self.mu0.shape[0]
        for name in ("c0", "c1"):
            c = getattr(self, name)
            if c.shape != (k, k) or not np.allclose(c, c.T, rtol=1e-10, atol=1e-12):
                raise ValueError(f"{name} must be symmetric {k} x {k}")
        for i, c in enumerate((self.c0, self.c1)):
            try:
                chol = linalg.cholesky(c, lower=True)
            except linalg.LinAlgError as exc:
                raise FactorizationError(i) from exc
            object.__setattr__(self, f"chol{i}", chol)
            object.__setattr__(self, f"logdet{i}", float(2.0 * np.sum(np.log(np.diag(chol)))))

    @property
    def dim(self) -> int:
        return self.mu0.shape[0]


def push_moments(model: MomentModel, proj: ProjectionSet) -> CompressedMoments:
    """Compressed mean mu_j = A_j beta_j and covariance blocks
    C_jk = A_j D_jk A_k^T, assembled over sensors for both hypotheses."""
    if model.num_modalities != proj.num_sensors or model.n != proj.n:
        raise ValueError(
            f"moment model (L={model.num_modalities}, N={model.n}) does not match "
            f"projection (L={proj.num_sensors}, N={proj.n})"
        )
    L, m = proj.num_sensors, proj.m
    mus = []
    covs = []
    for hyp in (0, 1):
        mean = model.mean1 if hyp else model.mean0
        diag = model.cov1 if hyp else model.cov0
        mu = np.concatenate([proj.blocks[j] @ mean[j] for j in range(L)])
        c = np.empty((m * L, m * L))
        for j in range(L):
            for k in range(j, L):
                block = (proj.blocks[j] * diag[j, k]) @ proj.blocks[k].T
                c[j * m : (j + 1) * m, k * m : (k + 1) * m] = block
                if k != j:
                    c[k * m : (k + 1) * m, j * m : (j + 1) * m] = block.T
        mus.append(mu)
        covs.append(0.5 * (c + c.T))
    return CompressedMoments(mu0=mus[0], mu1=mus[1], c0=covs[0], c1=covs[1])
