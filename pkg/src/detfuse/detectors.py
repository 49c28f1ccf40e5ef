"""The three competing log-likelihood-ratio score functions.

All detectors share one sign convention: positive scores favor the
signal hypothesis, and each score is the true log-likelihood ratio
(including normalizing constants), so the three are directly
comparable on a single axis.

Scores are computed in the log domain.  Where a density vanishes under
exactly one hypothesis the per-sample log-ratio is clamped to
+-LOG_RATIO_CLAMP and the event is counted; where it vanishes under
both (outside both supports, a measure-zero input) the contribution is
zero and also counted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .copulas import CopulaSpec, IndependenceCopula, clamp_unit
from .distributions import MarginalPair
from .generators import SampleBlock
from .projection import CompressedMoments

__all__ = [
    "LOG_RATIO_CLAMP",
    "MarginalPair",
    "Score",
    "ClampCounter",
    "llr_product",
    "llr_copula",
    "llr_compressed_gaussian",
    "score_product",
    "score_copula",
    "score_compressed_gaussian",
]

LOG_RATIO_CLAMP = 1e300


@dataclass(frozen=True)
class Score:
    value: float
    detector: str


@dataclass
class ClampCounter:
    """Per-run tally of clamped log-ratios and unit-interval clamps."""

    log_ratio: int = 0
    unit: int = 0

    def merge(self, other: "ClampCounter") -> None:
        self.log_ratio += other.log_ratio
        self.unit += other.unit


def _as_batch(x: SampleBlock | np.ndarray) -> np.ndarray:
    values = x.values if isinstance(x, SampleBlock) else np.asarray(x, dtype=float)
    if values.ndim < 2:
        raise ValueError("expected data of shape (..., L, n)")
    return values


def _clamped_log_ratio(lp1: np.ndarray, lp0: np.ndarray, counter: ClampCounter | None) -> np.ndarray:
    with np.errstate(invalid="ignore"):  # -inf minus -inf is resolved below
        ratio = lp1 - lp0
    bad = ~np.isfinite(ratio)
    if np.any(bad):
        both = np.isneginf(lp1) & np.isneginf(lp0)
        ratio = np.where(both, 0.0, ratio)
        ratio = np.clip(ratio, -LOG_RATIO_CLAMP, LOG_RATIO_CLAMP)
        if counter is not None:
            counter.log_ratio += int(np.count_nonzero(bad))
    return ratio


def llr_product(
    x: SampleBlock | np.ndarray,
    marginals: list[MarginalPair],
    counter: ClampCounter | None = None,
) -> float | np.ndarray:
    """Marginal-only LLR: sum over modalities and indices of
    log f1(x) - log f0(x).  Accepts (L, n) data or a batch (..., L, n);
    batches return an array of per-block scores."""
    values = _as_batch(x)
    if values.shape[-2] != len(marginals):
        raise ValueError(f"expected {len(marginals)} modalities, got {values.shape[-2]}")
    total = np.zeros(values.shape[:-2])
    for j, pair in enumerate(marginals):
        col = values[..., j, :]
        total = total + _clamped_log_ratio(pair.h1.log_pdf(col), pair.h0.log_pdf(col), counter).sum(axis=-1)
    return total if total.ndim else float(total)


def llr_copula(
    x: SampleBlock | np.ndarray,
    marginals: list[MarginalPair],
    c1: CopulaSpec,
    c0: CopulaSpec = IndependenceCopula(),
    counter: ClampCounter | None = None,
) -> float | np.ndarray:
    """Copula-corrected LLR for two modalities.

    Adds to the product score the per-index copula log-ratio, with
    hypothesis-specific arguments: the H1 term is evaluated at the H1
    marginal cdf values, the H0 term at the H0 marginal cdf values.
    """
    values = _as_batch(x)
    if values.shape[-2] != 2 or len(marginals) != 2:
        raise ValueError("copula fusion supports exactly two modalities")
    total = llr_product(values, marginals, counter)

    def copula_term(copula: CopulaSpec, hyp: int) -> np.ndarray:
        if isinstance(copula, IndependenceCopula):
            return np.zeros(values.shape[:-2])
        u, n_u = clamp_unit(marginals[0].under(hyp).cdf(values[..., 0, :]))
        v, n_v = clamp_unit(marginals[1].under(hyp).cdf(values[..., 1, :]))
        if counter is not None:
            counter.unit += n_u + n_v
        return copula.log_density(u, v).sum(axis=-1)

    total = total + copula_term(c1, 1) - copula_term(c0, 0)
    return total if isinstance(total, np.ndarray) and total.ndim else float(total)


def llr_compressed_gaussian(
    y: np.ndarray,
    cm: CompressedMoments,
) -> float | np.ndarray:
    """Exact Gaussian LLR of compressed data via the cached factors.

    score = -1/2 [q1 - q0] - 1/2 [logdet C1 - logdet C0] with
    qi = (y - mu_i)^T Ci^{-1} (y - mu_i) computed by one triangular
    solve per hypothesis.  ``y`` may be a single vector or (..., ML).
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 1
    if y.shape[-1] != cm.dim:
        raise ValueError(f"expected vectors of length {cm.dim}, got {y.shape[-1]}")
    flat = y.reshape(-1, cm.dim)

    def quad(mu, chol):
        z = solve_triangular(chol, (flat - mu).T, lower=True)
        return np.sum(z * z, axis=0)

    score = -0.5 * (quad(cm.mu1, cm.chol1) - quad(cm.mu0, cm.chol0)) - 0.5 * (
        cm.logdet1 - cm.logdet0
    )
    return float(score[0]) if scalar else score.reshape(y.shape[:-1])


def score_product(x: SampleBlock, marginals, counter=None) -> Score:
    return Score(float(llr_product(x, marginals, counter)), "product")


def score_copula(x: SampleBlock, marginals, c1, c0=IndependenceCopula(), counter=None) -> Score:
    return Score(float(llr_copula(x, marginals, c1, c0, counter)), f"copula_{c1.family}")


def score_compressed_gaussian(y: np.ndarray, cm: CompressedMoments) -> Score:
    return Score(float(llr_compressed_gaussian(y, cm)), "compressed_gaussian")
