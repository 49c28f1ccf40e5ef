"""detfuse: likelihood-ratio detection benchmarks for dependent multimodal data.

Compares three fusion strategies on synthetic two-sensor data with
known inter-modal dependence: the product of marginals on raw data,
bivariate-copula fusion on raw data, and a Gaussian-approximation
detector on randomly projected (compressed) data, together with the
KL-divergence regime analysis that says when compression wins.
"""

from ._version import ARTIFACT_VERSION as __version__
from .analysis import (
    KlReport,
    RocCurve,
    UpsilonEstimate,
    estimate_upsilon,
    gaussian_kl,
    kl_compressed_gaussian,
    kl_marginal_product,
    marginal_kl,
    regime_decision,
    roc,
)
from .copulas import (
    ClaytonCopula,
    CopulaSpec,
    GaussianCopula,
    GumbelCopula,
    IndependenceCopula,
    StudentTCopula,
    empirical_kendall_tau,
    fit_copula,
    tau_to_param,
)
from .detectors import (
    ClampCounter,
    MarginalPair,
    Score,
    llr_compressed_gaussian,
    llr_copula,
    llr_product,
)
from .distributions import Beta, Distribution, Exponential, Gamma, Normal
from .generators import (
    CASE1_PRESET,
    CASE2_PRESET,
    CaseOneGenerator,
    CaseOneParams,
    CaseTwoGenerator,
    CaseTwoParams,
    Hypothesis,
    IndexJointGenerator,
    SampleBlock,
    sample_case1,
    sample_case2,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ResultRecord,
    emit_scatter,
    run_kl_analysis,
    run_roc_experiment,
)
from .moments import MomentEstimate, MomentModel, case1_moments, case2_moments, mc_moments
from .projection import (
    CompressedMoments,
    FactorizationError,
    ProjectionSet,
    compress,
    draw_projection,
    push_moments,
)
from .seeding import derive_seed

__all__ = [name for name in dir() if not name.startswith("_")]
