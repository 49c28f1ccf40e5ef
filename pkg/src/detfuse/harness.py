"""Experiment configuration, orchestration, seeding and persistence.

Every run is a pure function of its configuration: the root seed is
mixed with purpose tags ("eval", "train", "proj", "scatter",
"upsilon"), the hypothesis label and the trial index through the
splitmix64 derivation in ``seeding``, so copula-training draws are
disjoint from evaluation draws by construction and any single trial
can be regenerated from the summary echo alone.

Persisted outputs are byte-stable: CSV floats use shortest round-trip
formatting, JSON keys are sorted, and the wall-clock time is reported
on stdout only, never written into an output file.
"""

from __future__ import annotations

import json
import time
import warnings as _warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from ._version import ARTIFACT_VERSION
from .analysis import (
    RocCurve,
    estimate_upsilon,
    kl_compressed_gaussian,
    kl_marginal_product,
    regime_decision,
    roc,
)
from .copulas import CopulaFitWarning, FAMILIES, IndependenceCopula, fit_copula
from .detectors import ClampCounter, llr_compressed_gaussian, llr_copula, llr_product
from .generators import (
    CASE1_PRESET,
    CASE2_PRESET,
    CaseOneGenerator,
    CaseOneParams,
    CaseTwoGenerator,
    CaseTwoParams,
    Hypothesis,
    ModalityGenerator,
)
from .moments import MomentModel, case1_moments, case2_moments
from .projection import ProjectionSet, compress, draw_projection, push_moments
from .seeding import derive_seed

__all__ = [
    "ConfigError",
    "HarnessError",
    "ExperimentConfig",
    "ResultRecord",
    "ScatterResult",
    "run_roc_experiment",
    "emit_scatter",
    "run_kl_analysis",
    "write_roc_result",
    "write_scatter_result",
    "write_kl_result",
]


class ConfigError(ValueError):
    """Invalid or unknown experiment configuration."""


class HarnessError(RuntimeError):
    """A module error during a run; carries the failing trial seed."""


_DETECTOR_KINDS = ("product", "compressed_gaussian")


@dataclass(frozen=True)
class ExperimentConfig:
    """Self-describing experiment parameters; every field has an explicit
    value in the persisted echo and the seed is mandatory."""

    seed: int
    case: int = 2
    params: dict = field(default_factory=dict)
    n: int = 1000
    compression_ratios: tuple[float, ...] = (0.2,)
    trials: int = 5000
    detectors: tuple[str, ...] = ("product", "compressed_gaussian")
    projection_mode: str = "fixed"
    projection_kind: str = "gaussian"
    copula_training_samples: int = 10_000
    student_t_dof: float = 5.0
    regime_copula: str = "gaussian"
    upsilon_trials: int = 10_000
    scatter_points: int | None = None
    output_dir: str = "results"
    figures: bool = True

    def __post_init__(self):
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer (no wall-clock defaults)")
        if self.case not in (1, 2):
            raise ConfigError(f"case must be 1 or 2, got {self.case!r}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.trials < 100:
            raise ConfigError("trials must be >= 100")
        object.__setattr__(self, "compression_ratios", tuple(float(c) for c in self.compression_ratios))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        for cr in self.compression_ratios:
            if not 0.0 < cr <= 1.0:
                raise ConfigError(f"compression ratio must lie in (0, 1], got {cr!r}")
            if self.rows_for(cr) < 1:
                raise ConfigError(f"compression ratio {cr!r} yields M < 1")
        if not self.detectors:
            raise ConfigError("at least one detector is required")
        for det in self.detectors:
            kind, _, family = det.partition(":")
            if kind == "copula":
                if family not in FAMILIES:
                    raise ConfigError(f"unknown copula family {family!r} in detector {det!r}")
            elif det not in _DETECTOR_KINDS:
                raise ConfigError(f"unknown detector {det!r}")
        if self.projection_mode not in ("fixed", "per_trial"):
            raise ConfigError(f"projection_mode must be 'fixed' or 'per_trial', got {self.projection_mode!r}")
        if self.projection_kind not in ("gaussian", "identity"):
            raise ConfigError(f"projection_kind must be 'gaussian' or 'identity', got {self.projection_kind!r}")
        if self.projection_kind == "identity" and any(c != 1.0 for c in self.compression_ratios):
            raise ConfigError("identity projection requires every compression ratio to equal 1")
        if self.copula_training_samples < 2:
            raise ConfigError("copula_training_samples must be >= 2")
        if self.student_t_dof <= 0.0:
            raise ConfigError("student_t_dof must be > 0")
        if self.regime_copula not in FAMILIES:
            raise ConfigError(f"unknown regime copula {self.regime_copula!r}")
        if self.upsilon_trials < 10_000:
            raise ConfigError("upsilon_trials must be >= 10000")
        if self.scatter_points is not None and self.scatter_points < 1:
            raise ConfigError("scatter_points must be >= 1")
        if not isinstance(self.params, dict):
            raise ConfigError("params must be an object of parameter overrides")
        self.case_params()  # validates override keys and values

    def rows_for(self, cr: float) -> int:
        return int(round(cr * self.n))

    def case_params(self) -> CaseOneParams | CaseTwoParams:
        cls, preset = (
            (CaseOneParams, CASE1_PRESET) if self.case == 1 else (CaseTwoParams, CASE2_PRESET)
        )
        allowed = {f.name for f in fields(cls)}
        unknown = set(self.params) - allowed
        if unknown:
            raise ConfigError(
                f"unknown case {self.case} parameter(s) {sorted(unknown)}; allowed: {sorted(allowed)}"
            )
        merged = {f.name: getattr(preset, f.name) for f in fields(cls)}
        merged.update({k: float(v) for k, v in self.params.items()})
        try:
            return cls(**merged)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def generator(self) -> ModalityGenerator:
        params = self.case_params()
        return CaseOneGenerator(params) if self.case == 1 else CaseTwoGenerator(params)

    def moment_model(self) -> MomentModel:
        params = self.case_params()
        maker = case1_moments if self.case == 1 else case2_moments
        return maker(params, self.n)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        allowed = {f.name for f in fields(cls)}
        unknown = set(raw) - allowed
        if unknown:
            raise ConfigError(f"unknown config key(s) {sorted(unknown)}; allowed: {sorted(allowed)}")
        if "seed" not in raw:
            raise ConfigError("config must provide a seed")
        kwargs = dict(raw)
        for key in ("compression_ratios", "detectors"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


@dataclass(eq=False)
class ResultRecord:
    config: dict
    curves: dict[str, RocCurve]
    kl_rows: list[dict] | None
    warnings: dict
    wall_time_s: float
    fitted_copulas: dict[str, dict] = field(default_factory=dict)
    version: str = ARTIFACT_VERSION


@dataclass(eq=False)
class ScatterResult:
    config: dict
    uncompressed: np.ndarray  # (n_points, 2)
    compressed: np.ndarray  # (n_points, 2)
    wall_time_s: float
    version: str = ARTIFACT_VERSION


def _cr_tag(cr: float) -> str:
    return f"{cr:g}"


def _eval_data(generator: ModalityGenerator, hyp: Hypothesis, config: ExperimentConfig) -> np.ndarray:
    """Evaluation trials stacked to (trials, L, n), one derived seed per
    trial so any trial is reproducible in isolation."""
    out = np.empty((config.trials, generator.num_modalities, config.n))
    for t in range(config.trials):
        trial_seed = derive_seed(config.seed, "eval", hyp.name, t)
        try:
            out[t] = generator.sample(hyp, config.n, trial_seed).values
        except Exception as exc:
            raise HarnessError(f"generation failed at trial {t} (seed {trial_seed})") from exc
    return out


def _fit_copulas(config: ExperimentConfig, generator, marginals, families: list[str]):
    """Fit the H1 copulas on a training block drawn from the dedicated
    'train' seed domain; returns specs plus recorded fallbacks."""
    specs: dict[str, object] = {}
    fallbacks: list[str] = []
    if not families:
        return specs, fallbacks
    train_seed = derive_seed(config.seed, "train", Hypothesis.H1.name)
    block = generator.sample(Hypothesis.H1, config.copula_training_samples, train_seed)
    u = marginals[0].h1.cdf(block.values[0])
    v = marginals[1].h1.cdf(block.values[1])
    for family in families:
        with _warnings.catch_warnings(record=True) as caught:
            _warnings.simplefilter("always", CopulaFitWarning)
            specs[family] = fit_copula(family, u, v, nu=config.student_t_dof)
        if any(issubclass(w.category, CopulaFitWarning) for w in caught):
            fallbacks.append(family)
    return specs, fallbacks


def _projection_for(config: ExperimentConfig, cr: float, *tags) -> ProjectionSet:
    m = config.rows_for(cr)
    if config.projection_kind == "identity":
        return ProjectionSet.identity(config.n, 2)
    return draw_projection(m, config.n, 2, derive_seed(config.seed, "proj", _cr_tag(cr), *tags))


def run_roc_experiment(config: ExperimentConfig) -> ResultRecord:
    """Generate evaluation data, score every configured detector, and
    assemble one ROC per detector (per compression ratio for the
    compressed-Gaussian detector)."""
    t0 = time.perf_counter()
    generator = config.generator()
    marginals = generator.marginal_pairs()
    counter = ClampCounter()

    data = {h: _eval_data(generator, h, config) for h in (Hypothesis.H0, Hypothesis.H1)}

    copula_families = [d.split(":", 1)[1] for d in config.detectors if d.startswith("copula:")]
    copula_specs, fallbacks = _fit_copulas(config, generator, marginals, copula_families)

    curves: dict[str, RocCurve] = {}
    product_scores: dict[Hypothesis, np.ndarray] = {}

    def product_for(h: Hypothesis) -> np.ndarray:
        if h not in product_scores:
            product_scores[h] = llr_product(data[h], marginals, counter)
        return product_scores[h]

    for det in config.detectors:
        try:
            if det == "product":
                curves["product"] = roc(product_for(Hypothesis.H0), product_for(Hypothesis.H1))
            elif det.startswith("copula:"):
                family = det.split(":", 1)[1]
                c1 = copula_specs[family]
                scores = {
                    h: llr_copula(data[h], marginals, c1, IndependenceCopula(), counter)
                    for h in (Hypothesis.H0, Hypothesis.H1)
                }
                curves[f"copula_{family}"] = roc(scores[Hypothesis.H0], scores[Hypothesis.H1])
            else:  # compressed_gaussian
                model = config.moment_model()
                for cr in config.compression_ratios:
                    scores = _compressed_scores(config, model, data, cr)
                    curves[f"compressed_gaussian_cr{_cr_tag(cr)}"] = roc(
                        scores[Hypothesis.H0], scores[Hypothesis.H1]
                    )
        except HarnessError:
            raise
        except Exception as exc:
            raise HarnessError(f"detector {det!r} failed: {exc}") from exc

    record_warnings = {
        "log_ratio_clamps": counter.log_ratio,
        "unit_interval_clamps": counter.unit,
        "copula_fallbacks": sorted(fallbacks),
    }
    return ResultRecord(
        config=config.to_dict(),
        curves=curves,
        kl_rows=None,
        warnings=record_warnings,
        wall_time_s=time.perf_counter() - t0,
        fitted_copulas={family: spec.to_dict() for family, spec in copula_specs.items()},
    )


def _compressed_scores(config, model, data, cr) -> dict[Hypothesis, np.ndarray]:
    if config.projection_mode == "fixed":
        proj = _projection_for(config, cr)
        cm = push_moments(model, proj)
        return {h: llr_compressed_gaussian(compress(proj, data[h]), cm) for h in data}
    scores: dict[Hypothesis, np.ndarray] = {}
    for h, blocks in data.items():
        out = np.empty(len(blocks))
        for t, values in enumerate(blocks):
            proj = _projection_for(config, cr, h.name, t)
            cm = push_moments(model, proj)
            out[t] = llr_compressed_gaussian(compress(proj, values), cm)
        scores[h] = out
    return scores


def emit_scatter(config: ExperimentConfig, n_points: int | None = None) -> ScatterResult:
    """Signal-hypothesis scatter pairs in both domains.

    Uncompressed points are per-index modality pairs (x1[i], x2[i]);
    compressed points pair the i-th coordinate of each sensor's
    compressed vector, accumulating realizations until n_points pairs
    exist in each domain.
    """
    t0 = time.perf_counter()
    generator = config.generator()
    cr = config.compression_ratios[0]
    m = config.rows_for(cr)
    if n_points is None:
        n_points = config.scatter_points
    uncompressed_points = n_points if n_points is not None else config.n
    compressed_points = n_points if n_points is not None else m
    if max(uncompressed_points, compressed_points) > config.n * config.trials:
        raise ConfigError("n_points exceeds n * trials")

    proj = _projection_for(config, cr)

    def gather(count: int, extract) -> np.ndarray:
        chunks = []
        got = 0
        trial = 0
        while got < count:
            seed = derive_seed(config.seed, "scatter", Hypothesis.H1.name, trial)
            block = generator.sample(Hypothesis.H1, config.n, seed)
            pairs = extract(block.values)
            chunks.append(pairs[: count - got])
            got += len(chunks[-1])
            trial += 1
        return np.concatenate(chunks, axis=0)

    uncompressed = gather(uncompressed_points, lambda vals: vals.T)
    compressed = gather(
        compressed_points,
        lambda vals: np.column_stack([(proj.blocks[0] @ vals[0]), (proj.blocks[1] @ vals[1])]),
    )
    return ScatterResult(
        config=config.to_dict(),
        uncompressed=uncompressed,
        compressed=compressed,
        wall_time_s=time.perf_counter() - t0,
    )


def run_kl_analysis(config: ExperimentConfig) -> ResultRecord:
    """The regime table: for each compression ratio, the compressed-
    Gaussian KL against the product-approach KL and the Monte Carlo
    estimate of the copula correction term."""
    t0 = time.perf_counter()
    generator = config.generator()
    marginals = generator.marginal_pairs()
    model = config.moment_model()

    d_up = kl_marginal_product(marginals, config.n)

    if config.regime_copula == "independence":
        c1 = IndependenceCopula()
        fallbacks: list[str] = []
    else:
        specs, fallbacks = _fit_copulas(config, generator, marginals, [config.regime_copula])
        c1 = specs[config.regime_copula]
    ups = estimate_upsilon(
        c1,
        generator,
        marginals,
        trials=config.upsilon_trials,
        seed=derive_seed(config.seed, "upsilon-root"),
        n=config.n,
    )

    rows = []
    for cr in config.compression_ratios:
        proj = _projection_for(config, cr)
        d_cg = kl_compressed_gaussian(model, proj)
        report = regime_decision(ups.value, d_up, d_cg, upsilon_se=ups.se)
        row = {"cr": cr, "m": config.rows_for(cr)}
        row.update(report.to_dict())
        rows.append(row)

    return ResultRecord(
        config=config.to_dict(),
        curves={},
        kl_rows=rows,
        warnings={"copula_fallbacks": sorted(fallbacks)},
        wall_time_s=time.perf_counter() - t0,
        fitted_copulas={config.regime_copula: c1.to_dict()},
    )


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_json(path: Path, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_roc_result(record: ResultRecord, out_dir: str | Path) -> list[Path]:
    """One `pf,pd` CSV per curve plus a JSON summary embedding the full
    config echo; returns the written paths."""
    out = Path(out_dir)
    written = []
    curve_index = {}
    for key, curve in record.curves.items():
        path = out / f"roc_{key}.csv"
        lines = ["pf,pd"] + [f"{_fmt(pf)},{_fmt(pd)}" for pf, pd in curve.points]
        _write_text(path, "\n".join(lines) + "\n")
        written.append(path)
        curve_index[key] = {
            "file": path.name,
            "auc": curve.auc,
            "pd_at_pf_0.1": curve.pd_at_pf(0.1),
            "n0": curve.n0,
            "n1": curve.n1,
        }
    summary = {
        "artifact_version": record.version,
        "config": record.config,
        "curves": curve_index,
        "fitted_copulas": record.fitted_copulas,
        "warnings": record.warnings,
    }
    path = out / "summary.json"
    _write_json(path, summary)
    written.append(path)
    return written


def write_scatter_result(result: ScatterResult, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    lines = ["u1,u2,domain"]
    lines += [f"{_fmt(a)},{_fmt(b)},uncompressed" for a, b in result.uncompressed]
    lines += [f"{_fmt(a)},{_fmt(b)},compressed" for a, b in result.compressed]
    csv_path = out / "scatter.csv"
    _write_text(csv_path, "\n".join(lines) + "\n")
    meta = {
        "artifact_version": result.version,
        "config": result.config,
        "points": {
            "uncompressed": len(result.uncompressed),
            "compressed": len(result.compressed),
        },
    }
    json_path = out / "scatter.json"
    _write_json(json_path, meta)
    return [csv_path, json_path]


def write_kl_result(record: ResultRecord, out_dir: str | Path, name: str = "regime") -> list[Path]:
    out = Path(out_dir)
    columns = [
        "cr",
        "m",
        "d_cg",
        "d_up",
        "upsilon",
        "upsilon_se",
        "regime_compressed_preferred",
        "inconclusive",
    ]
    lines = [",".join(columns)]
    for row in record.kl_rows or []:
        cells = []
        for col in columns:
            value = row[col]
            if isinstance(value, bool):
                cells.append(str(value).lower())
            elif isinstance(value, float):
                cells.append(_fmt(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    csv_path = out / f"{name}.csv"
    _write_text(csv_path, "\n".join(lines) + "\n")
    payload = {
        "artifact_version": record.version,
        "config": record.config,
        "rows": record.kl_rows,
        "fitted_copulas": record.fitted_copulas,
        "warnings": record.warnings,
    }
    json_path = out / f"{name}.json"
    _write_json(json_path, payload)
    return [csv_path, json_path]
