"""Configuration validation, experiment orchestration and CLI behavior."""

import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from detfuse.analysis import mardia_skewness
from detfuse.harness import (
    ConfigError,
    ExperimentConfig,
    emit_scatter,
    run_kl_analysis,
    run_roc_experiment,
    write_kl_result,
    write_roc_result,
    write_scatter_result,
)

SMOKE = dict(seed=314159, case=2, n=100, trials=100, compression_ratios=(0.5,))


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def test_config_requires_seed():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"case": 2})


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config key"):
        ExperimentConfig.from_dict({"seed": 1, "trails": 200})


def test_config_rejects_unknown_param_overrides():
    with pytest.raises(ConfigError, match="unknown case"):
        ExperimentConfig(seed=1, case=1, params={"sigma7_sq": 2.0})


def test_config_param_overrides_apply():
    config = ExperimentConfig(seed=1, case=1, params={"sigma1_sq": 6.0})
    assert config.case_params().sigma1_sq == 6.0
    assert config.case_params().sigma0_sq == 5.0  # preset default retained


@pytest.mark.parametrize(
    "patch",
    [
        {"compression_ratios": (0.0,)},
        {"compression_ratios": (1.5,)},
        {"compression_ratios": (0.001,), "n": 100},  # M rounds to 0
        {"trials": 50},
        {"detectors": ()},
        {"detectors": ("mystery",)},
        {"detectors": ("copula:frank",)},
        {"projection_mode": "sometimes"},
        {"projection_kind": "identity", "compression_ratios": (0.5,)},
        {"case": 3},
        {"upsilon_trials": 10},
        {"regime_copula": "frank"},
    ],
)
def test_config_invariants(patch):
    base = dict(SMOKE)
    base.update(patch)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(base)


def test_config_echo_round_trips():
    config = ExperimentConfig.from_dict(dict(SMOKE))
    again = ExperimentConfig.from_dict(config.to_dict())
    assert again == config


# ---------------------------------------------------------------------------
# experiment runs
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def smoke_record():
    config = ExperimentConfig.from_dict(
        dict(SMOKE, detectors=("product", "compressed_gaussian", "copula:gaussian", "copula:gumbel"))
    )
    return config, run_roc_experiment(config)


def test_smoke_run_produces_all_curves(smoke_record):
    _, record = smoke_record
    assert set(record.curves) == {
        "product",
        "compressed_gaussian_cr0.5",
        "copula_gaussian",
        "copula_gumbel",
    }
    for curve in record.curves.values():
        assert curve.n0 == curve.n1 == 100
    assert record.warnings["copula_fallbacks"] == ["gumbel"]  # Case II tau < 0


def test_smoke_run_writes_declared_files(smoke_record, tmp_path):
    _, record = smoke_record
    written = write_roc_result(record, tmp_path)
    names = {p.name for p in written}
    assert "summary.json" in names
    assert "roc_product.csv" in names
    assert "roc_compressed_gaussian_cr0.5.csv" in names
    body = (tmp_path / "roc_product.csv").read_text().splitlines()
    assert body[0] == "pf,pd"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["config"]["seed"] == SMOKE["seed"]
    assert summary["curves"]["product"]["auc"] == record.curves["product"].auc
    # the echo alone rebuilds the identical config
    assert ExperimentConfig.from_dict(summary["config"]).to_dict() == record.config
    # fitted copulas are persisted as family name plus parameters
    assert summary["fitted_copulas"]["gaussian"]["family"] == "gaussian"
    assert -1.0 < summary["fitted_copulas"]["gaussian"]["rho"] < 0.0  # Case II is negative
    assert summary["fitted_copulas"]["gumbel"] == {"family": "independence"}


def test_rerun_from_echo_is_identical(smoke_record):
    config, record = smoke_record
    again = run_roc_experiment(ExperimentConfig.from_dict(record.config))
    for key, curve in record.curves.items():
        assert np.array_equal(curve.points, again.curves[key].points)


def test_compressed_beats_product_in_case2(smoke_record):
    _, record = smoke_record
    assert record.curves["compressed_gaussian_cr0.5"].auc > record.curves["product"].auc


def test_per_trial_projection_mode_runs():
    config = ExperimentConfig.from_dict(
        dict(SMOKE, n=40, projection_mode="per_trial", detectors=("compressed_gaussian",))
    )
    record = run_roc_experiment(config)
    assert record.curves["compressed_gaussian_cr0.5"].auc > 0.5


def test_identity_projection_at_cr_one_is_byte_deterministic(tmp_path):
    config = ExperimentConfig.from_dict(
        dict(
            SMOKE,
            n=40,
            compression_ratios=(1.0,),
            projection_kind="identity",
            detectors=("compressed_gaussian",),
        )
    )
    record = run_roc_experiment(config)
    assert "compressed_gaussian_cr1" in record.curves
    write_roc_result(record, tmp_path / "a")
    write_roc_result(run_roc_experiment(config), tmp_path / "b")
    csv = "roc_compressed_gaussian_cr1.csv"
    assert (tmp_path / "a" / csv).read_bytes() == (tmp_path / "b" / csv).read_bytes()


def test_train_eval_streams_disjoint():
    from detfuse.seeding import derive_seed

    seed = SMOKE["seed"]
    eval_seeds = {derive_seed(seed, "eval", h, t) for h in ("H0", "H1") for t in range(5000)}
    assert derive_seed(seed, "train", "H1") not in eval_seeds


# ---------------------------------------------------------------------------
# scatter
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("case", [1, 2])
def test_scatter_supports(case, tmp_path):
    config = ExperimentConfig.from_dict(dict(SMOKE, case=case, n=1000, compression_ratios=(0.2,)))
    result = emit_scatter(config)
    assert result.uncompressed.shape == (1000, 2)
    assert result.compressed.shape == (200, 2)
    if case == 1:
        assert np.all(result.uncompressed[:, 1] >= 0.0)
    else:
        assert np.all((result.uncompressed[:, 1] > 0.0) & (result.uncompressed[:, 1] < 1.0))
    paths = write_scatter_result(result, tmp_path)
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "u1,u2,domain"
    assert lines[1].endswith(",uncompressed")
    assert lines[-1].endswith(",compressed")
    assert len(lines) == 1 + 1000 + 200


def test_scatter_compressed_pairs_look_gaussian():
    # single-realization cloud passes the Mardia skewness gate at 1%
    config = ExperimentConfig.from_dict(dict(SMOKE, case=2, n=1000, compression_ratios=(0.2,)))
    result = emit_scatter(config)
    _, stat, dof = mardia_skewness(result.compressed)
    assert stat < stats.chi2.ppf(0.99, dof)
    # while the raw pairs are wildly non-Gaussian
    _, raw_stat, _ = mardia_skewness(result.uncompressed)
    assert raw_stat > stats.chi2.ppf(0.99, dof)


def test_scatter_point_budget_enforced():
    config = ExperimentConfig.from_dict(dict(SMOKE, n=50))
    with pytest.raises(ConfigError):
        emit_scatter(config, n_points=50 * 100 + 1)


# ---------------------------------------------------------------------------
# kl / regime
# ---------------------------------------------------------------------------


def test_kl_analysis_structure(tmp_path):
    config = ExperimentConfig.from_dict(
        dict(SMOKE, n=200, compression_ratios=(0.1, 0.3, 0.6), regime_copula="gaussian")
    )
    record = run_kl_analysis(config)
    rows = record.kl_rows
    assert [row["cr"] for row in rows] == [0.1, 0.3, 0.6]
    d_cgs = [row["d_cg"] for row in rows]
    assert np.all(np.diff(d_cgs) > 0.0)  # nested information growth over cr
    for row in rows:
        assert row["d_up"] == rows[0]["d_up"]
        assert row["regime_compressed_preferred"] == (
            row["upsilon"] > row["d_up"] - row["d_cg"]
        )
    paths = write_kl_result(record, tmp_path, name="regime")
    lines = paths[0].read_text().splitlines()
    assert lines[0].startswith("cr,m,d_cg,d_up,upsilon")
    assert len(lines) == 4


def test_kl_analysis_independence_copula_zero_upsilon():
    config = ExperimentConfig.from_dict(dict(SMOKE, n=100, regime_copula="independence"))
    record = run_kl_analysis(config)
    assert record.kl_rows[0]["upsilon"] == 0.0


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def run_cli(args, env_extra=None):
    env = dict(os.environ)
    env["PYTHONPATH"] = str(Path(__file__).resolve().parents[1] / "src")
    env.update(env_extra or {})
    return subprocess.run(
        [sys.executable, "-m", "detfuse", *args], capture_output=True, text=True, env=env
    )


def test_cli_roc_smoke(tmp_path):
    out = tmp_path / "run"
    proc = run_cli(
        [
            "roc",
            "--case", "2",
            "--n", "100",
            "--trials", "100",
            "--cr", "0.5",
            "--seed", "11",
            "--detectors", "product,compressed_gaussian",
            "--out", str(out),
        ]
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "summary.json").exists()
    assert (out / "roc.png").exists()
    assert "AUC" in proc.stdout


def test_cli_config_file_with_flag_override(tmp_path):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps(dict(SMOKE, output_dir=str(tmp_path / "a"))))
    proc = run_cli(["roc", "--config", str(config_file), "--out", str(tmp_path / "b"), "--no-figures"])
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "b" / "summary.json").exists()
    assert not (tmp_path / "b" / "roc.png").exists()


def test_cli_exit_code_2_on_config_errors(tmp_path):
    # missing seed
    proc = run_cli(["roc", "--case", "2", "--trials", "100"])
    assert proc.returncode == 2
    # unknown key in config file
    bad = tmp_path / "bad.json"
    bad.write_text('{"seed": 1, "trails": 100}')
    proc = run_cli(["roc", "--config", str(bad)])
    assert proc.returncode == 2
    assert "config error" in proc.stderr
    # unknown detector
    proc = run_cli(["roc", "--seed", "1", "--detectors", "oracle"])
    assert proc.returncode == 2


def test_cli_scatter_and_regime(tmp_path):
    out = tmp_path / "s"
    proc = run_cli(
        ["scatter", "--case", "1", "--n", "300", "--trials", "100", "--cr", "0.2",
         "--seed", "7", "--points", "120", "--out", str(out)]
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "scatter.csv").exists()
    out2 = tmp_path / "r"
    proc = run_cli(
        ["regime", "--case", "2", "--n", "200", "--cr", "0.2,0.4", "--seed", "7",
         "--copula", "gaussian", "--out", str(out2)]
    )
    assert proc.returncode == 0, proc.stderr
    assert (out2 / "regime.csv").exists()
    assert "compressed_preferred" in proc.stdout
