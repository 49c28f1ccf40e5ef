"""Command line interface.

Subcommands reproduce the benchmark outputs:

  roc      Monte Carlo ROC comparison of the configured detectors
  scatter  per-index scatter pairs in both domains under H1
  kl       KL quantities (compressed-Gaussian, product, copula term)
  regime   the same table plus the compressed-vs-copula decision

Exit codes: 0 success, 2 configuration error, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import QuadratureError
from .harness import (
    ConfigError,
    ExperimentConfig,
    HarnessError,
    emit_scatter,
    run_kl_analysis,
    run_roc_experiment,
    write_kl_result,
    write_roc_result,
    write_scatter_result,
)
from .projection import FactorizationError

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detfuse",
        description="Likelihood-ratio detection benchmarks for dependent multimodal data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("roc", "Monte Carlo ROC curves for the configured detectors"),
        ("scatter", "H1 scatter pairs, uncompressed and compressed"),
        ("kl", "KL divergence quantities per compression ratio"),
        ("regime", "KL quantities plus the compressed-vs-copula decision"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="JSON config file (CLI flags override it)")
        p.add_argument("--case", type=int, choices=(1, 2), help="dependence construction")
        p.add_argument("--cr", type=str, help="comma-separated compression ratios, e.g. 0.2,0.5")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per hypothesis")
        p.add_argument("--seed", type=int, help="root experiment seed (required somewhere)")
        p.add_argument("--out", type=str, help="output directory")
        p.add_argument(
            "--detectors",
            type=str,
            help="comma-separated detectors: product, compressed_gaussian, copula:<family>",
        )
        p.add_argument("--n", type=int, help="signal length per sensor")
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
        if name == "scatter":
            p.add_argument("--points", type=int, help="pairs per domain (default: N and M)")
        if name in ("kl", "regime"):
            p.add_argument("--copula", type=str, help="H1 copula family for the correction term")
    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    raw: dict = {}
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must contain a JSON object")
    if args.case is not None:
        raw["case"] = args.case
    if args.cr is not None:
        try:
            raw["compression_ratios"] = [float(c) for c in args.cr.split(",") if c]
        except ValueError as exc:
            raise ConfigError(f"bad --cr value: {args.cr!r}") from exc
    if args.trials is not None:
        raw["trials"] = args.trials
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["output_dir"] = args.out
    if args.detectors is not None:
        raw["detectors"] = [d for d in args.detectors.split(",") if d]
    if args.n is not None:
        raw["n"] = args.n
    if getattr(args, "points", None) is not None:
        raw["scatter_points"] = args.points
    if getattr(args, "copula", None) is not None:
        raw["regime_copula"] = args.copula
    if args.no_figures:
        raw["figures"] = False
    return ExperimentConfig.from_dict(raw)


def _run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    out_dir = Path(config.output_dir)
    written: list[Path] = []

    if args.command == "roc":
        record = run_roc_experiment(config)
        written += write_roc_result(record, out_dir)
        if config.figures:
            from .plots import plot_roc

            written.append(plot_roc(record.curves, out_dir / "roc.png", title=f"case {config.case}"))
        for key in sorted(record.curves):
            curve = record.curves[key]
            print(f"{key}: AUC={curve.auc:.4f} Pd@Pf=0.1={curve.pd_at_pf(0.1):.4f}")
        print(f"warnings: {record.warnings}")
        print(f"wall time: {record.wall_time_s:.2f} s")
    elif args.command == "scatter":
        result = emit_scatter(config)
        written += write_scatter_result(result, out_dir)
        if config.figures:
            from .plots import plot_scatter

            written.append(
                plot_scatter(
                    result.uncompressed,
                    result.compressed,
                    out_dir / "scatter.png",
                    title=f"case {config.case} under H1",
                )
            )
        print(
            f"scatter: {len(result.uncompressed)} uncompressed and "
            f"{len(result.compressed)} compressed pairs"
        )
        print(f"wall time: {result.wall_time_s:.2f} s")
    else:  # kl or regime
        record = run_kl_analysis(config)
        written += write_kl_result(record, out_dir, name=args.command)
        if config.figures:
            from .plots import plot_regime

            written.append(
                plot_regime(record.kl_rows, out_dir / f"{args.command}.png", title=f"case {config.case}")
            )
        for row in record.kl_rows:
            line = (
                f"cr={row['cr']:g} m={row['m']} d_cg={row['d_cg']:.6g} "
                f"d_up={row['d_up']:.6g} upsilon={row['upsilon']:.6g}"
            )
            if args.command == "regime":
                line += (
                    f" compressed_preferred={row['regime_compressed_preferred']}"
                    f" inconclusive={row['inconclusive']}"
                )
            print(line)
        print(f"wall time: {record.wall_time_s:.2f} s")

    for path in written:
        print(f"wrote {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (HarnessError, FactorizationError, QuadratureError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
