"""Figure rendering for the report path.

Figures are written next to the delimited outputs with pinned PNG
metadata so repeated runs of the same configuration produce identical
bytes.  The data files remain the authoritative record; every figure
is derived from them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import RocCurve

__all__ = ["plot_roc", "plot_scatter", "plot_regime", "SAVEFIG_KWARGS"]

SAVEFIG_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **SAVEFIG_KWARGS)
    plt.close(fig)
    return path


def plot_roc(curves: dict[str, RocCurve], path: str | Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    for key in sorted(curves):
        curve = curves[key]
        ax.plot(curve.points[:, 0], curve.points[:, 1], label=f"{key} (AUC {curve.auc:.3f})")
    ax.plot([0, 1], [0, 1], "k--", linewidth=0.8, label="chance")
    ax.set_xlabel("probability of false alarm")
    ax.set_ylabel("probability of detection")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_scatter(
    uncompressed: np.ndarray, compressed: np.ndarray, path: str | Path, title: str = ""
) -> Path:
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.2))
    for ax, pts, label in (
        (axes[0], uncompressed, "uncompressed"),
        (axes[1], compressed, "compressed"),
    ):
        ax.plot(pts[:, 0], pts[:, 1], ".", markersize=2.5, alpha=0.6)
        ax.set_xlabel("sensor 1")
        ax.set_ylabel("sensor 2")
        ax.set_title(label)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, Path(path))


def plot_regime(rows: list[dict], path: str | Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    crs = [row["cr"] for row in rows]
    gap = [row["d_up"] - row["d_cg"] for row in rows]
    upsilon = rows[0]["upsilon"]
    ax.plot(crs, gap, "o-", label="product KL minus compressed KL")
    ax.axhline(upsilon, color="tab:red", linestyle="--", label="copula correction term")
    ax.set_xlabel("compression ratio")
    ax.set_ylabel("nats")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, Path(path))
