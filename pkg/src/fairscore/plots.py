"""Figure rendering for CLI reports.

Each helper takes a report payload (the same dict that goes into the JSON
export) and writes one PNG. The CLI calls these when --plot-dir is given,
so every figure sits next to the delimited output it illustrates.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_arrangement_volumes",
    "plot_samples",
    "plot_stability_histogram",
    "plot_suggestion",
    "plot_up_estimate",
]


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_samples(samples, path) -> Path:
    """Scatter of sampled weight vectors (first three coordinates for d > 3)."""
    pts = np.asarray(samples, dtype=float)
    d = pts.shape[1]
    if d == 2:
        fig, ax = plt.subplots(figsize=(5, 5))
        circle = np.linspace(0, 2 * np.pi, 256)
        ax.plot(np.sin(circle), np.cos(circle), color="0.8", lw=1)
        ax.scatter(pts[:, 0], pts[:, 1], s=6, alpha=0.6)
        ax.set_xlabel("$w_1$")
        ax.set_ylabel("$w_2$")
        ax.set_aspect("equal")
    else:
        fig = plt.figure(figsize=(6, 6))
        ax = fig.add_subplot(111, projection="3d")
        ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2], s=4, alpha=0.5)
        ax.set_xlabel("$w_1$")
        ax.set_ylabel("$w_2$")
        ax.set_zlabel("$w_3$")
        if d > 3:
            ax.set_title(f"first 3 of {d} coordinates")
    return _save(fig, Path(path))


def plot_up_estimate(payload: dict, path) -> Path:
    """Unfair-portion gauge with its confidence band."""
    up, err = payload["up"], payload["error"]
    fig, ax = plt.subplots(figsize=(6, 2.2))
    ax.barh([0], [up], color="#c0392b", height=0.5)
    ax.barh([0], [1 - up], left=[up], color="#27ae60", height=0.5)
    ax.errorbar([up], [0], xerr=[err], fmt="none", ecolor="black", capsize=4)
    ax.set_xlim(0, 1)
    ax.set_yticks([])
    ax.set_xlabel("unfair portion of the sampled vicinity")
    ax.set_title(f"UP = {up:.4f} ± {err:.4f} (α={payload['alpha']})")
    return _save(fig, Path(path))


def plot_stability_histogram(payload: dict, path) -> Path:
    """Bar chart of the most frequent rankings, reference highlighted if known."""
    entries = payload["top_rankings"]
    stabilities = [e["stability"] for e in entries]
    labels = [e["fingerprint"][:8] for e in entries]
    ref_fp = None
    if payload.get("reference_fingerprint"):
        ref_fp = payload["reference_fingerprint"][:8]
    colors = ["#e67e22" if lab == ref_fp else "#2980b9" for lab in labels]
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(entries)), 3.5))
    ax.bar(range(len(entries)), stabilities, color=colors)
    ax.set_xticks(range(len(entries)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("stability (share of samples)")
    ax.set_xlabel("ranking fingerprint")
    title = f"top {len(entries)} stable rankings of {payload['total_samples']} samples"
    if payload.get("reference_stability") is not None:
        rs = payload["reference_stability"]
        title += f"; reference stability {rs[0]:.4f} ± {rs[1]:.4f}"
    ax.set_title(title, fontsize=9)
    return _save(fig, Path(path))


def plot_suggestion(payload: dict, path) -> Path:
    """Reference vs suggested weights side by side."""
    fig, ax = plt.subplots(figsize=(6, 3))
    ref = payload["reference"]
    idx = np.arange(len(ref))
    width = 0.38
    ax.bar(idx - width / 2, ref, width, label="reference", color="#7f8c8d")
    if payload["found"]:
        ax.bar(idx + width / 2, payload["function"], width, label="suggested", color="#27ae60")
        ax.set_title(f"fair function at angular gap {payload['angular_gap']:.4f} rad")
    else:
        ax.set_title("no fair function found within budget")
    ax.set_xticks(idx)
    ax.set_xticklabels([f"w{j + 1}" for j in idx])
    ax.legend()
    return _save(fig, Path(path))


def plot_arrangement_volumes(payload: dict, path) -> Path:
    """Volume estimates of materialized regions, largest first."""
    vols = sorted((e["volume_estimate"] for e in payload["regions"]), reverse=True)
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.bar(range(len(vols)), vols, color="#2980b9")
    ax.set_xlabel("region (by volume rank)")
    ax.set_ylabel("volume estimate")
    ax.set_title(
        f"{payload['region_count']} regions from {payload['samples']} samples, "
        f"{payload['hyperplanes']} hyperplanes"
    )
    return _save(fig, Path(path))
