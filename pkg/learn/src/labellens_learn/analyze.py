"""Exploratory structure of label datasets: correlations, PCA, plots.

Correlation and PCA run per instance (each instance is its own statistical
population; pooling them would mix scales), then summarize across instances.
Plot files are static images: a class-colored scatter of the two cost-like
features, per-class and per-iteration boxplots, plus the pooled correlation
heatmap and eigenvalue scree that back the printed summaries.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .data import FEATURES, TARGET

#: Features highlighted in the per-class boxplot grid.
BOXPLOT_FEATURES = ("objective", "consumption_critical", "tour_length", "nlabels_network")


def pearson_table(frame: pd.DataFrame) -> pd.DataFrame:
    """Pearson correlations between every feature and the target."""
    columns = [*FEATURES, TARGET]
    return frame.loc[:, columns].corr(method="pearson")


def target_correlations(frame: pd.DataFrame) -> pd.Series:
    """Correlation of each feature with the target in one instance.

    A constant column has no defined correlation: reported as NaN.
    """
    y = frame[TARGET].to_numpy(dtype=float)
    y_std = y.std()
    out = {}
    for feature in FEATURES:
        x = frame[feature].to_numpy(dtype=float)
        if x.std() == 0 or y_std == 0:
            out[feature] = float("nan")
        else:
            out[feature] = float(np.corrcoef(x, y)[0, 1])
    return pd.Series(out)


def correlation_summary(frames: dict[str, pd.DataFrame]) -> pd.DataFrame:
    """Min / max / average of per-instance feature-target correlations."""
    per_instance = pd.DataFrame(
        {name: target_correlations(frame) for name, frame in sorted(frames.items())}
    )
    return pd.DataFrame(
        {
            "min": per_instance.min(axis=1),
            "max": per_instance.max(axis=1),
            "avg": per_instance.mean(axis=1),
        }
    )


def _correlation_spectrum(frame: pd.DataFrame):
    """Eigen-decomposition of the feature correlation matrix, descending.

    Constant features contribute nothing (their correlation rows are zeroed),
    so the spectrum stays well-defined on degenerate inputs.
    """
    X = frame.loc[:, list(FEATURES)].to_numpy(dtype=float)
    std = X.std(axis=0)
    keep = std > 0
    corr = np.zeros((len(FEATURES), len(FEATURES)))
    centered = None
    if keep.any():
        centered = (X[:, keep] - X[:, keep].mean(axis=0)) / std[keep]
        corr[np.ix_(keep, keep)] = np.corrcoef(centered, rowvar=False)
    values, vectors = np.linalg.eigh(corr)
    order = np.argsort(values)[::-1]
    return np.clip(values[order], 0.0, None), vectors[:, order], centered, keep


def pca_eigenvalues(frame: pd.DataFrame) -> np.ndarray:
    """Eigenvalues of the feature correlation matrix, descending."""
    return _correlation_spectrum(frame)[0]


def significant_components(frame: pd.DataFrame) -> int:
    """Number of principal components with eigenvalue above 1."""
    return int((pca_eigenvalues(frame) > 1.0).sum())


def component_label_correlation(frame: pd.DataFrame) -> float:
    """Largest |correlation| between a significant component and the target.

    Falls back to all non-degenerate components when no eigenvalue tops 1;
    NaN when either side is constant.
    """
    values, vectors, centered, keep = _correlation_spectrum(frame)
    y = frame[TARGET].to_numpy(dtype=float)
    if centered is None or y.std() == 0:
        return float("nan")
    chosen = values > 1.0
    if not chosen.any():
        chosen = values > 0.0
    best = 0.0
    for idx in np.flatnonzero(chosen):
        scores = centered @ vectors[keep, idx]
        if scores.std() == 0:
            continue
        best = max(best, abs(float(np.corrcoef(scores, y)[0, 1])))
    return best


def _boxes(frame: pd.DataFrame, feature: str) -> list[np.ndarray]:
    return [
        frame.loc[frame[TARGET] == klass, feature].to_numpy(dtype=float) for klass in (0, 1)
    ]


def write_plots(
    last_frames: dict[str, pd.DataFrame], per_iteration: pd.DataFrame, out_dir: str | Path
) -> list[Path]:
    """Emit the static analysis figures; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pooled = pd.concat(last_frames.values(), ignore_index=True)
    written = []

    corr = pearson_table(pooled)
    fig, ax = plt.subplots(figsize=(9, 8))
    image = ax.imshow(corr.to_numpy(), vmin=-1, vmax=1, cmap="coolwarm")
    ax.set_xticks(range(len(corr)), corr.columns, rotation=90, fontsize=7)
    ax.set_yticks(range(len(corr)), corr.columns, fontsize=7)
    fig.colorbar(image, ax=ax, shrink=0.8)
    ax.set_title("feature correlations")
    fig.tight_layout()
    written.append(out_dir / "correlations.png")
    fig.savefig(written[-1], dpi=120)
    plt.close(fig)

    eigenvalues = pca_eigenvalues(pooled)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(1, len(eigenvalues) + 1), eigenvalues, marker="o")
    ax.axhline(1.0, linestyle="--", linewidth=1)
    ax.set_xlabel("component")
    ax.set_ylabel("eigenvalue")
    ax.set_title("principal component spectrum")
    fig.tight_layout()
    written.append(out_dir / "scree.png")
    fig.savefig(written[-1], dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 6))
    for klass, name, color in ((0, "kept", "tab:blue"), (1, "dominated", "tab:orange")):
        part = pooled[pooled[TARGET] == klass]
        ax.scatter(
            part["objective"], part["consumption_critical"], s=6, alpha=0.4, label=name, color=color
        )
    ax.set_xlabel("objective")
    ax.set_ylabel("consumption_critical")
    ax.set_title("objective vs critical consumption by class")
    ax.legend()
    fig.tight_layout()
    written.append(out_dir / "scatter.png")
    fig.savefig(written[-1], dpi=120)
    plt.close(fig)

    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    for ax, feature in zip(axes.flat, BOXPLOT_FEATURES):
        ax.boxplot(_boxes(pooled, feature), tick_labels=["kept", "dominated"], showfliers=False)
        ax.set_title(feature, fontsize=9)
    fig.suptitle("feature distributions by class")
    fig.tight_layout()
    written.append(out_dir / "class_boxplots.png")
    fig.savefig(written[-1], dpi=120)
    plt.close(fig)

    iterations = sorted(per_iteration["iteration"].unique())
    fig, ax = plt.subplots(figsize=(max(7, len(iterations)), 4))
    for klass, offset, color in ((0, -0.18, "tab:blue"), (1, 0.18, "tab:orange")):
        data = [
            per_iteration.loc[
                (per_iteration["iteration"] == it) & (per_iteration[TARGET] == klass), "objective"
            ].to_numpy(dtype=float)
            for it in iterations
        ]
        ax.boxplot(
            data,
            positions=[i + offset for i in range(len(iterations))],
            widths=0.3,
            showfliers=False,
            patch_artist=True,
            boxprops={"facecolor": color},
        )
    ax.set_xticks(range(len(iterations)), [str(it) for it in iterations])
    ax.set_xlabel("iteration (kept left, dominated right)")
    ax.set_ylabel("objective")
    ax.set_title("objective by iteration and class")
    fig.tight_layout()
    written.append(out_dir / "iteration_boxplots.png")
    fig.savefig(written[-1], dpi=120)
    plt.close(fig)
    return written
