"""Figure rendering for the report path.

Figures are presentations of the emitted tables, written as PNGs next to
the delimited output; the CSVs remain the source of truth.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

COMBO_ORDER = ["all_image", "all_text", "image_as_target", "text_as_target"]
COMBO_LABELS = {
    "all_image": "All Image", "all_text": "All Text",
    "image_as_target": "Image as Target", "text_as_target": "Text as Target",
}


def _save(fig, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_aggregates(plot_ready, path):
    """Grouped bar chart: mean effect size per category and modality
    combination, with SD error bars."""
    categories = sorted(plot_ready["category"].unique())
    combos = [c for c in COMBO_ORDER
              if c in set(plot_ready["modality_combo"])]
    width = 0.8 / max(len(combos), 1)
    fig, ax = plt.subplots(figsize=(8, 4))
    xs = np.arange(len(categories))
    for i, combo in enumerate(combos):
        sub = plot_ready[plot_ready["modality_combo"] == combo]
        means = [float(sub[sub["category"] == c]["mean_d"].iloc[0])
                 if (sub["category"] == c).any() else np.nan
                 for c in categories]
        sds = [float(sub[sub["category"] == c]["sd_d"].iloc[0])
               if (sub["category"] == c).any() else 0.0
               for c in categories]
        ax.bar(xs + i * width, means, width, yerr=sds, capsize=2,
               label=COMBO_LABELS.get(combo, combo), ecolor="black")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(xs + width * (len(combos) - 1) / 2)
    ax.set_xticklabels([c.replace("_", "-") for c in categories], rotation=20)
    ax.set_ylabel("aggregate effect size")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_coefficients(mixed_fit, path, alpha=0.01):
    """Fixed-effect estimates with 95% CIs; significant terms highlighted."""
    terms = mixed_fit[mixed_fit["se"].notna()
                      & (mixed_fit["term"] != "intercept")]
    if len(terms) == 0:
        return None
    fig, ax = plt.subplots(figsize=(6, 0.35 * len(terms) + 1.5))
    ys = np.arange(len(terms))
    for y, (_, row) in zip(ys, terms.iterrows()):
        sig = row["p"] < alpha
        color = "crimson" if sig else "grey"
        ax.errorbar(row["estimate"], y, xerr=1.96 * row["se"], fmt="o",
                    color=color, capsize=3)
    ax.axvline(0.0, color="black", linewidth=0.8, linestyle="--")
    ax.set_yticks(ys)
    ax.set_yticklabels(terms["term"])
    ax.set_xlabel("coefficient (95% CI)")
    ax.invert_yaxis()
    return _save(fig, path)


def plot_correlations(correlations, path):
    """Heatmap of bias-performance correlation per cell."""
    if len(correlations) == 0:
        return None
    cats = sorted(correlations["category"].unique())
    combos = [c for c in COMBO_ORDER
              if c in set(correlations["modality_combo"])]
    grid = np.full((len(cats), len(combos)), np.nan)
    for _, row in correlations.iterrows():
        grid[cats.index(row["category"]),
             combos.index(row["modality_combo"])] = row["r"]
    fig, ax = plt.subplots(figsize=(6, 4))
    im = ax.imshow(grid, vmin=-1, vmax=1, cmap="RdBu_r")
    ax.set_xticks(range(len(combos)))
    ax.set_xticklabels([COMBO_LABELS.get(c, c) for c in combos], rotation=20)
    ax.set_yticks(range(len(cats)))
    ax.set_yticklabels([c.replace("_", "-") for c in cats])
    for i in range(len(cats)):
        for j in range(len(combos)):
            if np.isfinite(grid[i, j]):
                ax.text(j, i, f"{grid[i, j]:.2f}", ha="center", va="center",
                        fontsize=8)
    fig.colorbar(im, ax=ax, label="Pearson r")
    return _save(fig, path)


def render_figures(report_bundle, fig_dir) -> list[Path]:
    fig_dir = Path(fig_dir)
    paths = []
    tables = report_bundle.tables
    if "plot_ready" in tables:
        paths.append(plot_aggregates(
            tables["plot_ready"], fig_dir / "aggregate_effect_sizes.png"))
    if "mixed_fit" in tables:
        p = plot_coefficients(
            tables["mixed_fit"], fig_dir / "upstream_coefficients.png")
        if p:
            paths.append(p)
    if "correlations" in tables:
        p = plot_correlations(
            tables["correlations"], fig_dir / "performance_correlations.png")
        if p:
            paths.append(p)
    return paths
