"""Summary statistics over per-(model, test) effect sizes.

Aggregation pools the name/word sub-tests of a category, so the cell grid
is (category x modality combination x attribute variant).  Population
(divide-by-n) moments throughout, matching the engine's default.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

RESULT_COLUMNS = [
    "model_id", "test_id", "category", "modality_combo", "attr_variant",
    "d", "p_value", "n_targets_per_side", "n_attrs_per_side", "mode",
]


def results_to_frame(results) -> pd.DataFrame:
    rows = [{
        "model_id": r.model_id, "test_id": r.test_id, "category": r.category,
        "modality_combo": r.modality_combo, "attr_variant": r.attr_variant,
        "d": r.d, "p_value": r.p_value,
        "n_targets_per_side": r.n_targets_per_side,
        "n_attrs_per_side": r.n_attrs_per_side, "mode": r.permutation_mode,
    } for r in results]
    df = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return df.sort_values(["model_id", "test_id", "attr_variant"],
                          kind="mergesort").reset_index(drop=True)


def aggregate(results: pd.DataFrame, ddof=0) -> pd.DataFrame:
    """Mean and SD of d per (category, modality_combo, attr_variant) cell.

    Input row order does not affect the output (cells are sorted).
    """
    if len(results) == 0:
        raise ValueError("empty results table")
    rows = []
    keys = ["category", "modality_combo", "attr_variant"]
    for key, grp in results.groupby(keys, sort=True):
        d = grp["d"].to_numpy(dtype=float)
        rows.append(dict(zip(keys, key)) | {
            "mean_d": float(d.mean()),
            "sd_d": float(d.std(ddof=ddof)),
            "n": int(len(d)),
        })
    return pd.DataFrame(rows, columns=keys + ["mean_d", "sd_d", "n"])


def congruence_rates(results: pd.DataFrame, thresholds) -> dict[float, float]:
    """Fraction of rows with d above each threshold.

    Strict (d > t) at t <= 0 so the zero threshold means "congruent
    direction"; inclusive (d >= t) for positive thresholds so t = 0.2
    means "significant effect size".
    """
    if len(results) == 0:
        raise ValueError("empty results table")
    d = results["d"].to_numpy(dtype=float)
    out = {}
    for t in thresholds:
        hits = (d > t) if t <= 0 else (d >= t)
        out[float(t)] = float(hits.mean())
    return out


@dataclass
class VarianceReport:
    variance_classic: float
    variance_controlled: float
    relative_change_overall: float  # (v_classic - v_controlled) / v_classic
    per_modality_changes: dict[str, float] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        rows = [{"scope": "overall",
                 "variance_classic": self.variance_classic,
                 "variance_controlled": self.variance_controlled,
                 "relative_change": self.relative_change_overall}]
        for combo, change in sorted(self.per_modality_changes.items()):
            rows.append({"scope": combo, "relative_change": change})
        return pd.DataFrame(rows)


def variance_comparison(results_classic: pd.DataFrame,
                        results_controlled: pd.DataFrame,
                        ddof=0) -> VarianceReport:
    """Overall and per-modality variance change from classic to controlled
    attribute stimuli."""
    if len(results_classic) == 0 or len(results_controlled) == 0:
        raise ValueError("empty results table")

    def var(df):
        return float(df["d"].to_numpy(dtype=float).var(ddof=ddof))

    v_classic = var(results_classic)
    v_controlled = var(results_controlled)
    per_modality = {}
    combos = sorted(set(results_classic["modality_combo"])
                    & set(results_controlled["modality_combo"]))
    for combo in combos:
        vc = var(results_classic[results_classic["modality_combo"] == combo])
        vn = var(results_controlled[results_controlled["modality_combo"] == combo])
        per_modality[combo] = (vc - vn) / vc if vc > 0 else np.nan
    return VarianceReport(
        variance_classic=v_classic,
        variance_controlled=v_controlled,
        relative_change_overall=(v_classic - v_controlled) / v_classic
        if v_classic > 0 else np.nan,
        per_modality_changes=per_modality)


def plot_ready_long(results: pd.DataFrame, ddof=0) -> pd.DataFrame:
    """Long-format aggregate table shaped for the category-by-modality
    bar chart: one row per (category, modality_combo) with mean and SD."""
    agg = aggregate(results, ddof=ddof)
    keys = ["category", "modality_combo"]
    rows = []
    for key, grp in agg.groupby(keys, sort=True):
        sub = results[(results["category"] == key[0])
                      & (results["modality_combo"] == key[1])]
        d = sub["d"].to_numpy(dtype=float)
        rows.append(dict(zip(keys, key)) | {
            "mean_d": float(d.mean()),
            "sd_d": float(d.std(ddof=ddof)),
            "n": int(len(d)),
        })
    return pd.DataFrame(rows, columns=keys + ["mean_d", "sd_d", "n"])
