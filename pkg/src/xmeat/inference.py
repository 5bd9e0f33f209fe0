"""Upstream-factor regression and performance correlation.

Relates measured effect sizes to model metadata (parameter count,
architecture family, pre-training dataset family and size) through a
mixed-effects regression, and to downstream benchmark scores through
per-cell Pearson correlations.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from .reml import fit_mixed_model

DATASET_REFERENCE = "cc12m"

MODELS_COLUMNS = ["model_id", "param_count", "arch_family", "dataset_family",
                  "dataset_size"]


class DesignError(ValueError):
    """Unresolvable model metadata or unusable predictor columns."""


def standardize(values):
    """Z-score a column: zero mean, unit population SD."""
    x = np.asarray(values, dtype=float)
    if x.size < 2 or np.all(x == x[0]):
        raise DesignError("zero variance predictor")
    sd = x.std()
    if sd == 0.0:
        raise DesignError("zero variance predictor")
    return (x - x.mean()) / sd


def load_model_records(path) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = [c for c in MODELS_COLUMNS if c not in df.columns]
    if missing:
        raise DesignError(f"models table missing columns: {missing}")
    if (df["param_count"] <= 0).any() or (df["dataset_size"] <= 0).any():
        raise DesignError("param_count and dataset_size must be positive")
    return df


@dataclass
class RegressionData:
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    groups: np.ndarray
    fixed_names: list[str]
    frame: pd.DataFrame


def build_design(results: pd.DataFrame, records: pd.DataFrame,
                 grouping="cells", dataset_reference=DATASET_REFERENCE) -> RegressionData:
    """Assemble the regression dataset from results and model metadata.

    Response is d; continuous predictors are standardized log parameter
    count and log dataset size; categorical predictors are dummy blocks
    with the reference dataset family dropped (and the first architecture
    family as reference).  Groups are (modality_combo, category) cells by
    default, or individual tests with grouping="tests".
    """
    if grouping not in ("cells", "tests"):
        raise DesignError(f"unknown grouping {grouping!r}")
    unknown = set(results["model_id"]) - set(records["model_id"])
    if unknown:
        raise DesignError(f"unknown model_id(s): {sorted(unknown)[:5]}")
    df = results.merge(records, on="model_id", how="left", validate="m:1")

    log_params = standardize(np.log(df["param_count"].to_numpy(dtype=float)))
    log_ds = standardize(np.log(df["dataset_size"].to_numpy(dtype=float)))

    def dummies(col, reference):
        levels = sorted(df[col].astype(str).unique())
        lowered = {lv.lower(): lv for lv in levels}
        if reference is not None and reference.lower() in lowered:
            ref = lowered[reference.lower()]
        else:
            if reference is not None:
                warnings.warn(
                    f"reference level {reference!r} absent from {col}; "
                    f"using {levels[0]!r}")
            ref = levels[0]
        keep = [lv for lv in levels if lv != ref]
        block = np.column_stack([
            (df[col].astype(str) == lv).to_numpy(dtype=float) for lv in keep
        ]) if keep else np.zeros((len(df), 0))
        return block, [f"{col}[{lv}]" for lv in keep]

    arch_block, arch_names = dummies("arch_family", None)
    ds_block, ds_names = dummies("dataset_family", dataset_reference)

    X = np.column_stack([np.ones(len(df)), log_params, arch_block,
                         ds_block, log_ds])
    names = (["intercept", "log_params"] + arch_names + ds_names
             + ["log_dataset_size"])
    Z = np.column_stack([np.ones(len(df)), log_params, log_ds])
    if grouping == "cells":
        groups = (df["modality_combo"].astype(str) + ":"
                  + df["category"].astype(str)).to_numpy()
    else:
        groups = df["test_id"].astype(str).to_numpy()
    return RegressionData(X=X, y=df["d"].to_numpy(dtype=float), Z=Z,
                          groups=groups, fixed_names=names, frame=df)


def fit_upstream_model(results, records, grouping="cells",
                       covariance="diagonal", dataset_reference=DATASET_REFERENCE):
    """Convenience wrapper: build the design and run the REML fit."""
    design = build_design(results, records, grouping=grouping,
                          dataset_reference=dataset_reference)
    fit = fit_mixed_model(design.X, design.y, design.Z, design.groups,
                          fixed_names=design.fixed_names,
                          covariance=covariance)
    return fit, design


@dataclass(frozen=True)
class CorrelationResult:
    category: str
    modality_combo: str
    r: float
    p_value: float
    n: int


def correlations_to_frame(results):
    return pd.DataFrame([{
        "category": c.category, "modality_combo": c.modality_combo,
        "r": c.r, "p_value": c.p_value, "n": c.n,
    } for c in results])


def correlate_performance(results: pd.DataFrame, vtab: pd.DataFrame,
                          task_subsets=None, min_models=3):
    """Pearson r between per-model effect size and benchmark performance.

    For each (category, modality_combo) cell: each model's d is averaged
    over the cell's tests, its performance over the configured task
    subset for that modality combination (all tasks when unset).  Cells
    with fewer than min_models models are omitted with a warning.
    """
    for col in ("model_id", "task", "score"):
        if col not in vtab.columns:
            raise DesignError(f"performance table missing column {col!r}")
    out = []
    for (category, combo), grp in results.groupby(
            ["category", "modality_combo"], sort=True):
        tasks = None if task_subsets is None else task_subsets.get(combo)
        vt = vtab if tasks is None else vtab[vtab["task"].isin(tasks)]
        perf = vt.groupby("model_id")["score"].mean()
        d_per_model = grp.groupby("model_id")["d"].mean()
        joined = pd.concat([d_per_model, perf], axis=1, join="inner").dropna()
        if len(joined) < min_models:
            warnings.warn(
                f"cell ({category}, {combo}): only {len(joined)} models with "
                f"both d and performance; omitted")
            continue
        r, p = stats.pearsonr(joined["d"], joined["score"])
        out.append(CorrelationResult(category=category, modality_combo=combo,
                                     r=float(r), p_value=float(p),
                                     n=int(len(joined))))
    return out
