"""Pipeline orchestration: registry -> bundles -> results -> aggregates ->
regression/correlations -> consolidated report.

Stages run sequentially; each stage's tables are written atomically
(write-to-temp, rename) and stamped with the config hash so results are
traceable.  Stages whose optional inputs are absent are skipped with an
explicit notice.
"""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from . import aggregate as agg
from . import engine, store
from .inference import (correlate_performance, correlations_to_frame,
                        fit_upstream_model, load_model_records)
from .registry import build_test_suite, load_registry


class ConfigError(ValueError):
    """Invalid run configuration."""


class StageError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    registry: Path
    bundles: Path
    out: Path
    variant: str = "controlled"  # "controlled" | "classic" | "both"
    permutation_mode: str = "auto"
    seed: int | None = None
    n_samples: int = 10_000
    ddof: int = 0
    covariance: str = "diagonal"
    grouping: str = "cells"
    models: Path | None = None
    vtab: Path | None = None
    task_subsets: dict | None = None
    figures: bool = True

    @classmethod
    def from_file(cls, path):
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        for key in ("registry", "bundles", "out", "models", "vtab"):
            if raw.get(key) is not None:
                raw[key] = Path(path).parent / raw[key]
        if "registry" not in raw or "bundles" not in raw or "out" not in raw:
            raise ConfigError("config must set registry, bundles, and out")
        return cls(**raw)

    def validate(self):
        if self.variant not in ("controlled", "classic", "both"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        for name in ("registry", "bundles"):
            p = getattr(self, name)
            if not Path(p).exists():
                raise ConfigError(f"{name} path does not exist: {p}")
        for name in ("models", "vtab"):
            p = getattr(self, name)
            if p is not None and not Path(p).exists():
                raise ConfigError(f"{name} path does not exist: {p}")
        if self.permutation_mode != "exact" and self.seed is None:
            raise ConfigError(
                "a seed is mandatory unless permutation mode is 'exact'")

    def hash(self):
        # out and figures do not affect table contents, so two runs of
        # the same analysis into different directories share a hash
        payload = {k: str(v) if isinstance(v, Path) else v
                   for k, v in self.__dict__.items()
                   if k not in ("out", "figures")}
        canon = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@dataclass
class ReportBundle:
    out_dir: Path
    config_hash: str
    tables: dict[str, pd.DataFrame] = field(default_factory=dict)
    skipped: dict[str, str] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)
    report_path: Path | None = None
    figure_paths: list[Path] = field(default_factory=list)


def write_table(df: pd.DataFrame, path, config_hash):
    """Atomically write a CSV with a leading config-hash comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    body = f"# config_hash={config_hash}\n" + df.to_csv(index=False)
    tmp.write_text(body, encoding="utf-8")
    os.replace(tmp, path)


def read_table(path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def _bundle_dirs(root):
    root = Path(root)
    if (root / store.MANIFEST_NAME).exists():
        return [root]
    dirs = sorted(p for p in root.iterdir()
                  if p.is_dir() and (p / store.MANIFEST_NAME).exists())
    if not dirs:
        raise StageError("results", f"no bundles found under {root}")
    return dirs


def run_results_stage(config: RunConfig, registry, out_dir) -> dict[str, pd.DataFrame]:
    """Run every runnable (bundle x test) pair for each selected variant."""
    variants = ("controlled", "classic") if config.variant == "both" \
        else (config.variant,)
    suites = {v: build_test_suite(registry, attr_variant=v) for v in variants}
    bundle_dirs = _bundle_dirs(config.bundles)

    def run_one(bdir):
        bundle = store.read_bundle(bdir)
        results = []
        for variant in variants:
            suite = suites[variant]
            cov = store.coverage_check(bundle, suite, registry)
            runnable = set(cov.runnable)
            for spec in suite:
                if spec.test_id not in runnable:
                    continue
                results.append(engine.run_test(
                    spec, bundle, registry, mode=config.permutation_mode,
                    seed=config.seed, n_samples=config.n_samples,
                    ddof=config.ddof))
        return results

    threads = int(os.environ.get("XMEAT_THREADS", "1"))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(run_one, bundle_dirs))
    else:
        chunks = [run_one(b) for b in bundle_dirs]
    all_results = [r for chunk in chunks for r in chunk]
    if not all_results:
        raise StageError("results", "no runnable tests in any bundle")
    df = agg.results_to_frame(all_results)
    tables = {"results": df}
    write_table(df, out_dir / "results.csv", config.hash())
    return tables


def run_aggregate_stage(config, results: pd.DataFrame, out_dir):
    tables = {}
    controlled = results[results["attr_variant"] == "controlled"]
    classic = results[results["attr_variant"] == "classic"]
    primary = controlled if len(controlled) else classic

    tables["aggregates"] = agg.aggregate(results, ddof=config.ddof)
    tables["rates"] = pd.DataFrame([
        {"attr_variant": variant, "threshold": t, "rate": rate}
        for variant, sub in (("controlled", controlled), ("classic", classic))
        if len(sub)
        for t, rate in agg.congruence_rates(sub, [0.0, 0.2]).items()
    ])
    tables["plot_ready"] = agg.plot_ready_long(primary, ddof=config.ddof)
    if len(controlled) and len(classic):
        tables["variance_report"] = agg.variance_comparison(
            classic, controlled, ddof=config.ddof).to_frame()
    write_table(tables["aggregates"], out_dir / "aggregates.csv", config.hash())
    write_table(tables["rates"], out_dir / "rates.csv", config.hash())
    write_table(tables["plot_ready"], out_dir / "plot_ready.csv", config.hash())
    if "variance_report" in tables:
        write_table(tables["variance_report"],
                    out_dir / "variance_report.csv", config.hash())
    return tables


def run_regression_stage(config, results, out_dir):
    records = load_model_records(config.models)
    sub = results[results["attr_variant"] == (
        "controlled" if config.variant != "classic" else "classic")]
    fit, _ = fit_upstream_model(sub, records, grouping=config.grouping,
                                covariance=config.covariance)
    table = fit.summary_frame()
    extra = pd.DataFrame({
        "term": [f"var(u{i})" for i in range(len(fit.random_variances))]
        + ["var(residual)", "reml_loglik", "converged"],
        "estimate": list(fit.random_variances)
        + [fit.residual_variance, fit.reml_loglik, float(fit.converged)],
    })
    table = pd.concat([table, extra], ignore_index=True)
    write_table(table, out_dir / "mixed_fit.csv", config.hash())
    return {"mixed_fit": table}, fit


def run_correlation_stage(config, results, out_dir):
    vtab = pd.read_csv(config.vtab)
    sub = results[results["attr_variant"] == (
        "controlled" if config.variant != "classic" else "classic")]
    cors = correlate_performance(sub, vtab, task_subsets=config.task_subsets)
    table = correlations_to_frame(cors)
    write_table(table, out_dir / "correlations.csv", config.hash())
    return {"correlations": table}


def emit_report(bundle: ReportBundle, input_hashes=None) -> Path:
    """Write the consolidated plain-text report."""
    lines = ["# xmeat run report", "",
             f"config hash: {bundle.config_hash}", ""]
    if input_hashes:
        lines.append("## Inputs")
        for name, h in sorted(input_hashes.items()):
            lines.append(f"- {name}: {h}")
        lines.append("")
    lines.append("## Tables")
    for name, df in bundle.tables.items():
        lines.append(f"- {name}: {len(df)} rows")
    lines.append("")
    if "rates" in bundle.tables:
        lines.append("## Congruence rates")
        for _, row in bundle.tables["rates"].iterrows():
            lines.append(
                f"- {row['attr_variant']}, d "
                f"{'>' if row['threshold'] <= 0 else '>='} "
                f"{row['threshold']:g}: {row['rate']:.2%}")
        lines.append("")
    if "aggregates" in bundle.tables:
        top = bundle.tables["aggregates"].sort_values(
            "mean_d", ascending=False).head(5)
        lines.append("## Largest aggregate cells")
        for _, row in top.iterrows():
            lines.append(
                f"- {row['category']} / {row['modality_combo']} / "
                f"{row['attr_variant']}: mean d = {row['mean_d']:.3f} "
                f"(sd {row['sd_d']:.3f}, n={row['n']})")
        lines.append("")
    if "mixed_fit" in bundle.tables:
        fit = bundle.tables["mixed_fit"]
        sig = fit[(fit["p"].notna()) & (fit["p"] < 0.01)
                  & (fit["term"] != "intercept")]
        lines.append("## Significant upstream predictors (p < 0.01)")
        if len(sig):
            for _, row in sig.iterrows():
                lines.append(f"- {row['term']}: {row['estimate']:.3f} "
                             f"(p = {row['p']:.2g})")
        else:
            lines.append("- none")
        lines.append("")
    if "correlations" in bundle.tables:
        cors = bundle.tables["correlations"]
        sig = cors[cors["p_value"] < 0.05]
        lines.append("## Significant bias-performance correlations (p < 0.05)")
        if len(sig):
            for _, row in sig.iterrows():
                lines.append(f"- {row['category']} / {row['modality_combo']}: "
                             f"r = {row['r']:.2f} (n={row['n']})")
        else:
            lines.append("- none")
        lines.append("")
    if bundle.skipped:
        lines.append("## Skipped stages")
        for stage, why in bundle.skipped.items():
            lines.append(f"- {stage}: {why}")
        lines.append("")
    path = bundle.out_dir / "report.md"
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text("\n".join(lines), encoding="utf-8")
    os.replace(tmp, path)
    bundle.report_path = path
    return path


def run_pipeline(config: RunConfig) -> ReportBundle:
    """Execute all stages whose inputs are present; see module docstring."""
    config.validate()
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rb = ReportBundle(out_dir=out_dir, config_hash=config.hash())
    input_hashes = {}

    try:
        registry = load_registry(config.registry)
        input_hashes["registry"] = registry.content_hash[:16]
    except Exception as exc:
        raise StageError("registry", exc)

    try:
        rb.tables.update(run_results_stage(config, registry, out_dir))
    except StageError:
        raise
    except Exception as exc:
        raise StageError("results", exc)

    try:
        rb.tables.update(run_aggregate_stage(
            config, rb.tables["results"], out_dir))
    except Exception as exc:
        raise StageError("aggregate", exc)

    if config.models is None:
        rb.skipped["regression"] = "no models table configured"
    else:
        try:
            tables, _ = run_regression_stage(
                config, rb.tables["results"], out_dir)
            rb.tables.update(tables)
        except Exception as exc:
            raise StageError("regression", exc)

    if config.vtab is None:
        rb.skipped["correlations"] = "no performance table configured"
    else:
        try:
            rb.tables.update(run_correlation_stage(
                config, rb.tables["results"], out_dir))
        except Exception as exc:
            raise StageError("correlations", exc)

    if config.figures:
        try:
            from .figures import render_figures
            rb.figure_paths = render_figures(rb, out_dir / "figures")
        except Exception as exc:
            raise StageError("figures", exc)
    else:
        rb.skipped["figures"] = "figure rendering disabled"

    emit_report(rb, input_hashes)
    return rb
