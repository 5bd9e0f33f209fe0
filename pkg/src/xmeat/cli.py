"""Command-line interface.

Exit codes for run-all: 0 success, 2 validation failure, 3 stage failure.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from . import store
from .registry import RegistryError, build_test_suite, load_registry, write_registry
from .report import ConfigError, RunConfig, StageError, run_pipeline, write_table


@click.group()
def main():
    """Embedding association tests for vision-language embedding spaces."""


@main.group()
def registry():
    """Stimulus registry operations."""


@registry.command("validate")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def registry_validate(directory):
    """Validate a registry directory (manifest, hashes, set sizes)."""
    try:
        reg = load_registry(directory)
        suite = build_test_suite(reg)
    except RegistryError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"ok: {len(reg.items)} stimuli, {len(reg.sets)} sets, "
               f"{len(suite)} tests, hash {reg.content_hash[:16]}")


@registry.command("init")
@click.argument("directory", type=click.Path(file_okay=False))
@click.option("--placeholder-images", is_flag=True,
              help="Generate deterministic stand-in PNGs for image stimuli.")
def registry_init(directory, placeholder_images):
    """Materialize the shipped default registry into a directory."""
    path = write_registry(directory, placeholder_images=placeholder_images)
    click.echo(f"wrote {path}")
    if not placeholder_images:
        click.echo("note: supply image files under images/ and re-run to "
                   "record their hashes")


@main.group()
def bundle():
    """Embedding bundle operations."""


@bundle.command("validate")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def bundle_validate(directory):
    """Validate a bundle (manifest, checksum, finite vectors)."""
    try:
        b = store.read_bundle(directory)
    except store.BundleError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"ok: model {b.model_id}, {len(b.rows)} rows, dim {b.dim}")


@bundle.command("coverage")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--registry", "registry_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--variant", default="controlled",
              type=click.Choice(["controlled", "classic"]))
def bundle_coverage(directory, registry_dir, variant):
    """Report which tests the bundle can run against a registry."""
    reg = load_registry(registry_dir)
    suite = build_test_suite(reg, attr_variant=variant)
    b = store.read_bundle(directory)
    rep = store.coverage_check(b, suite, reg)
    click.echo(f"{rep.n_runnable}/{len(suite)} tests runnable")
    for tid, missing in rep.missing.items():
        if missing:
            click.echo(f"  {tid}: missing {len(missing)} ids "
                       f"(e.g. {missing[0]})")


def _base_config(registry_dir, bundles, out, variant, seed, mc_samples):
    return RunConfig(registry=Path(registry_dir), bundles=Path(bundles),
                     out=Path(out), variant=variant, seed=seed,
                     n_samples=mc_samples)


@main.command("run")
@click.option("--registry", "registry_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--bundles", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--variant", default="controlled",
              type=click.Choice(["controlled", "classic", "both"]))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mc-samples", type=int, default=10_000, show_default=True)
@click.option("--figures/--no-figures", default=False)
def run(registry_dir, bundles, variant, out, seed, mc_samples, figures):
    """Compute effect sizes and p-values for every bundle and test."""
    config = _base_config(registry_dir, bundles, out, variant, seed, mc_samples)
    config.figures = figures
    try:
        rb = run_pipeline(config)
    except ConfigError as exc:
        click.echo(f"validation failure: {exc}", err=True)
        sys.exit(2)
    except StageError as exc:
        click.echo(str(exc), err=True)
        sys.exit(3)
    click.echo(f"wrote {len(rb.tables)} tables to {rb.out_dir}")


@main.command("aggregate")
@click.option("--results", "results_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(file_okay=False))
def aggregate_cmd(results_path, out):
    """Aggregate an existing results table."""
    from . import aggregate as agg
    from .report import read_table
    results_path = Path(results_path)
    if results_path.is_dir():
        results_path = results_path / "results.csv"
    df = read_table(results_path)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(agg.aggregate(df), out / "aggregates.csv", "adhoc")
    rates = [{"attr_variant": v, "threshold": t, "rate": r}
             for v, sub in df.groupby("attr_variant")
             for t, r in agg.congruence_rates(sub, [0.0, 0.2]).items()]
    import pandas as pd
    write_table(pd.DataFrame(rates), out / "rates.csv", "adhoc")
    write_table(agg.plot_ready_long(df), out / "plot_ready.csv", "adhoc")
    click.echo(f"wrote aggregates to {out}")


@main.command("regress")
@click.option("--results", "results_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--models", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--grouping", default="cells",
              type=click.Choice(["cells", "tests"]))
@click.option("--covariance", default="diagonal",
              type=click.Choice(["diagonal", "unstructured"]))
def regress(results_path, models, out, grouping, covariance):
    """Mixed-effects regression of effect size on upstream factors."""
    import pandas as pd

    from .inference import fit_upstream_model, load_model_records
    from .report import read_table
    df = read_table(results_path)
    records = load_model_records(models)
    fit, _ = fit_upstream_model(df, records, grouping=grouping,
                                covariance=covariance)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    table = fit.summary_frame()
    write_table(table, out / "mixed_fit.csv", "adhoc")
    for w in fit.warnings:
        click.echo(f"warning: {w}", err=True)
    click.echo(f"REML loglik {fit.reml_loglik:.2f}, converged={fit.converged}")
    click.echo(table.to_string(index=False))


@main.command("correlate")
@click.option("--results", "results_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--vtab", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
def correlate(results_path, vtab, out):
    """Pearson correlation of effect size with downstream performance."""
    import pandas as pd

    from .inference import correlate_performance, correlations_to_frame
    from .report import read_table
    df = read_table(results_path)
    vt = pd.read_csv(vtab)
    cors = correlations_to_frame(correlate_performance(df, vt))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(cors, out / "correlations.csv", "adhoc")
    click.echo(cors.to_string(index=False))


@main.command("run-all")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
def run_all(config_path):
    """Run the full pipeline from a JSON run configuration."""
    try:
        config = RunConfig.from_file(config_path)
        rb = run_pipeline(config)
    except ConfigError as exc:
        click.echo(f"validation failure: {exc}", err=True)
        sys.exit(2)
    except StageError as exc:
        click.echo(str(exc), err=True)
        sys.exit(3)
    for stage, why in rb.skipped.items():
        click.echo(f"skipped {stage}: {why}")
    click.echo(f"report: {rb.report_path}")


if __name__ == "__main__":
    main()
