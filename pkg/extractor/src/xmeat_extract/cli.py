"""Command-line entry point."""
from __future__ import annotations

import click

from .backends import BackendError, list_models
from .bundle_io import BundleWriteError
from .extract import extract_bundle
from .registry_io import RegistryReadError


@click.command()
@click.option("--model", help="Checkpoint name or local path.")
@click.option("--pretrained", default=None,
              help="Pretraining tag (open_clip backend only).")
@click.option("--backend", default="transformers",
              type=click.Choice(["transformers", "open_clip"]),
              show_default=True)
@click.option("--registry", "registry_dir",
              type=click.Path(exists=True, file_okay=False),
              help="xmeat registry directory.")
@click.option("--out", type=click.Path(file_okay=False),
              help="Bundle output directory.")
@click.option("--device", default="auto", show_default=True)
@click.option("--batch-size", default=32, show_default=True)
@click.option("--model-id", default=None,
              help="Override the model_id recorded in the bundle.")
@click.option("--no-check-hashes", is_flag=True,
              help="Skip image hash verification.")
@click.option("--list-models", "do_list", is_flag=True,
              help="Print known checkpoints for the backend and exit.")
def main(model, pretrained, backend, registry_dir, out, device, batch_size,
         model_id, no_check_hashes, do_list):
    """Embed an xmeat stimulus registry with a CLIP-style checkpoint."""
    if do_list:
        try:
            for name in list_models(backend):
                click.echo(name)
        except BackendError as exc:
            raise click.ClickException(str(exc))
        return
    missing = [n for n, v in (("--model", model), ("--registry", registry_dir),
                              ("--out", out)) if not v]
    if missing:
        raise click.UsageError(f"missing required options: {' '.join(missing)}")
    try:
        path = extract_bundle(
            registry_dir, out, model, pretrained=pretrained, backend=backend,
            device=device, batch_size=batch_size, model_id=model_id,
            check_hashes=not no_check_hashes)
    except (BackendError, RegistryReadError, BundleWriteError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote bundle to {path}")


if __name__ == "__main__":
    main()
