"""Sidecar command line: serve the HTTP API or export a batch."""

from __future__ import annotations

import sys

import click

from . import __version__
from .config import SidecarConfig


def build_config(backend, encoder, encoder_dim, basic, fine, truncation, max_batch,
                 host=None, port=None) -> SidecarConfig:
    kwargs = {
        "backend": backend,
        "encoder_dim": encoder_dim,
        "truncation": truncation,
        "max_batch": max_batch,
    }
    if encoder:
        kwargs["encoder_checkpoint"] = encoder
    if basic:
        kwargs["basic_checkpoint"] = basic
    if fine:
        kwargs["fine_checkpoint"] = fine
    if host:
        kwargs["host"] = host
    if port:
        kwargs["port"] = port
    return SidecarConfig(**kwargs)


backend_option = click.option("--backend", type=click.Choice(["transformers", "test"]),
                              default="transformers", show_default=True)
encoder_option = click.option("--encoder", default=None, help="encoder checkpoint name or path")
dim_option = click.option("--encoder-dim", type=int, default=1024, show_default=True)
basic_option = click.option("--basic", default=None, help="6-label emotion checkpoint")
fine_option = click.option("--fine", default=None, help="28-label emotion checkpoint")
truncation_option = click.option("--truncation", type=int, default=512, show_default=True)
batch_option = click.option("--max-batch", type=int, default=64, show_default=True)


@click.group()
@click.version_option(version=__version__)
def cli() -> None:
    """Embedding and emotion inference sidecar."""


@cli.command()
@backend_option
@encoder_option
@dim_option
@basic_option
@fine_option
@truncation_option
@batch_option
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8810, show_default=True)
def serve(backend, encoder, encoder_dim, basic, fine, truncation, max_batch, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    config = build_config(backend, encoder, encoder_dim, basic, fine,
                          truncation, max_batch, host, port)
    uvicorn.run(create_app(config), host=config.host, port=config.port)


@cli.command()
@click.option("--docs", type=click.Path(), required=True,
              help="JSONL documents file: {doc_id, text} per line")
@click.option("--out-dir", type=click.Path(), required=True)
@backend_option
@encoder_option
@dim_option
@basic_option
@fine_option
@truncation_option
@batch_option
def export(docs, out_dir, backend, encoder, encoder_dim, basic, fine, truncation, max_batch):
    """Embed and classify every document into JSONL caches."""
    from .export import export_batch

    config = build_config(backend, encoder, encoder_dim, basic, fine, truncation, max_batch)
    paths = export_batch(docs, out_dir, config)
    for name, path in paths.items():
        click.echo(f"{name}: {path}")


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(1)
    except (FileNotFoundError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
