"""Sidecar commands: serve the provider protocol, export ALEM files offline."""

from __future__ import annotations

import click

from .alem import read_corpus_texts, write_alem
from .encoder import MODEL_REGISTRY, TransformerEncoder


@click.group()
def main() -> None:
    """Transformer embedding inference and fine-tuning sidecar."""


@main.command()
@click.option("--model", "model_name", default="test-tiny", show_default=True,
              type=click.Choice(sorted(MODEL_REGISTRY)))
@click.option("--port", default=8800, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(model_name: str, port: int, host: str) -> None:
    """Serve /embed, /finetune, /reset, /info for one model."""
    import uvicorn

    from .service import create_app

    encoder = TransformerEncoder(model_name)
    uvicorn.run(create_app(encoder), host=host, port=port)


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_name", default="test-tiny", show_default=True,
              type=click.Choice(sorted(MODEL_REGISTRY)))
@click.option("--mode", default="avg", show_default=True, type=click.Choice(["avg", "cls"]))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--batch-size", default=16, show_default=True)
def export(corpus_path: str, model_name: str, mode: str, out_path: str, batch_size: int) -> None:
    """Embed a JSON Lines corpus and write the matrix as an ALEM file."""
    ids, texts = read_corpus_texts(corpus_path)
    encoder = TransformerEncoder(model_name, batch_size=batch_size)
    matrix = encoder.embed(texts, mode=mode)
    extra = {}
    if mode == "cls" and encoder.info.cls_position == "end":
        extra["cls_source"] = "eos"  # unidirectional model: eos stands in for cls
    write_alem(out_path, matrix, ids, model=model_name, mode=mode, extra_manifest=extra)
    click.echo(f"wrote {matrix.shape[0]}x{matrix.shape[1]} matrix to {out_path}")


if __name__ == "__main__":
    main()
