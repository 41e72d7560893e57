"""Command-line front end: batch experiments, embedding export, live serving."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import ConfigError, parse_config
from .corpus import load_corpus, load_embeddings, save_embeddings
from .engine import BUILTIN_REPRESENTATIONS, RepresentationSpec, build_representation, run_experiment


@click.group()
def main() -> None:
    """Active-learning engine and annotation harness for text labelling."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON run config")
@click.option("--out", "out_dir", default="out", type=click.Path(), help="output directory")
def run(config_path: str, out_dir: str) -> None:
    """Run the multi-seed experiment described by a config file."""
    try:
        config = parse_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    try:
        result = run_experiment(
            config, out_dir=Path(out_dir), progress=lambda m: click.echo(f"  {m}")
        )
    except (FileNotFoundError, ValueError) as exc:
        raise click.ClickException(str(exc))
    for (rep, strategy), (mean, std, runs) in sorted(result.summary.items()):
        click.echo(f"{rep}/{strategy}: AULC {mean:.6f} +/- {std:.6f} over {runs} runs")
    click.echo(f"curves: {result.curves_path}")
    click.echo(f"summary: {result.summary_path}")
    if result.failures:
        for seed, message in result.failures:
            click.echo(f"seed {seed} failed: {message}", err=True)
        sys.exit(1)


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option(
    "--rep",
    "rep_name",
    required=True,
    type=click.Choice(BUILTIN_REPRESENTATIONS),
    help="builtin representation to compute",
)
@click.option("--out", "out_path", required=True, type=click.Path(), help="target .alem file")
@click.option("--lexicon", default=None, type=click.Path(exists=True), help="word-vector file (wordvec)")
@click.option("--topics", default=300, show_default=True, help="topic count (lda)")
@click.option("--iterations", default=1000, show_default=True, help="Gibbs sweeps (lda)")
@click.option("--seed", default=0, show_default=True, help="representation seed (lda)")
def embed(
    corpus_path: str,
    rep_name: str,
    out_path: str,
    lexicon: str | None,
    topics: int,
    iterations: int,
    seed: int,
) -> None:
    """Compute a builtin representation and write it as an ALEM file."""
    corpus = load_corpus(corpus_path)
    spec = RepresentationSpec(
        kind=rep_name, path=lexicon, topics=topics, iterations=iterations, seed=seed
    )
    if rep_name == "wordvec" and lexicon is None:
        raise click.ClickException("--lexicon is required for --rep wordvec")
    matrix = build_representation(spec, corpus)
    save_embeddings(out_path, matrix)
    click.echo(f"wrote {matrix.rows}x{matrix.dims} matrix to {out_path}")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True))
@click.option("--cv-cadence", default=10, show_default=True)
@click.option("--snapshot", default=None, type=click.Path(), help="JSON snapshot on shutdown")
def serve(
    port: int,
    host: str,
    corpus_path: str,
    embeddings_path: str,
    cv_cadence: int,
    snapshot: str | None,
) -> None:
    """Serve the live annotation session API."""
    import uvicorn

    from .server import create_app

    corpus = load_corpus(corpus_path)
    matrix = load_embeddings(embeddings_path, corpus)
    app = create_app(corpus, matrix, cv_cadence=cv_cadence, snapshot_path=snapshot)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
