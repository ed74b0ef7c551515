"""Command-line interface: ingest, query, eval, genqa, serve."""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .config import RetrievalConfig, SystemConfig
from .corpus import (
    Category,
    chunk_corpus,
    generate_qa_pairs,
    load_qa_dataset,
    load_safe_drugs,
    parse_dur_csv,
    save_qa_dataset,
)
from .embedding import HashEmbedder, RemoteEmbedder
from .errors import DurqaError
from .evaluation import KeywordOntology, run_eval
from .generation import MockGenerator, RemoteGenerator, load_prompt_template
from .lexical import build_lexical_index
from .pipeline import Pipeline
from .service import answer_record_body, create_app
from .snapshot import save_snapshot
from .vector import build_vector_index

CATEGORY_CHOICE = click.Choice([c.value for c in Category])


def domain_errors(fn):
    """Report domain failures on stderr with exit code 1 (2 stays for usage)."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DurqaError, ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _pair_csvs(categories: tuple[str, ...], csvs: tuple[str, ...]) -> list[tuple[Category, Path]]:
    if len(categories) == 1:
        return [(Category(categories[0]), Path(p)) for p in csvs]
    if len(categories) == len(csvs):
        return [(Category(c), Path(p)) for c, p in zip(categories, csvs)]
    raise click.UsageError(
        "give one --category for all CSV files, or one --category per CSV in order"
    )


def _load_entries(pairs: list[tuple[Category, Path]]):
    entries = []
    for category, path in pairs:
        entries.extend(parse_dur_csv(path.read_bytes(), category))
    return entries


@click.group()
def main() -> None:
    """Drug contraindication QA over DUR-style data."""


@main.command()
@click.option("--category", "categories", multiple=True, required=True, type=CATEGORY_CHOICE,
              help="Category of the CSV file(s); repeat per file or give once for all.")
@click.argument("csvs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--snapshot", "snapshot_dir", default="snapshot", show_default=True,
              help="Directory to write the index snapshot to.")
@click.option("--dim", default=256, show_default=True, help="Mock embedder dimension.")
@click.option("--max-tokens", default=1000, show_default=True, help="Chunk token bound.")
@click.option("--remote-embedder", is_flag=True, help="Embed with the remote provider from env.")
@domain_errors
def ingest(categories, csvs, snapshot_dir, dim, max_tokens, remote_embedder) -> None:
    """Parse DUR CSV files, build indexes, and write a snapshot."""
    pairs = _pair_csvs(categories, csvs)
    entries = _load_entries(pairs)
    if not entries:
        raise click.UsageError("no entries found in the given CSV files")
    config = RetrievalConfig(max_chunk_tokens=max_tokens)
    embedder = RemoteEmbedder.from_env() if remote_embedder else HashEmbedder(dim=dim)
    chunks = chunk_corpus(entries, config.max_chunk_tokens)
    lexical = build_lexical_index(chunks)
    vectors = build_vector_index(chunks, embedder)
    save_snapshot(snapshot_dir, chunks, lexical, vectors, config)
    click.echo(f"ingested {len(entries)} entries into {len(chunks)} chunks at {snapshot_dir}")


def _pipeline_from_options(snapshot_dir: str, remote: bool, template_path: str | None) -> Pipeline:
    backend = RemoteGenerator.from_env() if remote else MockGenerator()
    template = load_prompt_template(template_path) if template_path else None
    return Pipeline.from_snapshot(snapshot_dir, backend=backend, template=template)


@main.command()
@click.argument("question")
@click.option("--snapshot", "snapshot_dir", default="snapshot", show_default=True)
@click.option("--category", type=CATEGORY_CHOICE, default=None,
              help="Force the retrieval category instead of detecting it.")
@click.option("--k", type=int, default=None, help="Number of context passages.")
@click.option("--remote-generator", is_flag=True, help="Generate with the remote provider from env.")
@click.option("--template", "template_path", type=click.Path(exists=True, dir_okay=False), default=None)
@domain_errors
def query(question, snapshot_dir, category, k, remote_generator, template_path) -> None:
    """Answer one question and print the full record as JSON."""
    pipeline = _pipeline_from_options(snapshot_dir, remote_generator, template_path)
    record = pipeline.answer_query(
        question, category=Category(category) if category else None, k=k
    )
    click.echo(json.dumps(answer_record_body(record), ensure_ascii=False, indent=2))


@main.command("eval")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--ontology", "ontology_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--report", "report_dir", type=click.Path(file_okay=False), default=None,
              help="Directory to write report.json and report.md into.")
@click.option("--snapshot", "snapshot_dir", default="snapshot", show_default=True)
@click.option("--remote-generator", is_flag=True)
@click.option("--template", "template_path", type=click.Path(exists=True, dir_okay=False), default=None)
@domain_errors
def eval_cmd(dataset_path, ontology_path, report_dir, snapshot_dir, remote_generator, template_path) -> None:
    """Evaluate a QA dataset and print per-category metrics."""
    pipeline = _pipeline_from_options(snapshot_dir, remote_generator, template_path)
    dataset = load_qa_dataset(dataset_path)
    if not dataset:
        raise ValueError(f"dataset is empty: {dataset_path}")
    ontology = KeywordOntology.load(ontology_path) if ontology_path else KeywordOntology.default()
    report = run_eval(dataset, pipeline, ontology)
    for label, cat in [*report.categories.items(), ("overall", report.overall)]:
        click.echo(
            f"{label}: n={cat.n} accuracy={cat.accuracy:.4f} macro_f1={cat.macro_f1:.4f} "
            f"parse_errors={cat.parse_errors}"
        )
    if report_dir:
        json_path, md_path = report.write(report_dir)
        click.echo(f"wrote {json_path} and {md_path}")


@main.command()
@click.option("--category", "categories", multiple=True, required=True, type=CATEGORY_CHOICE)
@click.argument("csvs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--safe", "safe_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON list of safe (not contraindicated) drugs per category.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@domain_errors
def genqa(categories, csvs, safe_path, out_path) -> None:
    """Generate a QA dataset from DUR CSV files plus a safe-drug list."""
    pairs = _pair_csvs(categories, csvs)
    entries = _load_entries(pairs)
    safe = load_safe_drugs(safe_path) if safe_path else []
    qa = generate_qa_pairs(entries, safe)
    save_qa_dataset(qa, out_path)
    click.echo(f"wrote {len(qa)} QA pairs to {out_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@domain_errors
def serve(config_path) -> None:
    """Run the HTTP service over an existing snapshot."""
    import uvicorn

    cfg = SystemConfig.from_file(config_path)
    embedder = (
        RemoteEmbedder.from_env() if cfg.embedder_backend == "remote" else HashEmbedder(dim=cfg.embed_dim)
    )
    backend = (
        RemoteGenerator.from_env() if cfg.generator_backend == "remote" else MockGenerator()
    )
    template = load_prompt_template(cfg.template_path) if cfg.template_path else None
    pipeline = Pipeline.from_snapshot(cfg.snapshot_dir, embedder=embedder, backend=backend, template=template)
    ontology = (
        KeywordOntology.load(cfg.ontology_path) if cfg.ontology_path else KeywordOntology.default()
    )
    app = create_app(
        pipeline,
        ontology=ontology,
        cors_origin=cfg.cors_origin,
        ui_dir=cfg.ui_dir,
        api_key=cfg.api_key,
    )
    uvicorn.run(app, host=cfg.host, port=cfg.port)


if __name__ == "__main__":
    main()
