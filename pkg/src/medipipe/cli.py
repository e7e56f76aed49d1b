"""Operator command line: corpus checks, offline note generation, index
operations, evaluation runs, fine-tune spec emission, and serving.

Exit codes: 0 success, 2 usage/validation, 3 provider failure, 4 I/O.
Diagnostics go to stderr; stdout carries data.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click

from .chunking import ChunkConfig, split_text
from .corpus import TEST_SPLITS, load_corpus
from .errors import (
    ConfigError,
    CorpusLoadError,
    FormatError,
    MedipipeError,
    ParseError,
    ProviderError,
    StateError,
    ValidationError,
)
from .metrics import evaluate_system, render_report
from .providers import (
    GenerationRequest,
    HttpEmbeddingProvider,
    HttpGenerationProvider,
    MockEmbeddingProvider,
    MockGenerationProvider,
    ProviderEndpoint,
)
from .soap import build_instruction_prompt, export_note, parse_note_text
from .tuning import FinetuneSpec, emit_finetune_spec
from .vindex import VectorIndex

EXIT_USAGE = 2
EXIT_PROVIDER = 3
EXIT_IO = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ProviderError as exc:
            _fail(EXIT_PROVIDER, str(exc))
        except (ValidationError, ConfigError, ParseError, CorpusLoadError, StateError) as exc:
            _fail(EXIT_USAGE, str(exc))
        except FormatError as exc:
            _fail(EXIT_IO, str(exc))
        except OSError as exc:
            _fail(EXIT_IO, str(exc))
        except MedipipeError as exc:
            _fail(EXIT_USAGE, str(exc))

    return wrapper


def _require_file(path: Path, what: str) -> Path:
    if not path.is_file():
        _fail(EXIT_USAGE, f"{what} {path} does not exist")
    return path


def _require_dir(path: Path, what: str) -> Path:
    if not path.is_dir():
        _fail(EXIT_USAGE, f"{what} {path} does not exist")
    return path


def _embedder(provider: str, dim: int):
    if provider == "mock":
        return MockEmbeddingProvider(dim)
    return HttpEmbeddingProvider(ProviderEndpoint(base_url=provider))


def _generator(provider: str):
    if provider == "mock":
        return MockGenerationProvider()
    return HttpGenerationProvider(ProviderEndpoint(base_url=provider))


@click.group()
def main():
    """Clinical dialogue-to-note pipeline tooling."""


# --- corpus ------------------------------------------------------------------


@main.group()
def corpus():
    """Validate or summarize a dialogue/note corpus tree."""


def _load_corpus_args(root: str, manifest: str):
    root_path = _require_dir(Path(root), "corpus root")
    manifest_path = _require_file(Path(manifest), "manifest")
    return load_corpus(root_path, manifest_path)


@corpus.command("validate")
@click.option("--root", required=True, help="Corpus directory of <id>.dialogue.txt / <id>.note.txt pairs.")
@click.option("--manifest", required=True, help="Tab-separated id<TAB>split manifest file.")
@_handle_errors
def corpus_validate(root: str, manifest: str):
    loaded = _load_corpus_args(root, manifest)
    click.echo(f"OK: {len(loaded.records)} records")


@corpus.command("stats")
@click.option("--root", required=True)
@click.option("--manifest", required=True)
@_handle_errors
def corpus_stats(root: str, manifest: str):
    loaded = _load_corpus_args(root, manifest)
    stats = loaded.stats()
    click.echo(f"train={stats.counts['train']} valid={stats.counts['valid']} test={stats.test_total}")
    click.echo(" ".join(f"{s}={stats.counts[s]}" for s in TEST_SPLITS))
    click.echo(f"mean_dialogue_tokens={stats.mean_dialogue_tokens:.1f}")
    click.echo(f"mean_note_tokens={stats.mean_note_tokens:.1f}")


# --- note --------------------------------------------------------------------


@main.group()
def note():
    """Offline note generation from a speaker-tagged dialogue file."""


@note.command("generate")
@click.option("--dialogue", "dialogue_path", required=True, help="Speaker-tagged dialogue text file.")
@click.option("--provider", default="mock", show_default=True, help="Generation endpoint URL, or 'mock'.")
@click.option("--out", "out_path", required=True, help="Output note file.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@_handle_errors
def note_generate(dialogue_path: str, provider: str, out_path: str, fmt: str):
    path = _require_file(Path(dialogue_path), "dialogue file")
    dialogue = path.read_text(encoding="utf-8").strip()
    if not dialogue:
        _fail(EXIT_USAGE, f"dialogue file {path} is empty")
    prompt = build_instruction_prompt(dialogue)
    raw = _generator(provider).generate(GenerationRequest(prompt=prompt))
    parsed = parse_note_text(raw, note_id=f"note-{path.stem}")
    Path(out_path).write_bytes(export_note(parsed, fmt))
    click.echo(f"wrote {out_path}", err=True)


# --- index -------------------------------------------------------------------


@main.group()
def index():
    """Build and query the vector index."""


@index.command("build")
@click.option("--in", "in_dir", required=True, help="Directory of .txt documents to chunk and embed.")
@click.option("--out", "out_path", required=True, help="Index file to write.")
@click.option("--provider", default="mock", show_default=True, help="Embedding endpoint URL, or 'mock'.")
@click.option("--dim", default=64, show_default=True, help="Mock embedding dimension.")
@click.option("--chunk-size", default=1000, show_default=True)
@click.option("--overlap", default=150, show_default=True)
@_handle_errors
def index_build(in_dir: str, out_path: str, provider: str, dim: int, chunk_size: int, overlap: int):
    src = _require_dir(Path(in_dir), "input directory")
    files = sorted(src.glob("*.txt"))
    if not files:
        _fail(EXIT_USAGE, f"no .txt documents under {src}")
    cfg = ChunkConfig(chunk_size=chunk_size, overlap=overlap)
    embedder = _embedder(provider, dim)
    idx = VectorIndex()
    total = 0
    for doc in files:
        text = doc.read_text(encoding="utf-8")
        if not text.strip():
            continue
        chunks = split_text(text, cfg, source_id=doc.stem)
        vectors = embedder.embed_texts([c.text for c in chunks])
        idx.upsert_many(
            [
                (vectors[i], c.text, {"source_id": c.source_id, "note_id": None, "seq": c.seq})
                for i, c in enumerate(chunks)
            ],
            normalize=True,
        )
        total += len(chunks)
    idx.persist(out_path)
    click.echo(f"indexed {total} chunks from {len(files)} documents into {out_path}", err=True)


@index.command("query")
@click.option("--index", "index_path", required=True)
@click.option("--text", "query_text", required=True)
@click.option("--k", default=4, show_default=True)
@click.option("--provider", default="mock", show_default=True)
@click.option("--dim", default=64, show_default=True)
@_handle_errors
def index_query(index_path: str, query_text: str, k: int, provider: str, dim: int):
    path = _require_file(Path(index_path), "index file")
    if not query_text.strip():
        _fail(EXIT_USAGE, "query text is empty")
    idx = VectorIndex.load(path)
    query_vec = _embedder(provider, dim).embed_texts([query_text])[0]
    hits = idx.knn(query_vec, k)
    for rank, hit in enumerate(hits, start=1):
        click.echo(
            json.dumps(
                {
                    "rank": rank,
                    "entry_id": hit.entry_id,
                    "score": round(hit.score, 6),
                    "source_id": hit.metadata.get("source_id", ""),
                    "chunk_text": hit.chunk_text,
                },
                ensure_ascii=False,
            )
        )


# --- eval --------------------------------------------------------------------


@main.group(name="eval")
def eval_group():
    """Score prediction files against reference files."""


@eval_group.command("run")
@click.option("--pred", "pred_dir", required=True, help="Directory of <id>.txt predictions.")
@click.option("--ref", "ref_dir", required=True, help="Directory of <id>.txt references.")
@click.option("--name", required=True, help="System name for the report row.")
@click.option("--out", "out_csv", required=True, help="CSV file to write.")
@click.option("--provider", default="mock", show_default=True, help="Embedding endpoint for BERTScore, or 'mock'.")
@click.option("--dim", default=64, show_default=True)
@_handle_errors
def eval_run(pred_dir: str, ref_dir: str, name: str, out_csv: str, provider: str, dim: int):
    pred_path = _require_dir(Path(pred_dir), "prediction directory")
    ref_path = _require_dir(Path(ref_dir), "reference directory")
    pred_ids = {p.stem for p in pred_path.glob("*.txt")}
    ref_ids = {p.stem for p in ref_path.glob("*.txt")}
    if pred_ids != ref_ids:
        missing_pred = sorted(ref_ids - pred_ids)
        missing_ref = sorted(pred_ids - ref_ids)
        parts = []
        if missing_pred:
            parts.append("missing predictions: " + ", ".join(missing_pred))
        if missing_ref:
            parts.append("missing references: " + ", ".join(missing_ref))
        _fail(EXIT_USAGE, "; ".join(parts))
    if not ref_ids:
        _fail(EXIT_USAGE, "no .txt pairs to evaluate")
    pairs = []
    for rec_id in sorted(ref_ids):
        generated = (pred_path / f"{rec_id}.txt").read_text(encoding="utf-8")
        reference = (ref_path / f"{rec_id}.txt").read_text(encoding="utf-8")
        pairs.append((generated, reference))
    row = evaluate_system(pairs, name, _embedder(provider, dim))
    report = render_report([row])
    Path(out_csv).write_text(report.csv, encoding="utf-8")
    click.echo(report.table, nl=False)


# --- finetune-spec -----------------------------------------------------------


@main.group(name="finetune-spec")
def finetune_spec():
    """Emit fine-tuning job documents."""


@finetune_spec.command("emit")
@click.option("--base", "base_model", default="llama3-8b", show_default=True)
@click.option("--out", "out_path", default=None, help="Output JSON file (stdout when omitted).")
@click.option("--rank", "rank_r", default=16, show_default=True)
@click.option("--alpha", "lora_alpha", default=16, show_default=True)
@click.option("--bits", "quant_bits", default=4, show_default=True)
@click.option("--dataset-ref", default="", show_default=True)
@_handle_errors
def finetune_emit(base_model: str, out_path: str | None, rank_r: int, lora_alpha: int, quant_bits: int, dataset_ref: str):
    spec = FinetuneSpec(
        base_model=base_model,
        rank_r=rank_r,
        lora_alpha=lora_alpha,
        quant_bits=quant_bits,
        dataset_ref=dataset_ref,
    )
    document = emit_finetune_spec(spec)
    if out_path is None:
        click.echo(document, nl=False)
    else:
        Path(out_path).write_text(document, encoding="utf-8")
        click.echo(f"wrote {out_path}", err=True)


# --- serve -------------------------------------------------------------------


@main.command("serve")
@click.option("--config", "config_path", default=None, help="Config file (defaults to $MEDIPIPE_CONFIG).")
@_handle_errors
def serve_cmd(config_path: str | None):
    from .service import CONFIG_ENV, ServiceConfig, load_config, serve

    if config_path is None:
        config_path = os.environ.get(CONFIG_ENV)
    if config_path:
        config = load_config(_require_file(Path(config_path), "config file"))
    else:
        config = ServiceConfig()
    click.echo(f"serving on {config.listen_addr} (index: {config.index_path})", err=True)
    serve(config)


if __name__ == "__main__":
    main()
