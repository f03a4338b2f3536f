"""Command-line interface mirroring the HTTP operations.

Exit codes: 0 success, 1 user error (bad arguments, missing files, invalid
config, provider trouble), 2 internal error.
"""

from __future__ import annotations

import json
import os
import sys
import traceback

import click

from .agent import RetrievalAgent
from .config import ServiceConfig, load_config
from .models import GroundMemError, parse_rfc3339
from .service import SNIPPET_CHARS, build_store, create_app
from .store import items_from_fixture


@click.group()
@click.option("--config", "config_file", default=None, metavar="FILE", help="Key = value config file.")
@click.option("--data-dir", default=None, metavar="DIR", help="Where snapshots and files live.")
@click.pass_context
def cli(ctx: click.Context, config_file: str | None, data_dir: str | None) -> None:
    """Grounded memory engine: ingest annotated captions, ask questions."""
    overrides: dict[str, object] = {}
    if data_dir is not None:
        overrides["data_dir"] = data_dir
    ctx.obj = load_config(config_file, overrides)


def _echo_json(payload: object) -> None:
    click.echo(json.dumps(payload, indent=2, ensure_ascii=False))


@cli.command()
@click.argument("fixture")
@click.option("--stream-start", default=None, metavar="RFC3339", help="Timestamp of the first note.")
@click.option("--append", is_flag=True, help="Extend the current stream instead of starting a new one.")
@click.pass_obj
def ingest(config: ServiceConfig, fixture: str, stream_start: str | None, append: bool) -> None:
    """Ingest a JSONL caption fixture and save the snapshot."""
    if not os.path.isfile(fixture):
        raise GroundMemError(f"fixture file not found: {fixture}")
    start = None
    if stream_start is not None:
        try:
            start = parse_rfc3339(stream_start)
        except ValueError as exc:
            raise GroundMemError(f"--stream-start is not RFC 3339: {exc}") from exc
    store = build_store(config)
    report = store.ingest(
        items_from_fixture(fixture),
        stream_start=start,
        sample_rate_hz=config.sample_rate_hz,
        new_stream=not append,
    )
    os.makedirs(config.data_dir, exist_ok=True)
    store.save(config.snapshot_path)
    _echo_json(report.as_dict())


@cli.command()
@click.argument("question")
@click.pass_obj
def ask(config: ServiceConfig, question: str) -> None:
    """Answer a question from memory; prints answer, sources, and trace."""
    if not question.strip():
        raise GroundMemError("question must be non-empty")
    store = build_store(config)
    agent = RetrievalAgent(store, settings=config.provider, top_k=config.top_k)
    answer = agent.answer_question(question)
    sources = []
    for note_id in answer.sources:
        note = store.graph.get_note(note_id)
        sources.append(
            {
                "note_id": note_id,
                "snippet": note.plain_caption[:SNIPPET_CHARS],
                "data_files": list(note.data_files),
            }
        )
    _echo_json(
        {
            "answer": answer.text,
            "sources": sources,
            "trace": [result.as_dict() for result in answer.trace],
        }
    )


@cli.command()
@click.option("--host", default=None, help="Bind address (overrides config).")
@click.option("--port", default=None, type=int, help="Bind port (overrides config).")
@click.pass_obj
def serve(config: ServiceConfig, host: str | None, port: int | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=host or config.host, port=port or config.port, log_level="info")


@cli.command("export-vault")
@click.argument("directory")
@click.pass_obj
def export_vault(config: ServiceConfig, directory: str) -> None:
    """Write the markdown vault for the current snapshot."""
    store = build_store(config)
    count = store.export_vault(directory)
    _echo_json({"notes_written": count, "directory": directory})


@cli.command()
@click.pass_obj
def stats(config: ServiceConfig) -> None:
    """Print graph statistics."""
    store = build_store(config)
    _echo_json(store.graph.stats().as_dict())


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except (GroundMemError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except Exception:
        traceback.print_exc()
        sys.exit(2)


if __name__ == "__main__":
    main()
