"""HTTP service over the store and the retrieval agent.

Endpoints: POST /ingest, POST /ask, GET /notes/{id}, GET /graph/stats,
GET /files/{path}, GET /health, and the static chat frontend under GET /
when a built frontend directory is configured. Reads run concurrently;
ingestion is single-flight (a concurrent POST /ingest gets 409). Response
bodies keep a fixed field order so they are snapshot-testable.
"""

from __future__ import annotations

import os
import threading

import numpy as np
from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import providers
from .agent import RetrievalAgent
from .config import ServiceConfig, load_config
from .graph import UnknownNote
from .models import format_rfc3339, parse_rfc3339
from .store import IngestItem, MemoryStore, items_from_fixture

SNIPPET_CHARS = 200


def build_embed_fn(settings: providers.ProviderSettings):
    """Embedding callable for the store: stub hashing or the live endpoint."""
    if settings.mode == "live":
        client = providers.LiveEmbedClient(settings)

        def embed(text: str) -> np.ndarray:
            response = client.embed(
                providers.EmbedRequest(texts=(text,), model=settings.embed_model)
            )
            return np.asarray(response.vectors[0], dtype=np.float64)

        return embed
    from .embeddings import stub_embed

    return stub_embed


def build_store(config: ServiceConfig) -> MemoryStore:
    embed = build_embed_fn(config.provider)
    if os.path.exists(config.snapshot_path):
        return MemoryStore.load(
            config.snapshot_path,
            embed=embed,
            chunk_chars=config.chunk_chars,
            expansion_params=config.expansion_params(),
        )
    return MemoryStore(
        embed=embed,
        chunk_chars=config.chunk_chars,
        expansion_params=config.expansion_params(),
    )


def _note_view(store: MemoryStore, note_id: str) -> dict:
    note = store.graph.get_note(note_id)
    entities = [
        {"label": label, "type": store.graph.get_entity(label).entity_type.value}
        for label in store.graph.note_entity_labels(note_id)
    ]
    return {
        "id": note.id,
        "plain_caption": note.plain_caption,
        "raw_caption": note.caption,
        "created_at": format_rfc3339(note.created_at),
        "sequence_index": note.sequence_index,
        "data_files": list(note.data_files),
        "entities": entities,
        "neighbors": {
            "previous": store.graph.previous_note(note_id),
            "next": store.graph.next_note(note_id),
        },
    }


def _parse_ingest_items(body: dict) -> tuple[list[IngestItem], bool]:
    captions = body.get("captions")
    fixture = body.get("fixture")
    if (captions is None) == (fixture is None):
        raise HTTPException(400, "body must carry exactly one of 'captions' or 'fixture'")
    if fixture is not None:
        if not isinstance(fixture, str) or not fixture:
            raise HTTPException(400, "'fixture' must be a non-empty path string")
        if not os.path.isfile(fixture):
            raise HTTPException(400, f"fixture file not found: {fixture}")
        return items_from_fixture(fixture), True
    if not isinstance(captions, list):
        raise HTTPException(400, "'captions' must be a list")
    items: list[IngestItem] = []
    for position, entry in enumerate(captions):
        if isinstance(entry, str):
            items.append(IngestItem(caption=entry))
            continue
        if not isinstance(entry, dict) or not isinstance(entry.get("caption"), str):
            raise HTTPException(400, f"captions[{position}] must be a string or a caption object")
        data_files = entry.get("data_files", [])
        if not isinstance(data_files, list) or not all(isinstance(p, str) for p in data_files):
            raise HTTPException(400, f"captions[{position}].data_files must be a string list")
        created_at = None
        if entry.get("created_at") is not None:
            try:
                created_at = parse_rfc3339(str(entry["created_at"]))
            except ValueError:
                raise HTTPException(400, f"captions[{position}].created_at is not RFC 3339") from None
        items.append(
            IngestItem(
                caption=entry["caption"],
                data_files=tuple(data_files),
                created_at=created_at,
            )
        )
    return items, False


def create_app(config: ServiceConfig | None = None, store: MemoryStore | None = None) -> FastAPI:
    config = config or load_config()
    store = store or build_store(config)
    agent = RetrievalAgent(store, settings=config.provider, top_k=config.top_k)
    app = FastAPI(title="groundmem", docs_url=None, redoc_url=None)
    app.state.config = config
    app.state.store = store
    app.state.agent = agent
    ingest_gate = threading.Lock()

    @app.get("/health")
    def health() -> JSONResponse:
        return JSONResponse({"status": "ok", "image_count": store.graph.note_count})

    @app.post("/ingest")
    def ingest(body: dict = Body(...)) -> JSONResponse:
        if not ingest_gate.acquire(blocking=False):
            raise HTTPException(409, "another ingestion is in flight")
        try:
            items, _ = _parse_ingest_items(body)
            stream_start = None
            if body.get("stream_start") is not None:
                try:
                    stream_start = parse_rfc3339(str(body["stream_start"]))
                except ValueError:
                    raise HTTPException(400, "'stream_start' is not RFC 3339") from None
            new_stream = body.get("new_stream", True)
            if not isinstance(new_stream, bool):
                raise HTTPException(400, "'new_stream' must be a boolean")
            report = store.ingest(
                items,
                stream_start=stream_start,
                sample_rate_hz=config.sample_rate_hz,
                new_stream=new_stream,
            )
            os.makedirs(config.data_dir, exist_ok=True)
            store.save(config.snapshot_path)
            payload = report.as_dict()
            if report.notes_created == 0 and report.failures:
                return JSONResponse(payload, status_code=422)
            return JSONResponse(payload)
        finally:
            ingest_gate.release()

    @app.post("/ask")
    def ask(body: dict = Body(...)) -> JSONResponse:
        question = body.get("question")
        if not isinstance(question, str) or not question.strip():
            raise HTTPException(400, "'question' must be a non-empty string")
        try:
            answer = agent.answer_question(question)
        except providers.ProviderError as exc:
            raise HTTPException(503, f"provider unavailable: {exc}") from exc
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
        return JSONResponse(
            {
                "answer": answer.text,
                "sources": sources,
                "trace": [result.as_dict() for result in answer.trace],
            }
        )

    @app.get("/notes/{note_id}")
    def get_note(note_id: str) -> JSONResponse:
        try:
            return JSONResponse(_note_view(store, note_id))
        except UnknownNote:
            raise HTTPException(404, f"no note {note_id!r}") from None

    @app.get("/graph/stats")
    def graph_stats() -> JSONResponse:
        return JSONResponse(store.graph.stats().as_dict())

    @app.get("/files/{file_path:path}")
    def get_file(file_path: str) -> FileResponse:
        base = os.path.realpath(config.data_dir)
        candidate = os.path.realpath(os.path.join(base, file_path))
        if candidate != base and not candidate.startswith(base + os.sep):
            raise HTTPException(400, "path escapes the data directory")
        if not os.path.isfile(candidate):
            raise HTTPException(404, f"no file {file_path!r}")
        return FileResponse(candidate)

    frontend_dir = config.frontend_dir or os.path.join("frontend", "dist")
    if os.path.isdir(frontend_dir) and os.path.isfile(os.path.join(frontend_dir, "index.html")):
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="frontend")
    else:

        @app.get("/")
        def root() -> JSONResponse:
            return JSONResponse(
                {
                    "service": "groundmem",
                    "endpoints": [
                        "POST /ingest",
                        "POST /ask",
                        "GET /notes/{id}",
                        "GET /graph/stats",
                        "GET /files/{path}",
                        "GET /health",
                    ],
                }
            )

    return app
