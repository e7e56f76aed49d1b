"""HTTP facade: session capture, note finalization, and retrieval queries.

Sessions are transient in-process state; finalized notes and the vector
index are durable (JSON notes file + the binary index format), so a
restart with the same config serves the same query results.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import rag
from .chunking import ChunkConfig
from .errors import (
    ConfigError,
    EmptySessionError,
    MedipipeError,
    OrderingError,
    ProviderError,
    StateError,
    ValidationError,
)
from .providers import (
    HttpAsrProvider,
    HttpEmbeddingProvider,
    HttpGenerationProvider,
    MockAsrProvider,
    MockEmbeddingProvider,
    MockGenerationProvider,
    ProviderEndpoint,
)
from .soap import InstructionTemplate, note_from_json_dict, note_to_json_dict
from .transcript import Segment, Speaker, TranscriptSession
from .vindex import VectorIndex

CONFIG_ENV = "MEDIPIPE_CONFIG"


@dataclass(frozen=True)
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8077"
    index_path: Path = Path("medipipe-index.mpvx")
    notes_path: Path | None = None
    asr: str = "mock"
    embed: str = "mock"
    generate: str = "mock"
    embed_dim: int = 64
    k: int = 4
    chunk_size: int = 1000
    chunk_overlap: int = 150
    max_context_chars: int = 4000
    system_prompt: str = rag.DEFAULT_SYSTEM_PROMPT
    cors_origins: tuple[str, ...] = ("*",)

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        try:
            return int(self.listen_addr.rsplit(":", 1)[1])
        except (IndexError, ValueError):
            raise ConfigError(f"listen_addr must be host:port, got {self.listen_addr!r}")

    def resolved_notes_path(self) -> Path:
        return self.notes_path or self.index_path.with_suffix(self.index_path.suffix + ".notes.json")

    def rag_config(self) -> rag.RagConfig:
        return rag.RagConfig(
            k=self.k,
            system_prompt=self.system_prompt,
            chunk_cfg=ChunkConfig(chunk_size=self.chunk_size, overlap=self.chunk_overlap),
            max_context_chars=self.max_context_chars,
        )


_CONFIG_KEYS = {
    "listen_addr",
    "index_path",
    "notes_path",
    "asr",
    "embed",
    "generate",
    "embed_dim",
    "k",
    "chunk_size",
    "chunk_overlap",
    "max_context_chars",
    "system_prompt",
    "cors_origins",
}


def load_config(path: str | Path) -> ServiceConfig:
    """Parse a ``key = value`` config file into a ServiceConfig."""
    text = Path(path).read_text(encoding="utf-8")
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value
    for int_key in ("embed_dim", "k", "chunk_size", "chunk_overlap", "max_context_chars"):
        if int_key in values:
            values[int_key] = int(values[int_key])
    for path_key in ("index_path", "notes_path"):
        if path_key in values:
            values[path_key] = Path(values[path_key])
    if "cors_origins" in values:
        values["cors_origins"] = tuple(v.strip() for v in values["cors_origins"].split(",") if v.strip())
    return ServiceConfig(**values)


def _provider_triplet(cfg: ServiceConfig):
    def endpoint(url: str):
        return ProviderEndpoint(base_url=url)

    asr = MockAsrProvider() if cfg.asr == "mock" else HttpAsrProvider(endpoint(cfg.asr))
    embed = MockEmbeddingProvider(cfg.embed_dim) if cfg.embed == "mock" else HttpEmbeddingProvider(endpoint(cfg.embed))
    generate = (
        MockGenerationProvider() if cfg.generate == "mock" else HttpGenerationProvider(endpoint(cfg.generate))
    )
    return asr, embed, generate


@dataclass
class ServiceState:
    config: ServiceConfig
    index: VectorIndex
    notes: dict = field(default_factory=dict)
    sessions: dict = field(default_factory=dict)
    session_lock: threading.Lock = field(default_factory=threading.Lock)
    ingest_lock: threading.Lock = field(default_factory=threading.Lock)

    def persist_notes(self) -> None:
        payload = {"notes": [note_to_json_dict(n) for _, n in sorted(self.notes.items())]}
        path = self.config.resolved_notes_path()
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")
        os.replace(tmp, path)


def _error_response(status: int, code: str, message: str, stage: str = "") -> JSONResponse:
    body: dict = {"error": {"code": code, "message": message}}
    if stage:
        body["error"]["stage"] = stage
    return JSONResponse(status_code=status, content=body)


def create_app(config: ServiceConfig) -> FastAPI:
    index_dir = config.index_path.parent if str(config.index_path.parent) else Path(".")
    if not index_dir.is_dir() or not os.access(index_dir, os.W_OK):
        raise ConfigError(f"index path directory {index_dir} is not a writable directory")

    index = VectorIndex.load(config.index_path) if config.index_path.is_file() else VectorIndex()
    state = ServiceState(config=config, index=index)
    notes_path = config.resolved_notes_path()
    if notes_path.is_file():
        payload = json.loads(notes_path.read_text(encoding="utf-8"))
        for item in payload.get("notes", []):
            note = note_from_json_dict(item)
            state.notes[note.note_id] = note

    asr, embedder, generator = _provider_triplet(config)
    rag_cfg = config.rag_config()
    template = InstructionTemplate()

    app = FastAPI(title="medipipe", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.medipipe = state

    @app.exception_handler(RequestValidationError)
    async def _on_bad_request(request: Request, exc: RequestValidationError):
        return _error_response(422, "validation", str(exc.errors()[:1]))

    @app.exception_handler(StarletteHTTPException)
    async def _on_http_error(request: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return _error_response(exc.status_code, code, str(exc.detail))

    @app.exception_handler(MedipipeError)
    async def _on_domain_error(request: Request, exc: MedipipeError):
        return _error_response(500, "internal", str(exc))

    @app.post("/v1/sessions", status_code=201)
    def create_session():
        session_id = uuid.uuid4().hex
        with state.session_lock:
            state.sessions[session_id] = TranscriptSession(session_id=session_id)
        return {"session_id": session_id}

    @app.post("/v1/sessions/{session_id}/segments", status_code=204)
    def add_segment(session_id: str, body: dict):
        with state.session_lock:
            session = state.sessions.get(session_id)
        if session is None:
            return _error_response(404, "not_found", f"unknown session {session_id!r}")
        try:
            segment = Segment(
                speaker=Speaker.parse(str(body["speaker"])),
                start_s=float(body["start"]),
                end_s=float(body["end"]),
                text=str(body["text"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            return _error_response(422, "validation", f"invalid segment body: {exc}")
        except ValidationError as exc:
            return _error_response(422, "validation", str(exc))
        with state.session_lock:
            try:
                session.append_segment(segment)
            except StateError as exc:
                return _error_response(409, "conflict", str(exc))
            except OrderingError as exc:
                return _error_response(422, "ordering", str(exc))
        return Response(status_code=204)

    @app.post("/v1/sessions/{session_id}/finalize")
    def finalize_session(session_id: str):
        with state.session_lock:
            session = state.sessions.get(session_id)
        if session is None:
            return _error_response(404, "not_found", f"unknown session {session_id!r}")
        with state.session_lock:
            if session.finalized:
                return _error_response(409, "conflict", f"session {session_id!r} already finalized")
            if not session.segments:
                return _error_response(422, "validation", f"session {session_id!r} has no segments")
            session.finalize()
        try:
            note = rag.generate_note(session, generator, template)
        except ProviderError as exc:
            return _error_response(502, "provider_failure", str(exc), stage=exc.stage or "generate")
        except MedipipeError as exc:
            return _error_response(502, "provider_failure", f"generator output unusable: {exc}", stage="generate")
        with state.ingest_lock:
            try:
                rag.ingest_note(note, embedder, state.index, rag_cfg)
            except ProviderError as exc:
                return _error_response(502, "provider_failure", str(exc), stage=exc.stage or "embed")
            state.notes[note.note_id] = note
            state.index.persist(config.index_path)
            state.persist_notes()
        return {"note_id": note.note_id, "note": note_to_json_dict(note)}

    @app.post("/v1/query")
    def query(body: dict):
        query_text = body.get("query")
        if not isinstance(query_text, str) or not query_text:
            return _error_response(422, "validation", "query must be a nonempty string")
        k = body.get("k", rag_cfg.k)
        if not isinstance(k, int) or k < 1:
            return _error_response(422, "validation", f"k must be a positive integer, got {k!r}")
        cfg = rag.RagConfig(
            k=k,
            system_prompt=rag_cfg.system_prompt,
            chunk_cfg=rag_cfg.chunk_cfg,
            max_context_chars=rag_cfg.max_context_chars,
        )
        try:
            answer = rag.answer_query(query_text, cfg, embedder, state.index, generator)
        except ProviderError as exc:
            return _error_response(502, "provider_failure", str(exc), stage=exc.stage)
        return {
            "answer": answer.text,
            "citations": [
                {"entry_id": c.entry_id, "score": c.score, "source_id": c.source_id} for c in answer.citations
            ],
            "context_used": answer.context_used,
        }

    @app.get("/v1/notes/{note_id}")
    def get_note(note_id: str):
        note = state.notes.get(note_id)
        if note is None:
            return _error_response(404, "not_found", f"unknown note {note_id!r}")
        return note_to_json_dict(note)

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "index_entries": len(state.index)}

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
