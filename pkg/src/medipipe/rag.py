"""Scenario orchestration: dialogue -> note, note -> index, query -> answer.

Composes the transcript renderer, instruction prompting, chunking, the
vector index, and the providers. With mock providers the whole flow is a
pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .chunking import ChunkConfig, split_text
from .errors import DimensionError, ProviderError, StateError, ValidationError
from .providers import GenerationRequest
from .soap import InstructionTemplate, SoapNote, build_instruction_prompt, parse_note_text, render_note
from .transcript import TranscriptSession
from .vindex import SearchHit, VectorIndex

DEFAULT_SYSTEM_PROMPT = (
    "You are a clinical assistant. Answer using only the provided context. "
    "If the context is insufficient, say so."
)


@dataclass(frozen=True)
class RagConfig:
    k: int = 4
    system_prompt: str = DEFAULT_SYSTEM_PROMPT
    chunk_cfg: ChunkConfig = field(default_factory=ChunkConfig)
    max_context_chars: int = 4000
    max_tokens: int = 1024
    temperature: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if not self.system_prompt:
            raise ValidationError("system_prompt must be nonempty")
        if self.max_context_chars <= 0:
            raise ValidationError(f"max_context_chars must be positive, got {self.max_context_chars}")


@dataclass(frozen=True)
class Citation:
    entry_id: int
    score: float
    source_id: str


@dataclass(frozen=True)
class Answer:
    text: str
    citations: tuple[Citation, ...]
    context_used: bool


def note_id_for_session(session_id: str) -> str:
    return f"note-{session_id}"


def generate_note(
    session: TranscriptSession,
    generator,
    tmpl: InstructionTemplate | None = None,
    max_tokens: int = 1024,
    temperature: float = 0.0,
) -> SoapNote:
    """Render the session dialogue, prompt the generator, and parse the
    completion into a note whose id derives from the session id.
    """
    if not session.finalized:
        raise StateError(f"session {session.session_id} must be finalized before note generation")
    if not session.segments:
        raise ValidationError(f"session {session.session_id} has no segments")
    dialogue = session.render_dialogue()
    prompt = build_instruction_prompt(dialogue, tmpl)
    raw = generator.generate(GenerationRequest(prompt=prompt, max_tokens=max_tokens, temperature=temperature))
    return parse_note_text(raw, note_id=note_id_for_session(session.session_id), source_session=session.session_id)


def ingest_note(note: SoapNote, embedder, index: VectorIndex, cfg: RagConfig) -> list[int]:
    """Chunk the rendered note, embed every chunk, and insert the batch.

    All-or-nothing: embeddings are fetched for the whole note before any
    entry is written, so a provider failure leaves the index untouched.
    """
    chunks = split_text(render_note(note), cfg.chunk_cfg, source_id=note.note_id)
    vectors = embedder.embed_texts([c.text for c in chunks])
    items = [
        (
            vectors[i],
            chunk.text,
            {"source_id": note.note_id, "note_id": note.note_id, "seq": chunk.seq},
        )
        for i, chunk in enumerate(chunks)
    ]
    return index.upsert_many(items, normalize=True)


def assemble_prompt(system_prompt: str, hits: list[SearchHit], query: str, max_context_chars: int) -> str:
    """Compose the augmented prompt: system text, a numbered context block
    in hit order, the question, and the answer cue. Whole trailing chunks
    that would push the context past ``max_context_chars`` are dropped.
    """
    if not query:
        raise ValidationError("query must be nonempty")
    included = included_hits(hits, max_context_chars)
    lines = [system_prompt, "Context:"]
    lines.extend(f"{i + 1}. {hit.chunk_text}" for i, hit in enumerate(included))
    lines.append(f"Question: {query}")
    lines.append("Answer:")
    return "\n".join(lines)


def included_hits(hits: list[SearchHit], max_context_chars: int) -> list[SearchHit]:
    """Greedy prefix of hits whose cumulative chunk text length fits the
    character budget; stops at the first chunk that does not fit.
    """
    included = []
    used = 0
    for hit in hits:
        if used + len(hit.chunk_text) > max_context_chars:
            break
        included.append(hit)
        used += len(hit.chunk_text)
    return included


def answer_query(
    query: str,
    cfg: RagConfig,
    embedder,
    index: VectorIndex,
    generator,
    metadata_filter=None,
) -> Answer:
    """Scenario 2: embed the query, retrieve top-k context, prompt the
    generator, and return the answer with its citations.
    """
    if not query:
        raise ValidationError("query must be nonempty")
    try:
        query_vec = embedder.embed_texts([query])[0]
    except ProviderError as exc:
        exc.stage = exc.stage or "embed"
        raise
    try:
        hits = index.knn(query_vec, cfg.k, metadata_filter=metadata_filter)
    except DimensionError as exc:
        raise ProviderError(f"index search failed: {exc}", stage="search") from exc
    prompt = assemble_prompt(cfg.system_prompt, hits, query, cfg.max_context_chars)
    try:
        text = generator.generate(
            GenerationRequest(prompt=prompt, max_tokens=cfg.max_tokens, temperature=cfg.temperature)
        )
    except ProviderError as exc:
        exc.stage = exc.stage or "generate"
        raise
    cited = included_hits(hits, cfg.max_context_chars)
    citations = tuple(
        Citation(entry_id=h.entry_id, score=h.score, source_id=str(h.metadata.get("source_id", "")))
        for h in cited
    )
    return Answer(text=text, citations=citations, context_used=bool(hits))
