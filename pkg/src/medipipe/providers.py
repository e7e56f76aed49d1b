"""Clients for the three external model services, plus deterministic mocks.

Wire protocol is JSON over HTTP: POST ``/embed`` with ``{"texts": [...]}``
returning ``{"vectors": [[...]], "dim": d}``; POST ``/generate`` with
``{"prompt", "max_tokens", "temperature"}`` returning ``{"text"}``; POST
``/transcribe`` with ``{"audio_id"}`` returning ``{"segments": [...]}``.
Every mock is a pure function of its inputs so the full pipeline runs
offline and bit-reproducibly.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np
import requests

from .corpus import split_sentences, tokenize
from .errors import ProtocolError, ProviderError, TransportError, ValidationError
from .transcript import Segment, Speaker

AUTH_TOKEN_ENV = "MEDIPIPE_PROVIDER_TOKEN"
DEFAULT_MOCK_DIM = 64

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF

MAX_RETRIES = 2
RETRY_BACKOFF_S = 0.2


@dataclass(frozen=True)
class ProviderEndpoint:
    base_url: str
    timeout_ms: int = 30_000
    auth_token: str | None = None

    def __post_init__(self):
        if not 1 <= self.timeout_ms <= 600_000:
            raise ValidationError(f"timeout_ms must be in [1, 600000], got {self.timeout_ms}")

    def resolved_token(self) -> str | None:
        return self.auth_token or os.environ.get(AUTH_TOKEN_ENV) or None


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_tokens: int = 1024
    temperature: float = 0.0

    def __post_init__(self):
        if not self.prompt:
            raise ValidationError("prompt must be nonempty")
        if self.max_tokens <= 0:
            raise ValidationError(f"max_tokens must be positive, got {self.max_tokens}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValidationError(f"temperature must be in [0, 2], got {self.temperature}")


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _U64
    return h


def mock_embed(text: str, d: int = DEFAULT_MOCK_DIM) -> np.ndarray:
    """Deterministic token-hash embedding: every token adds +-1 at the
    coordinate given by its FNV-1a hash mod ``d`` (sign from hash bit 32),
    then the vector is L2-normalized.
    """
    if d < 8:
        raise ValidationError(f"mock embedding dimension must be >= 8, got {d}")
    tokens = tokenize(text)
    if not tokens:
        raise ValidationError(f"cannot embed text with zero tokens: {text!r}")
    vec = np.zeros(d, dtype=np.float64)
    for tok in tokens:
        h = fnv1a_64(tok.encode("utf-8"))
        sign = 1.0 if (h >> 32) & 1 == 0 else -1.0
        vec[h % d] += sign
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        vec[0] = 1.0
        norm = 1.0
    return vec / norm


_NOTE_HEADERS = (
    "CHIEF COMPLAINT",
    "HISTORY OF PRESENT ILLNESS",
    "REVIEW OF SYSTEMS",
    "PHYSICAL EXAMINATION",
    "RESULTS",
    "ASSESSMENT AND PLAN",
)
_PLACEHOLDER = "None reported."


def mock_generate(req: GenerationRequest) -> str:
    """Extractive stand-in for the note generator.

    Scans the prompt's dialogue block for speaker-tagged lines and emits a
    note with all six headers: the chief complaint is the first sentence the
    patient speaks, the history section carries the first two doctor turns,
    and the remaining sections hold a fixed placeholder.
    """
    doctor_turns: list[str] = []
    patient_turns: list[str] = []
    for line in req.prompt.split("\n"):
        line = line.strip()
        if line.lower().startswith("[doctor]:"):
            doctor_turns.append(line[len("[doctor]:") :].strip())
        elif line.lower().startswith("[patient]:"):
            patient_turns.append(line[len("[patient]:") :].strip())
    if not doctor_turns and not patient_turns:
        raise ProviderError("mock generator: prompt contains no speaker-tagged dialogue lines", stage="generate")

    chief = _PLACEHOLDER
    if patient_turns:
        sentences = split_sentences(patient_turns[0])
        if sentences:
            chief = sentences[0]
    history = " ".join(doctor_turns[:2]) if doctor_turns else _PLACEHOLDER

    bodies = [chief, history, _PLACEHOLDER, _PLACEHOLDER, _PLACEHOLDER, _PLACEHOLDER]
    parts = [f"{header}\n{body}" for header, body in zip(_NOTE_HEADERS, bodies)]
    return "\n\n".join(parts)


def mock_answer(req: GenerationRequest) -> str:
    """Deterministic stand-in for retrieval-augmented answering.

    Reads the numbered context block of the assembled prompt and grounds a
    canned answer in the first retrieved chunk; with an empty context block
    it reports the context as insufficient.
    """
    lines = req.prompt.split("\n")
    try:
        ctx_start = lines.index("Context:") + 1
    except ValueError:
        raise ProviderError("mock answerer: prompt has no context block", stage="generate")
    first_chunk_line = ""
    for line in lines[ctx_start:]:
        if line.startswith("Question: "):
            break
        if not first_chunk_line and line.startswith("1. "):
            first_chunk_line = line[len("1. ") :].strip()
    if not first_chunk_line:
        return "The provided context is insufficient to answer this question."
    return f"Based on the stored notes: {first_chunk_line}"


# Replayable diarized-dialogue fixture for offline runs; registered under
# the audio id "fig2" (also "back-pain-demo").
_BACK_PAIN_DEMO_TURNS = (
    ("doctor", "Hi, Bryan. How are you?"),
    ("patient", "I'm doing well. I'm a little sore."),
    (
        "doctor",
        "So, Bryan is a 55-year-old male with a past medical history significant for a prior "
        "discectomy, presenting with back pain. So, Bryan, what happened to your back?",
    ),
    (
        "patient",
        "You know... my wife made me push, uh, a refrigerator through the other room, and when "
        "I was helping move it, I felt something in my back on the lower right side.",
    ),
    ("doctor", "Okay, on the lower right side of your back?"),
    ("patient", "Yes."),
    ("doctor", "Okay. Those wives, always making you do stuff!"),
    ("patient", "Yes."),
    ("doctor", "And what day did this happen? How long ago?"),
    ("patient", "Uh, this was about five days ago."),
)


ASR_FIXTURES: dict[str, tuple[tuple[str, str], ...]] = {
    "fig2": _BACK_PAIN_DEMO_TURNS,
    "back-pain-demo": _BACK_PAIN_DEMO_TURNS,
}


class MockEmbeddingProvider:
    """In-process embedder over the token-hash scheme; unit-norm output."""

    def __init__(self, dim: int = DEFAULT_MOCK_DIM):
        self.dim = dim

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        if not texts:
            raise ValidationError("embed_texts requires a nonempty text list")
        for t in texts:
            if not t:
                raise ValidationError("embed_texts: texts must be nonempty")
        return np.stack([mock_embed(t, self.dim) for t in texts])


class MockGenerationProvider:
    """Dispatches on prompt shape: dialogue prompts get an extractive note,
    context/question prompts get a grounded canned answer.
    """

    def generate(self, req: GenerationRequest) -> str:
        lowered = req.prompt.lower()
        if "[doctor]:" in lowered or "[patient]:" in lowered:
            return mock_generate(req)
        if "\nquestion: " in lowered or lowered.startswith("question: "):
            return mock_answer(req)
        return mock_generate(req)  # raises the documented mock error


class MockAsrProvider:
    """Replays canned diarized segments by audio id."""

    def transcribe(self, audio_id: str) -> list[Segment]:
        turns = ASR_FIXTURES.get(audio_id)
        if turns is None:
            raise ProviderError(f"unknown audio fixture {audio_id!r}", stage="transcribe")
        segments = []
        for i, (role, text) in enumerate(turns):
            speaker = Speaker.DOCTOR if role == "doctor" else Speaker.PATIENT
            segments.append(Segment(speaker=speaker, start_s=i * 5.0, end_s=i * 5.0 + 4.0, text=text))
        return segments


def _post_json(
    endpoint: ProviderEndpoint,
    path: str,
    payload: dict,
    stage: str,
    retries: int = MAX_RETRIES,
) -> dict:
    url = endpoint.base_url.rstrip("/") + path
    headers = {}
    token = endpoint.resolved_token()
    if token:
        headers["Authorization"] = f"Bearer {token}"
    timeout = endpoint.timeout_ms / 1000.0
    last_exc: Exception | None = None
    for attempt in range(retries + 1):
        try:
            resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_exc = exc
            if attempt < retries:
                time.sleep(RETRY_BACKOFF_S)
            continue
        if resp.status_code != 200:
            raise ProviderError(f"{stage} endpoint returned HTTP {resp.status_code}", stage=stage)
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"{stage} endpoint returned invalid JSON: {exc}", stage=stage)
    raise TransportError(f"{stage} endpoint unreachable after {retries + 1} attempts: {last_exc}", stage=stage)


class HttpEmbeddingProvider:
    def __init__(self, endpoint: ProviderEndpoint):
        self.endpoint = endpoint

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        if not texts:
            raise ValidationError("embed_texts requires a nonempty text list")
        for t in texts:
            if not t:
                raise ValidationError("embed_texts: texts must be nonempty")
        body = _post_json(self.endpoint, "/embed", {"texts": list(texts)}, stage="embed")
        vectors = body.get("vectors")
        dim = body.get("dim")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProtocolError(
                f"embed response must carry one vector per text ({len(texts)} expected)", stage="embed"
            )
        arr = []
        for vec in vectors:
            if not isinstance(vec, list) or (dim is not None and len(vec) != dim) or len(vec) != len(vectors[0]):
                raise ProtocolError("embed response vectors disagree on dimension", stage="embed")
            arr.append(np.asarray(vec, dtype=np.float64))
        out = np.stack(arr)
        if not np.all(np.isfinite(out)):
            raise ProtocolError("embed response contains non-finite values", stage="embed")
        return out


class HttpGenerationProvider:
    def __init__(self, endpoint: ProviderEndpoint):
        self.endpoint = endpoint

    def generate(self, req: GenerationRequest) -> str:
        payload = {"prompt": req.prompt, "max_tokens": req.max_tokens, "temperature": req.temperature}
        # No retry here: a transport error may follow a partially consumed
        # generation, and replaying it is not idempotent.
        body = _post_json(self.endpoint, "/generate", payload, stage="generate", retries=0)
        text = body.get("text")
        if not isinstance(text, str) or not text:
            raise ProviderError("generate endpoint returned an empty completion", stage="generate")
        return text


class HttpAsrProvider:
    def __init__(self, endpoint: ProviderEndpoint):
        self.endpoint = endpoint

    def transcribe(self, audio_id: str) -> list[Segment]:
        body = _post_json(self.endpoint, "/transcribe", {"audio_id": audio_id}, stage="transcribe")
        raw = body.get("segments")
        if not isinstance(raw, list):
            raise ProtocolError("transcribe response missing segments list", stage="transcribe")
        segments = []
        last_start = None
        for item in raw:
            try:
                seg = Segment(
                    speaker=Speaker.parse(str(item["speaker"])),
                    start_s=float(item["start"]),
                    end_s=float(item["end"]),
                    text=str(item["text"]),
                )
            except (KeyError, TypeError, ValueError, ValidationError) as exc:
                raise ProtocolError(f"transcribe response segment invalid: {exc}", stage="transcribe")
            if last_start is not None and seg.start_s < last_start:
                raise ProtocolError("transcribe response segments out of order", stage="transcribe")
            last_start = seg.start_s
            segments.append(seg)
        return segments
