from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from medipipe.providers import MockAsrProvider, MockEmbeddingProvider, MockGenerationProvider
from medipipe.transcript import TranscriptSession

# The gold six-section note paired with the demo back-pain dialogue.
GOLD_NOTE_TEXT = (
    "CHIEF COMPLAINT Back pain. "
    "HISTORY OF PRESENT ILLNESS Bryan Smith is a 55-year-old male with a past medical history "
    "significant for and prior discectomy, who presents with back pain. "
    "REVIEW OF SYSTEMS PHYSICAL EXAMINATION RESULTS ASSESSMENT AND PLAN"
)


def build_demo_session(session_id: str = "demo", finalize: bool = True) -> TranscriptSession:
    session = TranscriptSession(session_id=session_id)
    for seg in MockAsrProvider().transcribe("fig2"):
        session.append_segment(seg)
    if finalize:
        session.finalize()
    return session


@pytest.fixture
def demo_session() -> TranscriptSession:
    return build_demo_session()


@pytest.fixture
def mock_embedder() -> MockEmbeddingProvider:
    return MockEmbeddingProvider()


@pytest.fixture
def mock_generator() -> MockGenerationProvider:
    return MockGenerationProvider()


def make_corpus_tree(root: Path, counts: dict[str, int], manifest_name: str = "manifest.tsv") -> Path:
    """Write a synthetic corpus tree and manifest; returns the manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    lines = []
    i = 0
    for split, count in counts.items():
        for _ in range(count):
            rec_id = f"enc{i:04d}"
            (root / f"{rec_id}.dialogue.txt").write_text(
                f"[Doctor]: How are you today?\n[Patient]: Visit number {i}.\n", encoding="utf-8"
            )
            (root / f"{rec_id}.note.txt").write_text(
                f"CHIEF COMPLAINT\nConcern {i}.\n\nASSESSMENT AND PLAN\nFollow up.\n", encoding="utf-8"
            )
            lines.append(f"{rec_id}\t{split}")
            i += 1
    manifest = root / manifest_name
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest
