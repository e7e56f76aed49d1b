from __future__ import annotations

import random

import pytest

from medipipe.chunking import Chunk, ChunkConfig, split_text, validate_chunks
from medipipe.errors import ConfigError, ValidationError
from oracles import chunk_oracle

WORDS = ["back", "pain", "lumbar", "exam", "plan", "mri", "days", "lift", "rest", "xray"]


def _random_text(rng: random.Random, max_words: int = 120) -> str:
    parts = []
    for _ in range(rng.randrange(1, max_words)):
        parts.append(rng.choice(WORDS))
        roll = rng.random()
        if roll < 0.08:
            parts.append("\n\n")
        elif roll < 0.2:
            parts.append("\n")
        else:
            parts.append(" ")
    text = "".join(parts).strip()
    return text or "pain"


def test_whole_text_fits_one_chunk():
    cfg = ChunkConfig(chunk_size=100, overlap=10)
    chunks = split_text("short note", cfg, source_id="n")
    assert len(chunks) == 1
    assert chunks[0].text == "short note"
    assert (chunks[0].start, chunks[0].end) == (0, 10)


def test_hard_character_cut():
    cfg = ChunkConfig(chunk_size=3, overlap=0, separators=("",))
    chunks = split_text("abcdef", cfg)
    assert [c.text for c in chunks] == ["abc", "def"]
    assert [(c.start, c.end) for c in chunks] == [(0, 3), (3, 6)]


def test_separator_dropped_then_rejoined():
    cfg = ChunkConfig(chunk_size=11, overlap=0)
    chunks = split_text("aaa bbb ccc ddd", cfg)
    # pieces of the " " level merge back with single spaces
    assert [c.text for c in chunks] == ["aaa bbb ccc", "ddd"]


def test_overlap_seeds_next_chunk():
    cfg = ChunkConfig(chunk_size=7, overlap=3, separators=(" ", ""))
    chunks = split_text("aa bb cc dd", cfg)
    assert [c.text for c in chunks] == ["aa bb", "bb cc", "cc dd"]


def test_five_paragraph_document_matches_oracle():
    paragraphs = []
    rng = random.Random(404)
    for i in range(5):
        words = [rng.choice(WORDS) for _ in range(30)]
        paragraphs.append(" ".join(words))
    text = "\n\n".join(paragraphs)
    cfg = ChunkConfig(chunk_size=120, overlap=20)
    got = [(c.text, c.start, c.end) for c in split_text(text, cfg)]
    assert got == chunk_oracle(text, 120, 20, cfg.separators)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_random_texts_match_oracle(seed):
    rng = random.Random(seed)
    cfg = ChunkConfig(chunk_size=60, overlap=12)
    for _ in range(100):
        text = _random_text(rng)
        got = [(c.text, c.start, c.end) for c in split_text(text, cfg)]
        assert got == chunk_oracle(text, 60, 12, cfg.separators)


def test_random_texts_satisfy_invariants():
    rng = random.Random(9)
    cfg = ChunkConfig(chunk_size=50, overlap=10)
    for _ in range(100):
        text = _random_text(rng)
        chunks = split_text(text, cfg, source_id="doc")
        report = validate_chunks(text, chunks, cfg)
        assert report.ok, report.violations


def test_chunks_are_exact_substrings():
    rng = random.Random(10)
    cfg = ChunkConfig(chunk_size=40, overlap=8)
    for _ in range(50):
        text = _random_text(rng)
        for chunk in split_text(text, cfg):
            assert chunk.text == text[chunk.start : chunk.end]


def test_determinism():
    rng = random.Random(12)
    text = _random_text(rng, max_words=200)
    cfg = ChunkConfig(chunk_size=80, overlap=16)
    assert split_text(text, cfg) == split_text(text, cfg)


def test_empty_text_rejected():
    with pytest.raises(ValidationError):
        split_text("", ChunkConfig())


def test_config_validation():
    with pytest.raises(ConfigError):
        ChunkConfig(chunk_size=0)
    with pytest.raises(ConfigError):
        ChunkConfig(chunk_size=10, overlap=10)
    with pytest.raises(ConfigError):
        ChunkConfig(separators=("\n", " "))


def test_validate_chunks_flags_oversize():
    cfg = ChunkConfig(chunk_size=4, overlap=0)
    bad = [Chunk(text="toolong", source_id="", seq=0, start=0, end=7)]
    report = validate_chunks("toolong", bad, cfg)
    assert any("size" in v for v in report.violations)


def test_validate_chunks_flags_decreasing_spans():
    cfg = ChunkConfig(chunk_size=4, overlap=0)
    bad = [
        Chunk(text="cd", source_id="", seq=0, start=2, end=4),
        Chunk(text="ab", source_id="", seq=1, start=0, end=2),
    ]
    report = validate_chunks("abcd", bad, cfg)
    assert any("start decreased" in v for v in report.violations)


def test_validate_chunks_flags_uncovered_char():
    cfg = ChunkConfig(chunk_size=4, overlap=0)
    partial = [Chunk(text="ab", source_id="", seq=0, start=0, end=2)]
    report = validate_chunks("abcd", partial, cfg)
    assert any("not covered" in v for v in report.violations)
