"""Dialogue/note corpus loading, normalization, and tokenization.

A corpus on disk is a directory of paired text files (``<id>.dialogue.txt``
and ``<id>.note.txt``) plus a UTF-8 manifest listing ``id<TAB>split`` per
line. Splits follow the train / valid / test1 / test2 / test3 layout of
dialogue-to-note benchmarks.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .errors import CorpusLoadError, ValidationError

SPLITS = ("train", "valid", "test1", "test2", "test3")
TEST_SPLITS = ("test1", "test2", "test3")

# Maximal alphanumeric runs, or any single non-space symbol (incl. "_").
_TOKEN_RE = re.compile(r"[^\W_]+|[^\w\s]|_", re.UNICODE)

# Sentence boundary: newline, or terminal punctuation followed by whitespace.
_SENT_BOUNDARY_RE = re.compile(r"(?<=[.!?])\s+|\n+")

Tokenizer = Callable[[str], list[str]]


def normalize_text(raw: str) -> str:
    """Canonicalize raw text: NFC form, control chars dropped, spaces collapsed.

    Newlines are preserved; within each line runs of spaces/tabs collapse to a
    single space and leading/trailing whitespace is stripped. Total function,
    idempotent.
    """
    # Control removal happens before NFC so recomposition cannot reintroduce
    # sequences that a second pass would normalize differently. Tabs stay:
    # the whitespace collapse below owns them.
    kept = []
    for ch in raw:
        if ch in ("\n", "\t"):
            kept.append(ch)
        elif unicodedata.category(ch) in ("Cc", "Cf"):
            continue
        else:
            kept.append(ch)
    text = unicodedata.normalize("NFC", "".join(kept))
    lines = []
    for line in text.split("\n"):
        lines.append(" ".join(part for part in re.split(r"[ \t]+", line) if part))
    return "\n".join(lines)


def tokenize(text: str) -> list[str]:
    """Lowercased tokens: alphanumeric runs plus single punctuation marks.

    Whitespace is discarded; the empty string yields an empty list.
    """
    return _TOKEN_RE.findall(text.lower())


def split_sentences(text: str) -> list[str]:
    """Split text into sentences on newlines and on ``.!?`` + whitespace.

    Empty sentences are dropped. Used by the summary-level LCS metric and the
    extractive mock generator; deliberately simple and deterministic.
    """
    return [s.strip() for s in _SENT_BOUNDARY_RE.split(text) if s and s.strip()]


def standardize_terms(text: str, table: Mapping[str, str] | None = None) -> str:
    """Apply a whole-word substitution table to ``text``.

    With no table this is the identity; the hook exists so deployments can
    plug in a term-normalization dictionary without touching callers.
    """
    if not table:
        return text

    def _sub(m: re.Match) -> str:
        return table.get(m.group(0), m.group(0))

    pattern = re.compile(
        r"\b(?:" + "|".join(re.escape(k) for k in sorted(table, key=len, reverse=True)) + r")\b"
    )
    return pattern.sub(_sub, text)


@dataclass(frozen=True)
class DialogueRecord:
    """One encounter: speaker-tagged dialogue and its gold reference note."""

    id: str
    split: str
    dialogue_text: str
    reference_note: str


@dataclass(frozen=True)
class CorpusStats:
    counts: dict[str, int]
    mean_dialogue_tokens: float
    mean_note_tokens: float

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def test_total(self) -> int:
        return sum(self.counts[s] for s in TEST_SPLITS)


@dataclass(frozen=True)
class Corpus:
    records: tuple[DialogueRecord, ...] = field(default_factory=tuple)

    def by_split(self, split: str) -> list[DialogueRecord]:
        return [r for r in self.records if r.split == split]

    def stats(self, tokenizer: Tokenizer = tokenize) -> CorpusStats:
        counts = {s: 0 for s in SPLITS}
        dlg_tokens = 0
        note_tokens = 0
        for r in self.records:
            counts[r.split] += 1
            dlg_tokens += len(tokenizer(r.dialogue_text))
            note_tokens += len(tokenizer(r.reference_note))
        n = max(1, len(self.records))
        return CorpusStats(
            counts=counts,
            mean_dialogue_tokens=dlg_tokens / n,
            mean_note_tokens=note_tokens / n,
        )


def parse_manifest(lines: Iterable[str]) -> dict[str, str]:
    """Parse ``id<TAB>split`` manifest lines into an id -> split mapping.

    Raises ValidationError on malformed lines, unknown splits, or an id
    assigned more than once.
    """
    mapping: dict[str, str] = {}
    duplicates: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip():
            raise ValidationError(f"manifest line {lineno}: expected 'id<TAB>split', got {line!r}")
        rec_id, split = parts[0].strip(), parts[1].strip()
        if split not in SPLITS:
            raise ValidationError(
                f"manifest line {lineno}: unknown split {split!r} (expected one of {', '.join(SPLITS)})"
            )
        if rec_id in mapping:
            duplicates.append(rec_id)
        mapping[rec_id] = split
    if duplicates:
        raise ValidationError("duplicate record ids in manifest: " + ", ".join(sorted(set(duplicates))))
    return mapping


def load_corpus(root_path: str | Path, manifest: str | Path | Mapping[str, str]) -> Corpus:
    """Load every record named by the manifest from ``root_path``.

    ``manifest`` is either a path to a manifest file or an already-parsed
    id -> split mapping. Records are normalized and validated; the returned
    corpus is sorted by id so two loads of the same tree are byte-identical.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise CorpusLoadError(f"corpus root {root} does not exist or is not a directory")

    if isinstance(manifest, (str, Path)):
        manifest_path = Path(manifest)
        if not manifest_path.is_file():
            raise CorpusLoadError(f"manifest file {manifest_path} not found")
        with manifest_path.open("r", encoding="utf-8") as fh:
            mapping = parse_manifest(fh)
    else:
        mapping = dict(manifest)
        for rec_id, split in mapping.items():
            if split not in SPLITS:
                raise ValidationError(f"record {rec_id!r}: unknown split {split!r}")

    records = []
    for rec_id in sorted(mapping):
        dialogue_path = root / f"{rec_id}.dialogue.txt"
        note_path = root / f"{rec_id}.note.txt"
        if not dialogue_path.is_file():
            raise CorpusLoadError(f"missing dialogue file for record {rec_id!r}", record_id=rec_id)
        if not note_path.is_file():
            raise CorpusLoadError(f"missing note file for record {rec_id!r}", record_id=rec_id)
        dialogue = normalize_text(dialogue_path.read_text(encoding="utf-8"))
        note = normalize_text(note_path.read_text(encoding="utf-8"))
        if not dialogue.strip():
            raise ValidationError(f"record {rec_id!r}: dialogue empty after normalization")
        if not note.strip():
            raise ValidationError(f"record {rec_id!r}: reference note empty after normalization")
        records.append(
            DialogueRecord(id=rec_id, split=mapping[rec_id], dialogue_text=dialogue, reference_note=note)
        )
    return Corpus(records=tuple(records))
