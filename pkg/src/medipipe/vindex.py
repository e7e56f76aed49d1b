"""Exact cosine kNN index over unit-normalized chunk embeddings.

Brute-force scan (a single matrix-vector product) — at the scale of a note
archive, exactness is free. Readers snapshot an immutable state object, so
many queries can run concurrently with one writer and no query ever sees a
partially inserted batch.

On-disk format (all integers little-endian): magic ``MPVX``, version u16,
dimension u32, count u64, then per entry: id u64, ``dim`` float32 values,
u32-length-prefixed UTF-8 chunk text, u32-length-prefixed UTF-8 JSON
metadata; the file ends with a CRC32 of everything before it.
"""

from __future__ import annotations

import json
import struct
import threading
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .errors import DimensionError, FormatError, ValidationError

MAGIC = b"MPVX"
FORMAT_VERSION = 1
NORM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class IndexEntry:
    entry_id: int
    vector: np.ndarray
    chunk_text: str
    metadata: dict


@dataclass(frozen=True)
class SearchHit:
    entry_id: int
    score: float
    chunk_text: str
    metadata: dict


@dataclass(frozen=True)
class _State:
    entries: tuple[IndexEntry, ...]
    matrix: np.ndarray | None  # (n, d) float64, rows unit-norm
    dim: int | None


def _check_vector(vec, dim: int | None, normalize: bool) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ValidationError("vector must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector contains non-finite values")
    if dim is not None and arr.size != dim:
        raise DimensionError(f"vector dimension {arr.size} does not match index dimension {dim}")
    norm = float(np.linalg.norm(arr))
    if normalize:
        if norm == 0.0:
            raise ValidationError("cannot normalize a zero vector")
        return arr / norm
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise ValidationError(f"vector norm {norm} is not 1 within {NORM_TOLERANCE}; pass normalize=True to rescale")
    return arr


class VectorIndex:
    """Append-only exact-kNN store; deletion means rebuilding."""

    def __init__(self):
        self._state = _State(entries=(), matrix=None, dim=None)
        self._write_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._state.entries)

    @property
    def dim(self) -> int | None:
        return self._state.dim

    @property
    def entries(self) -> tuple[IndexEntry, ...]:
        return self._state.entries

    def upsert(self, vector, chunk_text: str, metadata: dict | None = None, *, normalize: bool = False) -> int:
        return self.upsert_many([(vector, chunk_text, metadata)], normalize=normalize)[0]

    def upsert_many(
        self,
        items: Iterable[tuple],
        *,
        normalize: bool = False,
    ) -> list[int]:
        """Insert a batch atomically: readers see none or all of it.

        Each item is ``(vector, chunk_text, metadata)``. Returns the assigned
        monotonically increasing entry ids.
        """
        items = list(items)
        if not items:
            return []
        with self._write_lock:
            state = self._state
            dim = state.dim
            new_entries = []
            rows = []
            next_id = len(state.entries)
            for vector, chunk_text, metadata in items:
                arr = _check_vector(vector, dim, normalize)
                if dim is None:
                    dim = arr.size
                new_entries.append(
                    IndexEntry(entry_id=next_id, vector=arr, chunk_text=chunk_text, metadata=dict(metadata or {}))
                )
                rows.append(arr)
                next_id += 1
            block = np.stack(rows)
            matrix = block if state.matrix is None else np.vstack([state.matrix, block])
            self._state = _State(entries=state.entries + tuple(new_entries), matrix=matrix, dim=dim)
            return [e.entry_id for e in new_entries]

    def knn(
        self,
        query,
        k: int,
        metadata_filter: Callable[[dict], bool] | None = None,
    ) -> list[SearchHit]:
        """Top-k entries by cosine score (dot product of unit vectors),
        ties broken by lower entry id. Fewer than k hits are returned when
        the (filtered) index is smaller.
        """
        if k <= 0:
            raise ValidationError(f"k must be positive, got {k}")
        state = self._state
        if not state.entries:
            return []
        q = _check_vector(query, state.dim, normalize=False)
        scores = state.matrix @ q
        if metadata_filter is None:
            candidate_ids = np.arange(len(state.entries))
        else:
            candidate_ids = np.array(
                [i for i, e in enumerate(state.entries) if metadata_filter(e.metadata)], dtype=np.int64
            )
            if candidate_ids.size == 0:
                return []
        cand_scores = scores[candidate_ids]
        # lexsort keys are last-key-primary: order by -score, then id
        order = np.lexsort((candidate_ids, -cand_scores))[:k]
        hits = []
        for idx in order:
            entry = state.entries[int(candidate_ids[idx])]
            hits.append(
                SearchHit(
                    entry_id=entry.entry_id,
                    score=float(cand_scores[idx]),
                    chunk_text=entry.chunk_text,
                    metadata=dict(entry.metadata),
                )
            )
        return hits

    # --- persistence ---------------------------------------------------------

    def persist(self, path: str | Path) -> None:
        """Write a snapshot; vectors are stored as float32 per the format."""
        state = self._state
        buf = bytearray()
        buf += MAGIC
        buf += struct.pack("<HIQ", FORMAT_VERSION, state.dim or 0, len(state.entries))
        for entry in state.entries:
            buf += struct.pack("<Q", entry.entry_id)
            buf += np.asarray(entry.vector, dtype="<f4").tobytes()
            text_bytes = entry.chunk_text.encode("utf-8")
            buf += struct.pack("<I", len(text_bytes)) + text_bytes
            meta_bytes = json.dumps(entry.metadata, sort_keys=True, separators=(",", ":")).encode("utf-8")
            buf += struct.pack("<I", len(meta_bytes)) + meta_bytes
        buf += struct.pack("<I", zlib.crc32(bytes(buf)))
        Path(path).write_bytes(bytes(buf))

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        """Read a persisted index; float32 vectors are renormalized in
        float64 so the unit-norm invariant holds after the lossy roundtrip.
        """
        data = Path(path).read_bytes()
        if len(data) < len(MAGIC) + 14 + 4:
            raise FormatError("file too short for index header", byte_offset=len(data))
        stored_crc = struct.unpack("<I", data[-4:])[0]
        actual_crc = zlib.crc32(data[:-4])
        if stored_crc != actual_crc:
            raise FormatError("CRC mismatch: file corrupt", byte_offset=len(data) - 4)
        if data[: len(MAGIC)] != MAGIC:
            raise FormatError("bad magic bytes", byte_offset=0)
        offset = len(MAGIC)
        version, dim, count = struct.unpack_from("<HIQ", data, offset)
        offset += 14
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported format version {version}", byte_offset=len(MAGIC))
        payload_end = len(data) - 4
        index = cls()
        items = []
        entry_ids = []
        for _ in range(count):
            if offset + 8 + dim * 4 + 4 > payload_end:
                raise FormatError("truncated entry", byte_offset=offset)
            (entry_id,) = struct.unpack_from("<Q", data, offset)
            offset += 8
            vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).astype(np.float64)
            offset += dim * 4
            (text_len,) = struct.unpack_from("<I", data, offset)
            offset += 4
            if offset + text_len + 4 > payload_end:
                raise FormatError("truncated chunk text", byte_offset=offset)
            chunk_text = data[offset : offset + text_len].decode("utf-8")
            offset += text_len
            (meta_len,) = struct.unpack_from("<I", data, offset)
            offset += 4
            if offset + meta_len > payload_end:
                raise FormatError("truncated metadata", byte_offset=offset)
            metadata = json.loads(data[offset : offset + meta_len].decode("utf-8"))
            offset += meta_len
            items.append((vec, chunk_text, metadata))
            entry_ids.append(entry_id)
        if offset != payload_end:
            raise FormatError(f"{payload_end - offset} trailing bytes after last entry", byte_offset=offset)
        if entry_ids != list(range(len(entry_ids))):
            raise FormatError("entry ids are not the contiguous sequence 0..n-1", byte_offset=len(MAGIC))
        if items:
            index.upsert_many(items, normalize=True)
        elif dim:
            index._state = _State(entries=(), matrix=None, dim=dim)
        return index
