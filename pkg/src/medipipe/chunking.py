"""Recursive character splitting into bounded, overlapping chunks.

The splitter works level by level through an ordered separator list:
split on the current separator (dropping it), recurse into any piece that
still exceeds the size bound, and greedily re-merge conforming pieces
(re-inserting the level separator) into chunks of at most ``chunk_size``
characters. When a chunk closes, trailing pieces of combined length at most
``overlap`` seed the next chunk. Empty pieces are kept in the merge stream,
which makes every chunk an exact substring of the source at its char span.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, ValidationError


@dataclass(frozen=True)
class ChunkConfig:
    chunk_size: int = 1000
    overlap: int = 150
    separators: tuple[str, ...] = ("\n\n", "\n", " ", "")

    def __post_init__(self):
        if self.chunk_size <= 0:
            raise ConfigError(f"chunk_size must be positive, got {self.chunk_size}")
        if not 0 <= self.overlap < self.chunk_size:
            raise ConfigError(f"overlap must satisfy 0 <= overlap < chunk_size, got {self.overlap}")
        if not self.separators or self.separators[-1] != "":
            raise ConfigError('separators must end with "" so splitting always terminates')


@dataclass(frozen=True)
class Chunk:
    text: str
    source_id: str
    seq: int
    start: int
    end: int


@dataclass
class _Piece:
    text: str
    start: int


def _split_on(text: str, base: int, sep: str) -> list[_Piece]:
    if sep == "":
        return [_Piece(ch, base + i) for i, ch in enumerate(text)]
    pieces = []
    offset = 0
    for part in text.split(sep):
        pieces.append(_Piece(part, base + offset))
        offset += len(part) + len(sep)
    return pieces


class _Splitter:
    def __init__(self, source: str, cfg: ChunkConfig, source_id: str):
        self.source = source
        self.cfg = cfg
        self.source_id = source_id
        self.chunks: list[Chunk] = []

    def run(self) -> list[Chunk]:
        self._split(self.source, 0, self.cfg.separators)
        return self.chunks

    def _split(self, text: str, base: int, seps: tuple[str, ...]) -> None:
        sep, rest = seps[0], seps[1:]
        buf: list[_Piece] = []
        for piece in _split_on(text, base, sep):
            if len(piece.text) <= self.cfg.chunk_size:
                buf.append(piece)
            else:
                self._merge(buf, sep)
                buf = []
                self._split(piece.text, piece.start, rest)
        self._merge(buf, sep)

    def _emit(self, pieces: list[_Piece], sep: str) -> None:
        text = sep.join(p.text for p in pieces)
        if not text:
            return
        start = pieces[0].start
        end = pieces[-1].start + len(pieces[-1].text)
        self.chunks.append(Chunk(text=text, source_id=self.source_id, seq=len(self.chunks), start=start, end=end))

    def _merge(self, pieces: list[_Piece], sep: str) -> None:
        size, overlap, sep_len = self.cfg.chunk_size, self.cfg.overlap, len(sep)
        cur: list[_Piece] = []
        cur_len = 0  # joined length of cur including internal separators
        for piece in pieces:
            p_len = len(piece.text)
            if cur and cur_len + sep_len + p_len > size:
                self._emit(cur, sep)
                # retain the longest trailing run that stays within the
                # overlap budget and still leaves room for the new piece
                while cur and (cur_len > overlap or cur_len + sep_len + p_len > size):
                    dropped = cur.pop(0)
                    cur_len -= len(dropped.text) + (sep_len if cur else 0)
            cur_len += p_len + (sep_len if cur else 0)
            cur.append(piece)
        if cur:
            self._emit(cur, sep)


def split_text(text: str, cfg: ChunkConfig, source_id: str = "") -> list[Chunk]:
    """Split ``text`` into chunks per ``cfg``. Deterministic; spans index
    into the original text and every chunk equals ``text[start:end]``.
    """
    if not text:
        raise ValidationError("cannot split empty text")
    return _Splitter(text, cfg, source_id).run()


@dataclass
class ChunkReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_chunks(text: str, chunks: list[Chunk], cfg: ChunkConfig) -> ChunkReport:
    """Diagnostic check of the chunk invariants against the source text.

    Verifies the size bound, span monotonicity, substring fidelity, coverage
    of non-separator characters, and the pairwise overlap bound. Returns a
    report listing violations (empty when all hold).
    """
    report = ChunkReport()
    sep_chars = set("".join(cfg.separators))
    covered = [False] * len(text)
    prev: Chunk | None = None
    for chunk in chunks:
        if not 0 < len(chunk.text) <= cfg.chunk_size:
            report.violations.append(f"chunk {chunk.seq}: size {len(chunk.text)} outside (0, {cfg.chunk_size}]")
        if not 0 <= chunk.start <= chunk.end <= len(text):
            report.violations.append(f"chunk {chunk.seq}: span [{chunk.start}, {chunk.end}) out of bounds")
            continue
        if text[chunk.start : chunk.end] != chunk.text:
            report.violations.append(f"chunk {chunk.seq}: text does not match source span")
        for i in range(chunk.start, chunk.end):
            covered[i] = True
        if prev is not None:
            if chunk.seq <= prev.seq:
                report.violations.append(f"chunk {chunk.seq}: seq not strictly increasing")
            if chunk.start < prev.start:
                report.violations.append(f"chunk {chunk.seq}: span start decreased")
            overlap_len = max(0, prev.end - chunk.start)
            if overlap_len > cfg.overlap:
                report.violations.append(
                    f"chunk {chunk.seq}: overlap {overlap_len} exceeds budget {cfg.overlap}"
                )
        prev = chunk
    for i, is_covered in enumerate(covered):
        if not is_covered and text[i] not in sep_chars:
            report.violations.append(f"char {i} ({text[i]!r}) not covered by any chunk")
    return report
