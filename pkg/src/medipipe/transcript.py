"""Diarized conversation sessions and speaker-tagged dialogue rendering.

A session accumulates speaker-labeled, timestamped segments (live capture
appends them one by one; recorded audio arrives as a batch from the ASR
provider) and renders the canonical ``[Doctor]: ...`` / ``[Patient]: ...``
dialogue text the note generator consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

from .corpus import normalize_text
from .errors import EmptySessionError, OrderingError, StateError, ValidationError

# Diarizer timestamps jitter; appends this far behind the previous segment
# are still accepted.
ORDER_TOLERANCE_S = 0.5


@dataclass(frozen=True)
class Speaker:
    role: str  # "doctor" | "patient" | "other"
    label: str = ""

    DOCTOR: ClassVar["Speaker"]
    PATIENT: ClassVar["Speaker"]

    def __post_init__(self):
        if self.role not in ("doctor", "patient", "other"):
            raise ValidationError(f"unknown speaker role {self.role!r}")
        if self.role == "other" and not self.label:
            raise ValidationError("speaker role 'other' requires a label")

    def display(self) -> str:
        if self.role == "doctor":
            return "Doctor"
        if self.role == "patient":
            return "Patient"
        return self.label

    def serialize(self) -> str:
        if self.role == "other":
            return f"other:{self.label}"
        return self.role

    @classmethod
    def parse(cls, value: str) -> "Speaker":
        value = value.strip()
        if value.lower() in ("doctor", "patient"):
            return cls(role=value.lower())
        if value.lower().startswith("other:"):
            return cls(role="other", label=value[len("other:") :])
        raise ValidationError(f"unknown speaker {value!r} (expected doctor, patient, or other:<label>)")


Speaker.DOCTOR = Speaker(role="doctor")
Speaker.PATIENT = Speaker(role="patient")


@dataclass(frozen=True)
class Segment:
    speaker: Speaker
    start_s: float
    end_s: float
    text: str

    def __post_init__(self):
        if self.start_s < 0:
            raise ValidationError(f"start_s must be >= 0, got {self.start_s}")
        if self.end_s < self.start_s:
            raise ValidationError(f"end_s {self.end_s} precedes start_s {self.start_s}")
        if not normalize_text(self.text).strip():
            raise ValidationError("segment text empty after normalization")


@dataclass
class TranscriptSession:
    """Single-writer capture state; reads of a finalized session are safe
    to share. The service layer serializes appends per session.
    """

    session_id: str
    segments: list[Segment] = field(default_factory=list)
    finalized: bool = False

    @property
    def state(self) -> str:
        return "finalized" if self.finalized else "open"

    def append_segment(self, seg: Segment) -> "TranscriptSession":
        if self.finalized:
            raise StateError(f"session {self.session_id} is finalized; no further segments accepted")
        if self.segments and seg.start_s < self.segments[-1].start_s - ORDER_TOLERANCE_S:
            raise OrderingError(
                f"segment start {seg.start_s:.3f}s precedes previous start "
                f"{self.segments[-1].start_s:.3f}s beyond the {ORDER_TOLERANCE_S}s tolerance"
            )
        self.segments.append(seg)
        return self

    def finalize(self) -> "TranscriptSession":
        if self.finalized:
            raise StateError(f"session {self.session_id} is already finalized")
        self.finalized = True
        return self

    def render_dialogue(self) -> str:
        """One ``[Speaker]: text`` line per maximal same-speaker run,
        consecutive segment texts joined with a single space.
        """
        if not self.segments:
            raise EmptySessionError(f"session {self.session_id} has no segments to render")
        lines: list[str] = []
        run_speaker: Speaker | None = None
        run_texts: list[str] = []
        for seg in self.segments:
            if seg.speaker == run_speaker:
                run_texts.append(seg.text)
            else:
                if run_speaker is not None:
                    lines.append(f"[{run_speaker.display()}]: {' '.join(run_texts)}")
                run_speaker = seg.speaker
                run_texts = [seg.text]
        lines.append(f"[{run_speaker.display()}]: {' '.join(run_texts)}")
        return "\n".join(lines)

    def to_tsv(self) -> str:
        """Export segments as ``start<TAB>end<TAB>speaker<TAB>text`` lines."""
        rows = [
            f"{seg.start_s:g}\t{seg.end_s:g}\t{seg.speaker.serialize()}\t{seg.text}"
            for seg in self.segments
        ]
        return "\n".join(rows) + ("\n" if rows else "")


def session_from_tsv(session_id: str, tsv: str) -> TranscriptSession:
    """Rebuild a session from its TSV export. The session stays open."""
    session = TranscriptSession(session_id=session_id)
    for lineno, line in enumerate(tsv.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t", 3)
        if len(parts) != 4:
            raise ValidationError(f"segment line {lineno}: expected 4 tab-separated fields")
        start, end, speaker, text = parts
        session.append_segment(
            Segment(speaker=Speaker.parse(speaker), start_s=float(start), end_s=float(end), text=text)
        )
    return session
