"""SOAP note model: instruction prompts, section parsing, and rendering.

A note always carries the same six sections in a fixed order, from chief
complaint through assessment and plan; parsing tolerates headers in any
order and reports the ones it never saw.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError

SECTION_HEADERS = (
    "CHIEF COMPLAINT",
    "HISTORY OF PRESENT ILLNESS",
    "REVIEW OF SYSTEMS",
    "PHYSICAL EXAMINATION",
    "RESULTS",
    "ASSESSMENT AND PLAN",
)

SECTION_KEYS = (
    "chief_complaint",
    "history_of_present_illness",
    "review_of_systems",
    "physical_examination",
    "results",
    "assessment_and_plan",
)

_HEADER_TO_KEY = dict(zip(SECTION_HEADERS, SECTION_KEYS))

LOGICAL_SECTIONS = ("SUBJECTIVE", "OBJECTIVE_EXAM", "OBJECTIVE_RESULTS", "ASSESSMENT_AND_PLAN")

# The three narrative history sections are subjective; exam and results are
# the two objective halves.
DEFAULT_HEADER_MAP = {
    "CHIEF COMPLAINT": "SUBJECTIVE",
    "HISTORY OF PRESENT ILLNESS": "SUBJECTIVE",
    "REVIEW OF SYSTEMS": "SUBJECTIVE",
    "PHYSICAL EXAMINATION": "OBJECTIVE_EXAM",
    "RESULTS": "OBJECTIVE_RESULTS",
    "ASSESSMENT AND PLAN": "ASSESSMENT_AND_PLAN",
}

DEFAULT_INSTRUCTION = (
    "Summarize the medical dialogue into a SOAP note divided into four continuous sections: "
    "SUBJECTIVE, OBJECTIVE EXAM, OBJECTIVE RESULTS, and ASSESSMENT AND PLAN. The SUBJECTIVE "
    "section should contain information from the verbal examination; use the six standard "
    "headers CHIEF COMPLAINT, HISTORY OF PRESENT ILLNESS, REVIEW OF SYSTEMS, PHYSICAL "
    "EXAMINATION, RESULTS, and ASSESSMENT AND PLAN."
)

# A header counts when it sits at a token boundary: start of line or after
# whitespace, and before whitespace or end of text.
_HEADER_RE = re.compile(
    r"(?:(?<=\s)|^)(" + "|".join(re.escape(h) for h in SECTION_HEADERS) + r")(?=\s|$)",
    re.IGNORECASE | re.MULTILINE,
)


@dataclass(frozen=True)
class InstructionTemplate:
    instruction_text: str = DEFAULT_INSTRUCTION
    template_id: str = "soap-v1"
    header_map: dict = field(default_factory=lambda: dict(DEFAULT_HEADER_MAP))

    def __post_init__(self):
        missing = [h for h in SECTION_HEADERS if h not in self.header_map]
        if missing:
            raise ValidationError("header_map missing headers: " + ", ".join(missing))
        bad = [h for h, sect in self.header_map.items() if sect not in LOGICAL_SECTIONS]
        if bad:
            raise ValidationError("header_map targets unknown logical sections for: " + ", ".join(bad))


@dataclass(frozen=True)
class SoapNote:
    note_id: str
    sections: dict
    source_session: str | None = None

    def __post_init__(self):
        if set(self.sections.keys()) != set(SECTION_KEYS):
            raise ValidationError("a note must carry exactly the six canonical sections")
        if not any(self.sections[k].strip() for k in SECTION_KEYS):
            raise ValidationError("a valid note needs at least one nonempty section")

    def section(self, header: str) -> str:
        return self.sections[_HEADER_TO_KEY[header]]


def make_note(note_id: str, source_session: str | None = None, **section_texts: str) -> SoapNote:
    """Build a note from keyword sections; unspecified sections are empty."""
    unknown = set(section_texts) - set(SECTION_KEYS)
    if unknown:
        raise ValidationError("unknown sections: " + ", ".join(sorted(unknown)))
    sections = {key: section_texts.get(key, "") for key in SECTION_KEYS}
    return SoapNote(note_id=note_id, sections=sections, source_session=source_session)


def build_instruction_prompt(dialogue: str, tmpl: InstructionTemplate | None = None) -> str:
    """Assemble the generation prompt: instruction, the conversation block,
    and the completion cue. Byte-deterministic for identical inputs.
    """
    if not dialogue:
        raise ValidationError("dialogue must be nonempty")
    tmpl = tmpl or InstructionTemplate()
    return f"{tmpl.instruction_text}\n\nThe conversation:\n{dialogue}\nThe clinic note:"


@dataclass(frozen=True)
class ParsedNote:
    note: SoapNote
    missing_headers: tuple[str, ...]
    unknown_header_candidates: tuple[str, ...] = ()


# An all-caps line that is not one of the six headers; kept as body text but
# surfaced in diagnostics so model drift is visible.
_CAPS_LINE_RE = re.compile(r"^[A-Z][A-Z /&-]{2,}$")


def parse_note_text(text: str, note_id: str = "", source_session: str | None = None) -> SoapNote:
    """Parse generator output into the six sections.

    Headers are matched case-insensitively at line starts or inline at word
    boundaries; the text between two headers becomes the first header's
    body. Text before the first header is prepended to the chief complaint;
    repeated headers concatenate. Raises ParseError when no known header
    occurs at all.
    """
    return parse_note_text_with_report(text, note_id, source_session).note


def parse_note_text_with_report(
    text: str, note_id: str = "", source_session: str | None = None
) -> ParsedNote:
    if not text:
        raise ParseError("cannot parse empty note text", raw_text=text)
    matches = list(_HEADER_RE.finditer(text))
    if not matches:
        raise ParseError("no known section header found in note text", raw_text=text)

    bodies: dict[str, list[str]] = {key: [] for key in SECTION_KEYS}
    preamble = text[: matches[0].start()].strip()
    if preamble:
        bodies["chief_complaint"].append(preamble)
    seen: set[str] = set()
    for i, m in enumerate(matches):
        header = m.group(1).upper()
        seen.add(header)
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        body = text[m.end() : end].strip()
        if body:
            bodies[_HEADER_TO_KEY[header]].append(body)
    sections = {key: "\n".join(parts) for key, parts in bodies.items()}
    note = SoapNote(note_id=note_id, sections=sections, source_session=source_session)
    missing = tuple(h for h in SECTION_HEADERS if h not in seen)
    unknown = tuple(
        line.strip()
        for line in text.split("\n")
        if _CAPS_LINE_RE.match(line.strip()) and line.strip().upper() not in SECTION_HEADERS
    )
    return ParsedNote(note=note, missing_headers=missing, unknown_header_candidates=unknown)


def render_note(note: SoapNote) -> str:
    """Canonical text form: each header upper-case on its own line, body
    below it, one blank line between sections; empty sections keep their
    header.
    """
    parts = []
    for header in SECTION_HEADERS:
        body = note.section(header)
        parts.append(f"{header}\n{body}" if body else header)
    return "\n\n".join(parts)


def export_note(note: SoapNote, format: str = "text") -> bytes:
    """Serialize to UTF-8 ``text`` (the canonical rendering) or ``json``
    (note_id, the six section fields, source_session).
    """
    if format == "text":
        return render_note(note).encode("utf-8")
    if format == "json":
        return json.dumps(note_to_json_dict(note), ensure_ascii=False, indent=2).encode("utf-8")
    raise ValidationError(f"unknown export format {format!r} (expected text or json)")


def note_to_json_dict(note: SoapNote) -> dict:
    payload = {"note_id": note.note_id}
    payload.update({key: note.sections[key] for key in SECTION_KEYS})
    payload["source_session"] = note.source_session
    return payload


def note_from_json_dict(payload: dict) -> SoapNote:
    sections = {key: payload.get(key, "") for key in SECTION_KEYS}
    return SoapNote(
        note_id=payload.get("note_id", ""),
        sections=sections,
        source_session=payload.get("source_session"),
    )
