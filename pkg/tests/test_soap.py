from __future__ import annotations

import json
import random

import pytest

from conftest import GOLD_NOTE_TEXT
from medipipe.errors import ParseError, ValidationError
from medipipe.soap import (
    DEFAULT_HEADER_MAP,
    LOGICAL_SECTIONS,
    SECTION_HEADERS,
    SECTION_KEYS,
    InstructionTemplate,
    SoapNote,
    build_instruction_prompt,
    export_note,
    make_note,
    note_from_json_dict,
    parse_note_text,
    parse_note_text_with_report,
    render_note,
)

SAFE_WORDS = ["lumbar", "strain", "ibuprofen", "follow", "up", "mild", "tenderness", "gait", "normal"]


def _random_note(rng: random.Random, note_id: str = "n") -> SoapNote:
    sections = {}
    for key in SECTION_KEYS:
        if rng.random() < 0.3:
            sections[key] = ""
        else:
            sections[key] = " ".join(rng.choice(SAFE_WORDS) for _ in range(rng.randrange(1, 12)))
    if not any(sections.values()):
        sections["chief_complaint"] = "pain"
    return SoapNote(note_id=note_id, sections=sections)


# --- prompt building ------------------------------------------------------------


def test_prompt_layout():
    prompt = build_instruction_prompt("[Doctor]: Hi.")
    tmpl = InstructionTemplate()
    assert prompt == f"{tmpl.instruction_text}\n\nThe conversation:\n[Doctor]: Hi.\nThe clinic note:"


def test_prompt_requires_dialogue():
    with pytest.raises(ValidationError):
        build_instruction_prompt("")


def test_prompt_deterministic():
    assert build_instruction_prompt("[Doctor]: x") == build_instruction_prompt("[Doctor]: x")


def test_header_map_totality():
    assert set(DEFAULT_HEADER_MAP.keys()) == set(SECTION_HEADERS)
    assert set(DEFAULT_HEADER_MAP.values()) == set(LOGICAL_SECTIONS)
    subjective = [h for h, s in DEFAULT_HEADER_MAP.items() if s == "SUBJECTIVE"]
    assert sorted(subjective) == sorted(
        ["CHIEF COMPLAINT", "HISTORY OF PRESENT ILLNESS", "REVIEW OF SYSTEMS"]
    )


def test_template_rejects_partial_header_map():
    with pytest.raises(ValidationError):
        InstructionTemplate(header_map={"CHIEF COMPLAINT": "SUBJECTIVE"})


# --- parsing ---------------------------------------------------------------------


def test_parse_gold_note_text():
    note = parse_note_text(GOLD_NOTE_TEXT, note_id="gold")
    assert note.section("CHIEF COMPLAINT") == "Back pain."
    assert note.section("HISTORY OF PRESENT ILLNESS").startswith("Bryan Smith is a 55-year-old male")
    assert note.section("REVIEW OF SYSTEMS") == ""
    assert note.section("PHYSICAL EXAMINATION") == ""
    assert note.section("RESULTS") == ""
    assert note.section("ASSESSMENT AND PLAN") == ""


def test_parse_reports_missing_headers():
    parsed = parse_note_text_with_report("CHIEF COMPLAINT Back pain.")
    assert "RESULTS" in parsed.missing_headers
    assert "CHIEF COMPLAINT" not in parsed.missing_headers


def test_parse_flags_unknown_header_candidates_as_body():
    parsed = parse_note_text_with_report("CHIEF COMPLAINT pain\nFAMILY HISTORY\nnone relevant")
    assert parsed.unknown_header_candidates == ("FAMILY HISTORY",)
    # stays body text of the current section, not a new section
    assert "FAMILY HISTORY" in parsed.note.section("CHIEF COMPLAINT")


def test_parse_no_headers_is_parse_error():
    with pytest.raises(ParseError) as excinfo:
        parse_note_text("no headers here")
    assert excinfo.value.raw_text == "no headers here"


def test_parse_preamble_prepends_to_chief_complaint():
    note = parse_note_text("Seen today.\nCHIEF COMPLAINT Back pain.")
    assert note.section("CHIEF COMPLAINT") == "Seen today.\nBack pain."


def test_parse_headers_any_order():
    text = "ASSESSMENT AND PLAN rest\nCHIEF COMPLAINT pain"
    note = parse_note_text(text)
    assert note.section("ASSESSMENT AND PLAN") == "rest"
    assert note.section("CHIEF COMPLAINT") == "pain"


def test_parse_is_case_insensitive():
    note = parse_note_text("chief complaint pain\nassessment and plan rest")
    assert note.section("CHIEF COMPLAINT") == "pain"


def test_parse_header_requires_word_boundary():
    # "results" buried inside a word must not open a section
    note = parse_note_text("CHIEF COMPLAINT xresults pending today")
    assert note.section("CHIEF COMPLAINT") == "xresults pending today"
    assert note.section("RESULTS") == ""


def test_parse_conserves_text_modulo_whitespace():
    rng = random.Random(12)
    for _ in range(50):
        note = _random_note(rng)
        rendered = render_note(note)
        reparsed = parse_note_text(rendered, note_id=note.note_id)
        def squash(s: str) -> str:
            return "".join(s.split())
        rebuilt = "".join(
            header.replace(" ", "") + squash(reparsed.section(header)) for header in SECTION_HEADERS
        )
        assert rebuilt == squash(rendered)


# --- rendering -------------------------------------------------------------------


def test_render_contains_all_headers_in_order():
    note = make_note("n", chief_complaint="Back pain.")
    rendered = render_note(note)
    positions = [rendered.index(h) for h in SECTION_HEADERS]
    assert positions == sorted(positions)
    assert "CHIEF COMPLAINT\nBack pain." in rendered


def test_parse_render_roundtrip_random_notes():
    rng = random.Random(7)
    for _ in range(100):
        note = _random_note(rng)
        reparsed = parse_note_text(render_note(note), note_id=note.note_id)
        assert reparsed == note


def test_parse_render_parse_fixpoint():
    rng = random.Random(8)
    for _ in range(100):
        note = _random_note(rng)
        once = parse_note_text(render_note(note), note_id=note.note_id)
        twice = parse_note_text(render_note(once), note_id=note.note_id)
        assert once == twice


def test_render_injective_on_distinct_sections():
    rng = random.Random(9)
    for _ in range(50):
        a, b = _random_note(rng, "x"), _random_note(rng, "x")
        if a.sections != b.sections:
            assert render_note(a) != render_note(b)


# --- note invariants ----------------------------------------------------------------


def test_note_requires_all_six_keys():
    with pytest.raises(ValidationError):
        SoapNote(note_id="n", sections={"chief_complaint": "x"})


def test_note_requires_some_content():
    with pytest.raises(ValidationError):
        make_note("n")


def test_make_note_rejects_unknown_section():
    with pytest.raises(ValidationError):
        make_note("n", bogus_section="x")


# --- export -----------------------------------------------------------------------


def test_export_text_equals_render_bytes():
    note = make_note("n", chief_complaint="Back pain.")
    assert export_note(note, "text") == render_note(note).encode("utf-8")


def test_export_json_schema():
    note = make_note("n", source_session="s1", chief_complaint="Back pain.")
    payload = json.loads(export_note(note, "json"))
    assert len(payload) == 8
    assert payload["note_id"] == "n"
    assert payload["chief_complaint"] == "Back pain."
    assert payload["source_session"] == "s1"
    assert set(payload.keys()) == {"note_id", "source_session", *SECTION_KEYS}


def test_export_json_roundtrip():
    rng = random.Random(10)
    for _ in range(20):
        note = _random_note(rng)
        payload = json.loads(export_note(note, "json"))
        assert note_from_json_dict(payload) == note


def test_export_unknown_format():
    with pytest.raises(ValidationError):
        export_note(make_note("n", results="ok"), "pdf")
