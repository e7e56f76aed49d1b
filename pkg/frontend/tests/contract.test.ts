import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { NOTE_SECTIONS } from "../src/types.js";

// Every value the console displays must be traceable to a field of these
// recorded service responses; this test pins the shapes the views consume.
const recorded = JSON.parse(
  readFileSync(new URL("../fixtures/recorded-responses.json", import.meta.url), "utf-8"),
);

describe("recorded service contract", () => {
  it("create_session carries a nonempty session_id", () => {
    expect(typeof recorded.create_session.session_id).toBe("string");
    expect(recorded.create_session.session_id.length).toBeGreaterThan(0);
  });

  it("finalize carries note_id plus a note with the six sections", () => {
    const { note_id, note } = recorded.finalize;
    expect(note_id).toBe(note.note_id);
    for (const { key } of NOTE_SECTIONS) {
      expect(typeof note[key]).toBe("string");
    }
    expect(note.source_session).toBeTypeOf("string");
  });

  it("query responses carry answer, citations, context_used", () => {
    for (const name of ["query_back_pain", "query_empty_index"] as const) {
      const body = recorded[name];
      expect(typeof body.answer).toBe("string");
      expect(Array.isArray(body.citations)).toBe(true);
      expect(typeof body.context_used).toBe("boolean");
    }
  });

  it("back-pain query cites the finalized note", () => {
    const body = recorded.query_back_pain;
    expect(body.context_used).toBe(true);
    expect(body.citations.length).toBeGreaterThanOrEqual(1);
    for (const citation of body.citations) {
      expect(typeof citation.entry_id).toBe("number");
      expect(typeof citation.score).toBe("number");
      expect(citation.source_id).toBe(recorded.finalize.note_id);
    }
  });

  it("empty-index query reports no context", () => {
    expect(recorded.query_empty_index.context_used).toBe(false);
    expect(recorded.query_empty_index.citations).toEqual([]);
  });

  it("errors share the {error: {code, message}} envelope", () => {
    for (const name of ["error_finalize_twice", "error_finalize_empty", "error_unknown_note"] as const) {
      const body = recorded[name];
      expect(typeof body.error.code).toBe("string");
      expect(typeof body.error.message).toBe("string");
    }
  });

  it("health reports status ok and an entry count", () => {
    expect(recorded.health.status).toBe("ok");
    expect(recorded.health.index_entries).toBeGreaterThanOrEqual(1);
  });
});
