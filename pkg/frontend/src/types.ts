// Response shapes of the medipipe service HTTP contract. The console holds
// no business logic: everything it displays is one of these fields.

export interface SessionCreated {
  session_id: string;
}

export interface SegmentInput {
  start: number;
  end: number;
  speaker: string; // "doctor" | "patient" | "other:<label>"
  text: string;
}

export interface NoteJson {
  note_id: string;
  chief_complaint: string;
  history_of_present_illness: string;
  review_of_systems: string;
  physical_examination: string;
  results: string;
  assessment_and_plan: string;
  source_session: string | null;
}

export interface FinalizeResponse {
  note_id: string;
  note: NoteJson;
}

export interface Citation {
  entry_id: number;
  score: number;
  source_id: string;
}

export interface QueryResponse {
  answer: string;
  citations: Citation[];
  context_used: boolean;
}

export interface HealthResponse {
  status: string;
  index_entries: number;
}

export interface ErrorBody {
  error: {
    code: string;
    message: string;
    stage?: string;
  };
}

// Console-side view state (mirrors server state, never mutated locally
// without a server acknowledgment).

export interface SessionView {
  sessionId: string;
  segments: SegmentInput[];
  state: "open" | "finalized";
  note: NoteJson | null;
}

export interface ChatTurn {
  query: string;
  answer: string;
  citations: Citation[];
  contextUsed: boolean;
}

export const NOTE_SECTIONS: Array<{ key: keyof NoteJson; header: string }> = [
  { key: "chief_complaint", header: "CHIEF COMPLAINT" },
  { key: "history_of_present_illness", header: "HISTORY OF PRESENT ILLNESS" },
  { key: "review_of_systems", header: "REVIEW OF SYSTEMS" },
  { key: "physical_examination", header: "PHYSICAL EXAMINATION" },
  { key: "results", header: "RESULTS" },
  { key: "assessment_and_plan", header: "ASSESSMENT AND PLAN" },
];
