import { ApiError, ServiceClient } from "./api.js";
import { DEMO_SEGMENTS } from "./fixture.js";
import type { ChatTurn, SegmentInput, SessionView } from "./types.js";
import { renderChatTurn, renderErrorBanner, renderSessionView } from "./views.js";

function baseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return (fromQuery ?? (window as { MEDIPIPE_API?: string }).MEDIPIPE_API ?? "http://127.0.0.1:8077").replace(
    /\/$/,
    "",
  );
}

const client = new ServiceClient(baseUrl());

const state: { session: SessionView | null; turns: ChatTurn[] } = {
  session: null,
  turns: [],
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function showError(target: HTMLElement, err: unknown): void {
  if (err instanceof ApiError) {
    target.innerHTML = renderErrorBanner(err.message, err.stage);
  } else {
    target.innerHTML = renderErrorBanner(String(err));
  }
}

function repaintSession(): void {
  const container = el("session-view");
  container.innerHTML = state.session ? renderSessionView(state.session) : "<p>no session yet</p>";
}

function repaintChat(): void {
  el("chat-view").innerHTML = state.turns.map((t) => renderChatTurn(t)).join("\n");
  wireCitations();
}

function wireCitations(): void {
  for (const node of el("chat-view").querySelectorAll<HTMLDetailsElement>("details.citation")) {
    node.addEventListener(
      "toggle",
      async () => {
        if (!node.open || node.querySelector("pre")) {
          return;
        }
        try {
          const note = await client.getNote(node.dataset.sourceId ?? "");
          const pre = document.createElement("pre");
          pre.className = "cited-text";
          pre.textContent = JSON.stringify(note, null, 2);
          node.appendChild(pre);
        } catch (err) {
          showError(el("chat-errors"), err);
        }
      },
      { once: true },
    );
  }
}

async function newSession(): Promise<void> {
  const errors = el("capture-errors");
  errors.innerHTML = "";
  try {
    const created = await client.createSession();
    state.session = { sessionId: created.session_id, segments: [], state: "open", note: null };
    repaintSession();
  } catch (err) {
    showError(errors, err);
  }
}

async function addSegment(segment: SegmentInput): Promise<void> {
  const errors = el("capture-errors");
  errors.innerHTML = "";
  if (!state.session) {
    errors.innerHTML = renderErrorBanner("create a session first");
    return;
  }
  try {
    await client.addSegment(state.session.sessionId, segment);
    state.session.segments.push(segment); // acknowledged by the 204
    repaintSession();
  } catch (err) {
    showError(errors, err);
  }
}

async function replayDemo(): Promise<void> {
  await newSession();
  for (const segment of DEMO_SEGMENTS) {
    await addSegment(segment);
  }
}

async function finalizeSession(): Promise<void> {
  const errors = el("capture-errors");
  errors.innerHTML = "";
  if (!state.session) {
    errors.innerHTML = renderErrorBanner("create a session first");
    return;
  }
  try {
    const result = await client.finalizeSession(state.session.sessionId);
    state.session.state = "finalized";
    state.session.note = result.note;
    repaintSession();
  } catch (err) {
    showError(errors, err);
  }
}

async function submitQuery(): Promise<void> {
  const input = el<HTMLInputElement>("chat-input");
  const queryText = input.value.trim();
  if (!queryText) {
    return;
  }
  el("chat-errors").innerHTML = "";
  try {
    const response = await client.query(queryText);
    state.turns.push({
      query: queryText,
      answer: response.answer,
      citations: response.citations,
      contextUsed: response.context_used,
    });
    input.value = "";
    repaintChat();
  } catch (err) {
    showError(el("chat-errors"), err);
  }
}

function segmentFromForm(): SegmentInput {
  return {
    start: Number(el<HTMLInputElement>("seg-start").value),
    end: Number(el<HTMLInputElement>("seg-end").value),
    speaker: el<HTMLSelectElement>("seg-speaker").value,
    text: el<HTMLInputElement>("seg-text").value,
  };
}

export function boot(): void {
  el("btn-new-session").addEventListener("click", () => void newSession());
  el("btn-replay").addEventListener("click", () => void replayDemo());
  el("btn-finalize").addEventListener("click", () => void finalizeSession());
  el("btn-add-segment").addEventListener("click", () => void addSegment(segmentFromForm()));
  el("btn-send").addEventListener("click", () => void submitQuery());
  el<HTMLInputElement>("chat-input").addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void submitQuery();
    }
  });
  repaintSession();
  repaintChat();
}

if (typeof document !== "undefined" && document.getElementById("btn-new-session")) {
  boot();
}
