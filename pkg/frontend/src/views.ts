import { NOTE_SECTIONS } from "./types.js";
import type { ChatTurn, Citation, NoteJson, SegmentInput, SessionView } from "./types.js";

export function escapeHtml(raw: string): string {
  return raw
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderNoteSections(note: NoteJson): string {
  const sections = NOTE_SECTIONS.map(({ key, header }) => {
    const body = String(note[key] ?? "");
    return `<section class="note-section" data-section="${key}">
  <h3>${header}</h3>
  <p>${body ? escapeHtml(body) : "<em>empty</em>"}</p>
</section>`;
  });
  return `<article class="note" data-note-id="${escapeHtml(note.note_id)}">\n${sections.join("\n")}\n</article>`;
}

function renderSegmentRow(segment: SegmentInput): string {
  const time = `${segment.start.toFixed(1)}–${segment.end.toFixed(1)}s`;
  return `<li class="segment"><span class="time">${time}</span> <strong>${escapeHtml(
    segment.speaker,
  )}</strong>: ${escapeHtml(segment.text)}</li>`;
}

export function renderSessionView(view: SessionView): string {
  const rows = view.segments.map(renderSegmentRow).join("\n");
  const noteBlock = view.note ? renderNoteSections(view.note) : "";
  return `<div class="session" data-state="${view.state}">
<header>session <code>${escapeHtml(view.sessionId)}</code> — ${view.state}</header>
<ul class="segments">\n${rows}\n</ul>
${noteBlock}
</div>`;
}

export function renderCitation(citation: Citation, expandedText: string | null = null): string {
  const summary = `#${citation.entry_id} · ${citation.score.toFixed(4)} · ${escapeHtml(citation.source_id)}`;
  const body = expandedText === null ? "" : `<pre class="cited-text">${escapeHtml(expandedText)}</pre>`;
  return `<details class="citation" data-entry-id="${citation.entry_id}" data-source-id="${escapeHtml(
    citation.source_id,
  )}"><summary>${summary}</summary>${body}</details>`;
}

export function renderNoContextBadge(): string {
  return `<span class="badge no-context">no context found</span>`;
}

export function renderChatTurn(turn: ChatTurn, citedTexts: Record<number, string> = {}): string {
  const citations = turn.citations
    .map((c) => renderCitation(c, citedTexts[c.entry_id] ?? null))
    .join("\n");
  const badge = turn.contextUsed ? "" : renderNoContextBadge();
  return `<div class="turn">
<p class="query">${escapeHtml(turn.query)}</p>
<p class="answer">${escapeHtml(turn.answer)} ${badge}</p>
<div class="citations">\n${citations}\n</div>
</div>`;
}

export function renderErrorBanner(message: string, stage?: string): string {
  const suffix = stage ? ` <span class="stage">[${escapeHtml(stage)}]</span>` : "";
  return `<div class="error-banner">${escapeHtml(message)}${suffix}</div>`;
}
