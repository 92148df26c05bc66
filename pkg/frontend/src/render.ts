/**
 * DOM rendering. The transcript is redrawn from ChatState alone; handlers are
 * injected so this module stays free of app state.
 */

import type { ChatMessage, ChatState } from "./state.js";
import type { CorpusView, SourceHit } from "./types.js";

export function renderTranscript(root: HTMLElement, state: ChatState): void {
  root.replaceChildren(
    ...state.messages.map((message) => renderMessage(root.ownerDocument, message)),
  );
}

function renderMessage(doc: Document, message: ChatMessage): HTMLElement {
  const el = doc.createElement("article");
  el.className = `message ${message.role} ${message.jobState}`;

  const meta = doc.createElement("div");
  meta.className = "meta";
  meta.textContent = message.role === "user" ? "you" : assistantLabel(message);
  el.appendChild(meta);

  const body = doc.createElement("div");
  body.className = "text";
  body.textContent = message.text;
  el.appendChild(body);

  if (message.role === "assistant" && message.jobState === "failed") {
    const error = doc.createElement("div");
    error.className = "error-banner";
    error.textContent = message.error ?? "generation failed";
    el.appendChild(error);
  }

  if (message.role === "assistant" && message.jobState === "done") {
    el.appendChild(renderSourcesPanel(doc, message.sources));
  }
  return el;
}

function assistantLabel(message: ChatMessage): string {
  switch (message.jobState) {
    case "queued":
      return message.queuePosition !== null && message.queuePosition > 0
        ? `queued (position ${message.queuePosition})`
        : "queued";
    case "running":
      return "answering…";
    case "failed":
      return "failed";
    default:
      return "assistant";
  }
}

/** Sources panel: one collapsed card per hit, in rank order; an answer that
 * arrived without sources is visually flagged so it is never mistaken for a
 * grounded one. */
function renderSourcesPanel(doc: Document, sources: SourceHit[] | null): HTMLElement {
  const panel = doc.createElement("section");
  panel.className = "sources";
  if (sources === null || sources.length === 0) {
    panel.classList.add("no-sources");
    const warning = doc.createElement("div");
    warning.className = "warning";
    warning.textContent =
      sources === null
        ? "⚠ no sources event received — treat this answer as unverified"
        : "0 sources — nothing retrieved for this query";
    panel.appendChild(warning);
    return panel;
  }
  const heading = doc.createElement("div");
  heading.className = "sources-heading";
  heading.textContent = `${sources.length} source${sources.length === 1 ? "" : "s"}`;
  panel.appendChild(heading);
  for (const hit of sources) {
    panel.appendChild(renderSourceCard(doc, hit));
  }
  return panel;
}

export function renderSourceCard(doc: Document, hit: SourceHit): HTMLElement {
  const card = doc.createElement("details");
  card.className = "source-card";
  const summary = doc.createElement("summary");
  const tag = doc.createElement("span");
  tag.className = "source-tag";
  tag.textContent = `${hit.doc_id}#${hit.chunk_index}`;
  const score = doc.createElement("span");
  score.className = "source-score";
  score.textContent = `score ${hit.score.toFixed(4)}`;
  summary.append(tag, score);
  const metadata = doc.createElement("span");
  metadata.className = "source-metadata";
  metadata.textContent = formatMetadata(hit.metadata);
  summary.appendChild(metadata);
  card.appendChild(summary);
  const text = doc.createElement("div");
  text.className = "source-text";
  text.textContent = hit.text;
  card.appendChild(text);
  return card;
}

function formatMetadata(metadata: SourceHit["metadata"]): string {
  const pairs = Object.entries(metadata).filter(
    ([key]) => key !== "doc_id" && key !== "chunk_index",
  );
  return pairs.map(([key, value]) => `${key}=${String(value)}`).join(" ");
}

export function renderCorpusOptions(
  select: HTMLSelectElement,
  corpora: CorpusView[],
  selected: string | null,
): void {
  const doc = select.ownerDocument;
  select.replaceChildren(
    ...corpora.map((corpus) => {
      const option = doc.createElement("option");
      option.value = corpus.name;
      option.textContent = `${corpus.name} · ${corpus.state} · ${corpus.documents} doc(s)`;
      option.selected = corpus.name === selected;
      return option;
    }),
  );
}

/** The query box is usable only for a vectorized corpus and only while no
 * job from this view is queued or running. */
export function setInputState(
  input: HTMLTextAreaElement | HTMLInputElement,
  button: HTMLButtonElement,
  corpus: CorpusView | null,
  busy: boolean,
): void {
  const ready = corpus !== null && corpus.state === "vectorized";
  input.disabled = !ready || busy;
  button.disabled = !ready || busy;
  input.placeholder = ready
    ? "Ask about this corpus…"
    : corpus === null
      ? "Select a corpus first"
      : `Corpus is ${corpus.state}; vectorize it to enable queries`;
}
