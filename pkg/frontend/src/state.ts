/**
 * Chat view state as a pure function of the event stream.
 *
 * Every mutation of the transcript goes through `reduce`, so replaying a
 * recorded event sequence reproduces the exact same view state. The renderer
 * only ever draws `ChatState`; it holds no state of its own.
 */

import type { SourceHit, StreamEvent } from "./types.js";

export type JobPhase = "queued" | "running" | "done" | "failed";

export interface ChatMessage {
  role: "user" | "assistant";
  text: string;
  /** null until (and unless) the sources event arrives. */
  sources: SourceHit[] | null;
  jobState: JobPhase;
  queuePosition: number | null;
  error: string | null;
}

export interface ChatState {
  messages: ChatMessage[];
  /** One in-flight query per view: input locks while queued/running. */
  busy: boolean;
}

export type ChatEvent =
  | { type: "user-query"; text: string }
  | { type: "stream"; event: StreamEvent };

export function initialState(): ChatState {
  return { messages: [], busy: false };
}

export function reduce(state: ChatState, event: ChatEvent): ChatState {
  if (event.type === "user-query") {
    const user: ChatMessage = {
      role: "user",
      text: event.text,
      sources: null,
      jobState: "done",
      queuePosition: null,
      error: null,
    };
    const pending: ChatMessage = {
      role: "assistant",
      text: "",
      sources: null,
      jobState: "queued",
      queuePosition: null,
      error: null,
    };
    return { messages: [...state.messages, user, pending], busy: true };
  }

  // Stream events apply to the trailing assistant message.
  const index = state.messages.length - 1;
  const current = state.messages[index];
  if (!current || current.role !== "assistant") {
    return state;
  }
  const next = applyStream(current, event.event);
  const messages = state.messages.slice();
  messages[index] = next;
  const terminal = next.jobState === "done" || next.jobState === "failed";
  return { messages, busy: !terminal };
}

function applyStream(message: ChatMessage, event: StreamEvent): ChatMessage {
  switch (event.kind) {
    case "status": {
      const phase = event.data.state === "running" ? "running" : "queued";
      return {
        ...message,
        jobState: phase,
        queuePosition:
          event.data.position !== undefined ? event.data.position : null,
      };
    }
    case "token":
      return { ...message, text: message.text + event.data.text };
    case "sources":
      // Hits arrive already ranked; keep them exactly in that order.
      return { ...message, sources: event.data.hits };
    case "done":
      return { ...message, jobState: "done", queuePosition: null };
    case "failed":
      return {
        ...message,
        jobState: "failed",
        queuePosition: null,
        error: event.data.error,
      };
  }
}

/** Rebuild the state from a recorded event log (replay invariant). */
export function replay(events: ChatEvent[]): ChatState {
  return events.reduce(reduce, initialState());
}
