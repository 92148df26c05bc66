/**
 * Server-sent events over fetch.
 *
 * EventSource cannot send Authorization headers and does not exist in test
 * runtimes, so the stream is read from a fetch ReadableStream and parsed by
 * hand. The parser is incremental: feed it arbitrary chunk boundaries and it
 * emits completed events.
 */

import type { StreamEvent } from "./types.js";

const KNOWN_KINDS = new Set(["status", "token", "sources", "done", "failed"]);

export class SseParser {
  private buffer = "";
  private eventName: string | null = null;

  /** Feed a decoded chunk; returns any events completed by it. */
  push(chunk: string): StreamEvent[] {
    this.buffer += chunk;
    const events: StreamEvent[] = [];
    let newline;
    while ((newline = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, newline).replace(/\r$/, "");
      this.buffer = this.buffer.slice(newline + 1);
      if (line.startsWith(":")) {
        continue; // keep-alive comment
      }
      if (line.startsWith("event: ")) {
        this.eventName = line.slice("event: ".length);
        continue;
      }
      if (line.startsWith("data: ") && this.eventName !== null) {
        if (KNOWN_KINDS.has(this.eventName)) {
          events.push({
            kind: this.eventName,
            data: JSON.parse(line.slice("data: ".length)),
          } as StreamEvent);
        }
        this.eventName = null;
      }
    }
    return events;
  }
}

/** Read a text/event-stream response until its terminal event. */
export async function* readEventStream(
  response: Response,
): AsyncGenerator<StreamEvent> {
  if (!response.body) {
    throw new Error("response has no body to stream");
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser();
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        return;
      }
      for (const event of parser.push(decoder.decode(value, { stream: true }))) {
        yield event;
        if (event.kind === "done" || event.kind === "failed") {
          return;
        }
      }
    }
  } finally {
    reader.releaseLock();
  }
}
