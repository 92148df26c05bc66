import { describe, expect, it } from "vitest";

import { SseParser } from "../src/sse.js";

describe("SseParser", () => {
  it("parses complete events", () => {
    const parser = new SseParser();
    const events = parser.push(
      'event: token\ndata: {"text": "Hello"}\n\nevent: done\ndata: {}\n\n',
    );
    expect(events).toEqual([
      { kind: "token", data: { text: "Hello" } },
      { kind: "done", data: {} },
    ]);
  });

  it("handles arbitrary chunk boundaries", () => {
    const raw = 'event: token\ndata: {"text": "ab"}\n\nevent: sources\ndata: {"hits": []}\n\n';
    for (const size of [1, 3, 7]) {
      const parser = new SseParser();
      const events = [];
      for (let i = 0; i < raw.length; i += size) {
        events.push(...parser.push(raw.slice(i, i + size)));
      }
      expect(events).toEqual([
        { kind: "token", data: { text: "ab" } },
        { kind: "sources", data: { hits: [] } },
      ]);
    }
  });

  it("ignores keep-alive comments and unknown events", () => {
    const parser = new SseParser();
    const events = parser.push(
      ': keep-alive\n\nevent: mystery\ndata: {"x": 1}\n\nevent: status\ndata: {"state": "queued", "position": 2}\n\n',
    );
    expect(events).toEqual([
      { kind: "status", data: { state: "queued", position: 2 } },
    ]);
  });

  it("tolerates CRLF line endings", () => {
    const parser = new SseParser();
    const events = parser.push('event: done\r\ndata: {}\r\n\r\n');
    expect(events).toEqual([{ kind: "done", data: {} }]);
  });
});
