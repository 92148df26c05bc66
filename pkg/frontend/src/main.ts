/**
 * App wiring: configuration, corpus admin, session lifecycle, send loop.
 *
 * Configuration comes from the URL (?api=...&token=...&session=...); the API
 * base defaults to the page's own origin so the bundled UI works when served
 * by `rag serve --ui-dir`.
 */

import { ApiError, RagApi } from "./api.js";
import {
  renderCorpusOptions,
  renderTranscript,
  setInputState,
} from "./render.js";
import { initialState, reduce, type ChatEvent, type ChatState } from "./state.js";
import type { CorpusView } from "./types.js";

interface View {
  transcript: HTMLElement;
  corpusSelect: HTMLSelectElement;
  queryInput: HTMLTextAreaElement;
  sendButton: HTMLButtonElement;
  banner: HTMLElement;
  sessionLabel: HTMLElement;
  manifestInput: HTMLTextAreaElement;
  uploadButton: HTMLButtonElement;
  vectorizeButton: HTMLButtonElement;
  adminStatus: HTMLElement;
}

class ChatApp {
  private state: ChatState = initialState();
  /** Recorded event log; replaying it reproduces the transcript exactly. */
  readonly eventLog: ChatEvent[] = [];
  private sessionId: string | null = null;
  private corpora: CorpusView[] = [];
  private corpus: CorpusView | null = null;

  constructor(
    private readonly api: RagApi,
    private readonly view: View,
  ) {}

  private dispatch(event: ChatEvent): void {
    this.eventLog.push(event);
    this.state = reduce(this.state, event);
    renderTranscript(this.view.transcript, this.state);
    this.syncInput();
  }

  private syncInput(): void {
    setInputState(
      this.view.queryInput,
      this.view.sendButton,
      this.corpus,
      this.state.busy,
    );
  }

  private showBanner(text: string | null): void {
    this.view.banner.textContent = text ?? "";
    this.view.banner.hidden = text === null;
  }

  async boot(requestedSession: string | null): Promise<void> {
    try {
      await this.refreshCorpora();
    } catch (error) {
      this.showBanner(describe(error));
      return;
    }
    if (requestedSession) {
      try {
        await this.resumeSession(requestedSession);
        return;
      } catch (error) {
        this.showBanner(`could not resume session: ${describe(error)}`);
      }
    }
    if (this.corpora.length > 0) {
      await this.selectCorpus(this.corpora[0].name);
    }
    this.syncInput();
  }

  async refreshCorpora(): Promise<void> {
    this.corpora = await this.api.listCorpora();
    const selected = this.corpus?.name ?? null;
    renderCorpusOptions(this.view.corpusSelect, this.corpora, selected);
    if (selected) {
      this.corpus = this.corpora.find((c) => c.name === selected) ?? null;
    }
    this.syncInput();
  }

  /** Bind this view to a corpus, opening a fresh session. */
  async selectCorpus(name: string): Promise<void> {
    this.corpus = this.corpora.find((c) => c.name === name) ?? null;
    renderCorpusOptions(this.view.corpusSelect, this.corpora, name);
    this.sessionId = null;
    this.view.sessionLabel.textContent = "";
    this.showBanner(null);
    if (this.corpus && this.corpus.state === "vectorized") {
      try {
        this.sessionId = await this.api.createSession(name);
        this.view.sessionLabel.textContent = `session ${this.sessionId.slice(0, 8)}`;
        setSessionParam(this.sessionId);
      } catch (error) {
        this.showBanner(describe(error));
      }
    }
    this.syncInput();
  }

  /** Load an existing session (and its transcript) by id from the URL. */
  async resumeSession(sessionId: string): Promise<void> {
    const history = await this.api.history(sessionId);
    this.sessionId = sessionId;
    this.view.sessionLabel.textContent = `session ${sessionId.slice(0, 8)}`;
    for (const entry of history) {
      this.dispatch({ type: "user-query", text: entry.query });
      this.dispatch({ type: "stream", event: { kind: "status", data: { state: "running" } } });
      this.dispatch({ type: "stream", event: { kind: "token", data: { text: entry.answer.text } } });
      this.dispatch({ type: "stream", event: { kind: "sources", data: { hits: entry.answer.sources } } });
      this.dispatch({ type: "stream", event: { kind: "done", data: {} } });
    }
  }

  async send(text: string): Promise<void> {
    if (!this.sessionId || this.state.busy || !text.trim()) {
      return;
    }
    this.showBanner(null);
    this.dispatch({ type: "user-query", text });
    try {
      const jobId = await this.api.submitQuery(this.sessionId, text);
      for await (const event of this.api.streamJob(jobId)) {
        this.dispatch({ type: "stream", event });
      }
    } catch (error) {
      // Surface transport errors in the transcript like backend failures.
      this.dispatch({
        type: "stream",
        event: { kind: "failed", data: { error: describe(error) } },
      });
    }
  }

  async uploadManifest(jsonl: string): Promise<void> {
    if (!this.corpus) {
      return;
    }
    this.view.adminStatus.textContent = "uploading…";
    try {
      const report = await this.api.uploadManifest(this.corpus.name, jsonl);
      const errors = report.errors.map((e) => `${e.id}: ${e.error}`).join("; ");
      this.view.adminStatus.textContent =
        `added ${report.added} document(s)` + (errors ? ` — errors: ${errors}` : "");
      await this.refreshCorpora();
    } catch (error) {
      this.view.adminStatus.textContent = describe(error);
    }
  }

  async vectorize(): Promise<void> {
    if (!this.corpus) {
      return;
    }
    this.view.adminStatus.textContent = "vectorizing…";
    try {
      const meta = await this.api.vectorize(this.corpus.name);
      this.view.adminStatus.textContent = `vectorized: ${meta.count} chunks`;
      await this.refreshCorpora();
      await this.selectCorpus(this.corpus.name);
    } catch (error) {
      this.view.adminStatus.textContent = describe(error);
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.detail}`;
  }
  return error instanceof Error ? error.message : String(error);
}

function setSessionParam(sessionId: string): void {
  const url = new URL(window.location.href);
  url.searchParams.set("session", sessionId);
  window.history.replaceState(null, "", url.toString());
}

export function start(): void {
  const params = new URLSearchParams(window.location.search);
  const api = new RagApi({
    baseUrl: params.get("api") ?? window.location.origin,
    token: params.get("token") ?? undefined,
  });
  const view: View = {
    transcript: mustFind("#transcript"),
    corpusSelect: mustFind("#corpus-select"),
    queryInput: mustFind("#query-input"),
    sendButton: mustFind("#send-button"),
    banner: mustFind("#banner"),
    sessionLabel: mustFind("#session-label"),
    manifestInput: mustFind("#manifest-input"),
    uploadButton: mustFind("#upload-button"),
    vectorizeButton: mustFind("#vectorize-button"),
    adminStatus: mustFind("#admin-status"),
  };
  const app = new ChatApp(api, view);

  view.corpusSelect.addEventListener("change", () => {
    void app.selectCorpus(view.corpusSelect.value);
  });
  view.sendButton.addEventListener("click", () => {
    const text = view.queryInput.value;
    view.queryInput.value = "";
    void app.send(text);
  });
  view.queryInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter" && !event.shiftKey) {
      event.preventDefault();
      view.sendButton.click();
    }
  });
  view.uploadButton.addEventListener("click", () => {
    void app.uploadManifest(view.manifestInput.value);
  });
  view.vectorizeButton.addEventListener("click", () => {
    void app.vectorize();
  });

  void app.boot(params.get("session"));
}

function mustFind<T extends HTMLElement>(selector: string): T {
  const el = document.querySelector<T>(selector);
  if (!el) {
    throw new Error(`missing element ${selector}`);
  }
  return el;
}

export { ChatApp };

if (typeof document !== "undefined" && document.querySelector("#transcript")) {
  start();
}
