/** Shared types mirroring the service's wire formats. */

export interface SourceHit {
  record_id: number;
  score: number;
  doc_id: string;
  chunk_index: number;
  text: string;
  metadata: Record<string, string | number | boolean>;
}

export type StreamEvent =
  | { kind: "status"; data: { state: string; position?: number } }
  | { kind: "token"; data: { text: string } }
  | { kind: "sources"; data: { hits: SourceHit[] } }
  | { kind: "done"; data: Record<string, never> }
  | { kind: "failed"; data: { error: string } };

export interface CorpusView {
  name: string;
  state: "empty" | "ingested" | "vectorized";
  documents: number;
  records: number;
}

export interface IngestReport {
  added: number;
  errors: { id: string; path: string; error: string }[];
}

export interface HistoryEntry {
  query: string;
  answer: { text: string; backend_id: string; sources: SourceHit[] };
  timestamp: number;
}
