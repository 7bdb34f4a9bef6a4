// Wire shapes, mirroring the service's JSON views verbatim.

export type ZoomStop = "full" | "half" | "quarter" | "gist";

/** Slider stops in order, widest view first. Exactly four. */
export const ZOOM_STOPS: readonly ZoomStop[] = ["full", "half", "quarter", "gist"];

/** Levels that have generated summaries (everything but full). */
export type SummaryLevel = Exclude<ZoomStop, "full">;

export interface KeywordView {
  word: string;
  source: "auto" | "manual";
  active: boolean;
  score: number;
}

export interface RambleView {
  ramble_id: string;
  text: string;
  state: "idle" | "respeaking" | "editing";
  content_hash: string;
  keyword_hash: string;
  keywords: KeywordView[];
  active_keywords: string[];
  summaries: Record<SummaryLevel, { text: string } | null>;
}

export interface DocumentView {
  doc_id: string;
  title: string;
  revision: number;
  created_at: string;
  updated_at: string;
  rambles: RambleView[];
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

export type SummaryEvent =
  | { event: "chunk"; level: SummaryLevel; delta: string }
  | { event: "done"; level: SummaryLevel; text: string }
  | { event: "error"; code: string };

export interface TransformProposal {
  proposal_id: string;
  candidate_text: string;
  revision: number;
}

export interface LevelResults {
  levels: Record<SummaryLevel, { ok: boolean; text: string | null; error: string | null }>;
  revision: number;
}
