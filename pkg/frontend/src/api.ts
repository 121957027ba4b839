/** Typed client for the framefill /v1 HTTP API, the UI's only backend. */

export interface CandidateOut {
  text: string;
  logprob: number;
  score: number;
  satisfied: string[];
}

export interface BlankOut {
  blank: number;
  candidates: CandidateOut[];
  search_failed: boolean;
  partials: CandidateOut[];
}

export interface SuggestedFrame {
  id: string;
  score: number;
}

export interface FrameInfo {
  id: string;
  name: string;
  lexical_units: { lemma: string; pos: string; variants: string[] }[];
}

export interface Cell {
  kind: "text" | "blank";
  text: string | null;
  frames: string[];
}

export interface StoredCandidate {
  id: number;
  text: string;
  logprob: number;
  satisfied: string[];
  frames: string[];
  options: Record<string, unknown>;
}

export interface SessionState {
  id: string;
  seed: number;
  cells: Cell[];
  candidates: Record<string, StoredCandidate[]>;
  history: { event: Record<string, unknown>; result_kind: string }[];
}

export interface DecodeOptions {
  mode?: "ordered" | "unordered";
  beam_size?: number;
  max_new_tokens?: number;
  num_candidates?: number;
}

export interface SessionEvent {
  type: string;
  [key: string]: unknown;
}

export interface EventResult {
  state: SessionState;
  result: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class FramefillClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1${path}`, init);
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      const err = (body as { error?: { code: string; message: string } })?.error;
      throw new ApiError(err?.code ?? "http_error", err?.message ?? resp.statusText, resp.status);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown, signal?: AbortSignal): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
      signal,
    });
  }

  health(): Promise<{ status: string; frames: number; vocab_size: number }> {
    return this.request("/health");
  }

  searchFrames(query: string): Promise<{ frames: FrameInfo[] }> {
    return this.request(`/frames?q=${encodeURIComponent(query)}`);
  }

  infill(payload: {
    sentences: string[];
    blanks: number[];
    frames?: string[][];
    options?: DecodeOptions;
    seed?: number;
  }, signal?: AbortSignal): Promise<{ blanks: BlankOut[]; seed: number }> {
    return this.post("/infill", payload, signal);
  }

  suggest(payload: { sentences: string[]; position: number; k?: number }):
    Promise<{ frames: SuggestedFrame[]; suggestion_source: string }> {
    return this.post("/suggest", payload);
  }

  diversify(payload: {
    sentences: string[];
    position: number;
    k?: number;
    per_frame?: number;
    options?: DecodeOptions;
  }): Promise<{ groups: { frame: string; candidates: CandidateOut[]; search_failed: boolean }[] }> {
    return this.post("/diversify", payload);
  }

  counterfactual(payload: {
    sentences: string[];
    replace_index: number;
    replacement: string;
    seed?: number;
    options?: DecodeOptions;
  }): Promise<{ sentences: string[]; metadata: Record<string, unknown> }> {
    return this.post("/counterfactual", payload);
  }

  createSession(seed: number): Promise<SessionState> {
    return this.post("/sessions", { seed });
  }

  getSession(id: string): Promise<SessionState> {
    return this.request(`/sessions/${id}`);
  }

  postEvent(id: string, event: SessionEvent, signal?: AbortSignal): Promise<EventResult> {
    return this.post(`/sessions/${id}/events`, { event }, signal);
  }

  replaySession(id: string): Promise<SessionState> {
    return this.post(`/sessions/${id}/replay`, {});
  }

  importSession(state: SessionState): Promise<SessionState> {
    return this.post("/sessions/import", { state });
  }
}
