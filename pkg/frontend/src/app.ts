/** Headless controller: the actions the UI (and the e2e tests) drive.
 *
 * Every action posts a session event, adopts the server-acknowledged state,
 * and notifies the renderer. At most one decode runs per blank; a newer
 * request aborts the older one.
 */

import { ApiError, FramefillClient } from "./api.js";
import type {
  CandidateOut,
  DecodeOptions,
  SessionEvent,
  SessionState,
  SuggestedFrame,
} from "./api.js";
import {
  CanvasModel,
  beginPending,
  emptyModel,
  endPending,
  pushNotice,
  storyText,
  withPartials,
  withSession,
  withSuggestions,
} from "./model.js";

export type Listener = (model: CanvasModel) => void;

export class CanvasApp {
  model: CanvasModel = emptyModel();
  private listeners: Listener[] = [];
  private inflight = new Map<number, AbortController>();

  constructor(
    readonly client: FramefillClient,
    readonly decodeOptions: DecodeOptions = { beam_size: 12, max_new_tokens: 36 },
  ) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private commit(model: CanvasModel): void {
    this.model = model;
    for (const l of this.listeners) l(model);
  }

  private fail(err: unknown): void {
    const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    this.commit(pushNotice(this.model, "error", message));
  }

  get session(): SessionState | null {
    return this.model.session;
  }

  get story(): string {
    return storyText(this.model.session);
  }

  async start(seed: number): Promise<void> {
    const session = await this.client.createSession(seed);
    this.commit(withSession(this.model, session));
  }

  async load(sessionId: string): Promise<void> {
    const session = await this.client.getSession(sessionId);
    this.commit(withSession(this.model, session));
  }

  private async event(event: SessionEvent, signal?: AbortSignal):
    Promise<Record<string, unknown> | null> {
    const session = this.model.session;
    if (!session) throw new Error("no active session");
    try {
      const out = await this.client.postEvent(session.id, event, signal);
      this.commit(withSession(this.model, out.state));
      return out.result;
    } catch (err) {
      if ((err as Error).name === "AbortError") return null;
      this.fail(err);
      return null;
    }
  }

  async setStory(sentences: string[]): Promise<void> {
    await this.event({ type: "set_story", sentences });
  }

  async insertBlank(position: number, frames: string[] = []): Promise<void> {
    await this.event({ type: "insert_blank", position, frames });
  }

  async setFrames(position: number, frames: string[]): Promise<void> {
    await this.event({ type: "set_frames", position, frames });
  }

  async suggest(position: number, k = 5): Promise<SuggestedFrame[]> {
    const result = await this.event({ type: "suggest", position, k });
    const frames = (result?.frames ?? []) as SuggestedFrame[];
    this.commit(withSuggestions(this.model, position, frames));
    return frames;
  }

  /** Decode candidates for a blank; a newer call cancels the older one. */
  async requestCandidates(position: number): Promise<void> {
    this.inflight.get(position)?.abort();
    const controller = new AbortController();
    this.inflight.set(position, controller);
    this.commit(beginPending(this.model, position));
    try {
      const result = await this.event(
        { type: "request_candidates", position, options: this.decodeOptions },
        controller.signal,
      );
      if (result?.search_failed) {
        this.commit(pushNotice(
          this.model, "info", `decode at ${position} did not finish; showing partials`));
        this.commit(withPartials(
          this.model, position, (result.partials ?? []) as CandidateOut[]));
      }
    } finally {
      if (this.inflight.get(position) === controller) this.inflight.delete(position);
      this.commit(endPending(this.model, position));
    }
  }

  async accept(position: number, candidateId: number): Promise<void> {
    await this.event({ type: "accept", position, candidate: candidateId });
  }

  /** Re-execute the session's history server-side; returns the replayed story. */
  async replay(): Promise<string> {
    const session = this.model.session;
    if (!session) throw new Error("no active session");
    const replayed = await this.client.replaySession(session.id);
    return storyText(replayed);
  }

  exportState(): SessionState {
    const session = this.model.session;
    if (!session) throw new Error("no active session");
    return session;
  }
}
