/** Canvas view model.
 *
 * The rendered state is a pure function of the last server-acknowledged
 * SessionState plus local in-flight markers (pending requests, dismissible
 * notices, suggestion panels). All text comes from server responses; the
 * client never synthesizes candidates.
 */

import type { CandidateOut, SessionState, StoredCandidate, SuggestedFrame } from "./api.js";

export interface Notice {
  id: number;
  kind: "error" | "info";
  message: string;
}

export interface CanvasModel {
  session: SessionState | null;
  /** positions with a decode in flight (at most one per blank) */
  pending: Record<number, boolean>;
  /** last suggestions per position, from the server */
  suggestions: Record<number, SuggestedFrame[]>;
  /** partial hypotheses surfaced after a failed decode, per position */
  partials: Record<number, CandidateOut[]>;
  notices: Notice[];
  nextNoticeId: number;
}

export function emptyModel(): CanvasModel {
  return {
    session: null,
    pending: {},
    suggestions: {},
    partials: {},
    notices: [],
    nextNoticeId: 1,
  };
}

export function withSession(model: CanvasModel, session: SessionState): CanvasModel {
  return { ...model, session };
}

export function candidatesFor(model: CanvasModel, position: number): StoredCandidate[] {
  return model.session?.candidates[String(position)] ?? [];
}

export function framesFor(model: CanvasModel, position: number): string[] {
  return model.session?.cells[position]?.frames ?? [];
}

export function storyText(session: SessionState | null): string {
  if (!session) return "";
  return session.cells
    .filter((c) => c.kind === "text" && c.text)
    .map((c) => c.text)
    .join(" ");
}

export function historyTimeline(session: SessionState | null): string[] {
  if (!session) return [];
  return session.history.map((h, i) => {
    const ev = h.event as { type?: string; position?: number };
    const pos = ev.position !== undefined ? ` @${ev.position}` : "";
    return `${i + 1}. ${ev.type ?? "?"}${pos}`;
  });
}

/** Chip rendering data: which requested frames a candidate actually evokes. */
export function chipStates(
  requested: string[],
  candidate: { satisfied: string[] } | null,
): { frame: string; satisfied: boolean }[] {
  const got = new Set(candidate?.satisfied ?? []);
  return requested.map((frame) => ({ frame, satisfied: got.has(frame) }));
}

export function beginPending(model: CanvasModel, position: number): CanvasModel {
  return { ...model, pending: { ...model.pending, [position]: true } };
}

export function endPending(model: CanvasModel, position: number): CanvasModel {
  const pending = { ...model.pending };
  delete pending[position];
  return { ...model, pending };
}

export function withSuggestions(
  model: CanvasModel,
  position: number,
  frames: SuggestedFrame[],
): CanvasModel {
  return { ...model, suggestions: { ...model.suggestions, [position]: frames } };
}

export function withPartials(
  model: CanvasModel,
  position: number,
  partials: CandidateOut[],
): CanvasModel {
  return { ...model, partials: { ...model.partials, [position]: partials } };
}

export function pushNotice(model: CanvasModel, kind: Notice["kind"], message: string): CanvasModel {
  const notice = { id: model.nextNoticeId, kind, message };
  return {
    ...model,
    notices: [...model.notices, notice],
    nextNoticeId: model.nextNoticeId + 1,
  };
}

export function dismissNotice(model: CanvasModel, id: number): CanvasModel {
  return { ...model, notices: model.notices.filter((n) => n.id !== id) };
}
