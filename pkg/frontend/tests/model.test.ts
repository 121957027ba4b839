import { describe, expect, it } from "vitest";

import type { SessionState } from "../src/api.js";
import {
  beginPending,
  chipStates,
  dismissNotice,
  emptyModel,
  endPending,
  historyTimeline,
  pushNotice,
  storyText,
  withSession,
  withSuggestions,
} from "../src/model.js";

function session(partial: Partial<SessionState> = {}): SessionState {
  return {
    id: "s1",
    seed: 0,
    cells: [],
    candidates: {},
    history: [],
    ...partial,
  };
}

describe("storyText", () => {
  it("joins only accepted text cells", () => {
    const s = session({
      cells: [
        { kind: "text", text: "One.", frames: [] },
        { kind: "blank", text: null, frames: ["[Food]"] },
        { kind: "text", text: "Three.", frames: [] },
      ],
    });
    expect(storyText(s)).toBe("One. Three.");
  });

  it("is empty with no session", () => {
    expect(storyText(null)).toBe("");
  });
});

describe("chipStates", () => {
  it("marks satisfied frames green and misses grey", () => {
    const chips = chipStates(["[A]", "[B]"], { satisfied: ["[B]"] });
    expect(chips).toEqual([
      { frame: "[A]", satisfied: false },
      { frame: "[B]", satisfied: true },
    ]);
  });

  it("treats missing candidate as all-unsatisfied", () => {
    expect(chipStates(["[A]"], null)).toEqual([{ frame: "[A]", satisfied: false }]);
  });
});

describe("model state transitions", () => {
  it("is a pure function of the acknowledged session", () => {
    const base = emptyModel();
    const next = withSession(base, session());
    expect(base.session).toBeNull();
    expect(next.session?.id).toBe("s1");
  });

  it("tracks at most one pending flag per position", () => {
    let m = beginPending(emptyModel(), 2);
    expect(m.pending[2]).toBe(true);
    m = endPending(m, 2);
    expect(m.pending[2]).toBeUndefined();
  });

  it("stores suggestions per position", () => {
    const m = withSuggestions(emptyModel(), 1, [{ id: "[Food]", score: 0.5 }]);
    expect(m.suggestions[1][0].id).toBe("[Food]");
  });

  it("notices are dismissible", () => {
    let m = pushNotice(emptyModel(), "error", "boom");
    const id = m.notices[0].id;
    m = dismissNotice(m, id);
    expect(m.notices).toHaveLength(0);
  });
});

describe("historyTimeline", () => {
  it("labels events with their positions", () => {
    const s = session({
      history: [
        { event: { type: "set_story" }, result_kind: "set_story" },
        { event: { type: "insert_blank", position: 1 }, result_kind: "insert_blank" },
      ],
    });
    expect(historyTimeline(s)).toEqual(["1. set_story", "2. insert_blank @1"]);
  });
});
