/** Story-canvas UI: renders the session state and wires user actions to the
 * controller. All content comes from server responses. */

import { FramefillClient } from "./api.js";
import { CanvasApp } from "./app.js";
import { CanvasModel, candidatesFor, chipStates, framesFor, historyTimeline } from "./model.js";

const baseUrl = (window as { FRAMEFILL_URL?: string }).FRAMEFILL_URL ?? "http://127.0.0.1:8000";
const app = new CanvasApp(new FramefillClient(baseUrl));

const $ = (id: string) => document.getElementById(id)!;

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderCells(model: CanvasModel): void {
  const root = $("cells");
  root.replaceChildren();
  const session = model.session;
  if (!session) return;
  session.cells.forEach((cell, pos) => {
    const box = el("div", `cell ${cell.kind}`);
    if (cell.kind === "text") {
      box.appendChild(el("p", "cell-text", cell.text ?? ""));
    } else {
      box.appendChild(el("p", "cell-text blank-marker", "[blank]"));
      const chips = el("div", "chips");
      for (const frame of cell.frames) {
        chips.appendChild(el("span", "chip selected", frame));
      }
      for (const s of model.suggestions[pos] ?? []) {
        if (cell.frames.includes(s.id)) continue;
        const chip = el("span", "chip suggested", `${s.id} (${s.score.toFixed(3)})`);
        chip.addEventListener("click", () => {
          void app.setFrames(pos, [...cell.frames, s.id]);
        });
        chips.appendChild(chip);
      }
      box.appendChild(chips);
      const actions = el("div", "cell-actions");
      const suggestBtn = el("button", "action", "suggest frames") as HTMLButtonElement;
      suggestBtn.addEventListener("click", () => void app.suggest(pos));
      const decodeBtn = el("button", "action", model.pending[pos] ? "decoding…" : "candidates");
      (decodeBtn as HTMLButtonElement).disabled = Boolean(model.pending[pos]);
      decodeBtn.addEventListener("click", () => void app.requestCandidates(pos));
      actions.append(suggestBtn, decodeBtn);
      box.appendChild(actions);
      box.appendChild(renderCandidates(model, pos));
    }
    const insert = el("button", "insert-here", "+");
    insert.title = "insert a blank after this cell";
    insert.addEventListener("click", () => void app.insertBlank(pos + 1));
    box.appendChild(insert);
    root.appendChild(box);
  });
  if (session.cells.length === 0) {
    root.appendChild(el("p", "empty-hint",
      "Enter a seed sentence above and press “new session”."));
  }
}

function renderCandidates(model: CanvasModel, pos: number): HTMLElement {
  const panel = el("div", "candidates");
  const requested = framesFor(model, pos);
  const rows = candidatesFor(model, pos);
  for (const cand of rows) {
    const row = el("div", "candidate");
    row.appendChild(el("span", "cand-text", cand.text));
    const chips = el("span", "cand-chips");
    for (const chip of chipStates(requested, cand)) {
      chips.appendChild(
        el("span", `chip ${chip.satisfied ? "satisfied" : "unsatisfied"}`, chip.frame),
      );
    }
    row.appendChild(chips);
    const accept = el("button", "action", "accept");
    accept.addEventListener("click", () => void app.accept(pos, cand.id));
    row.appendChild(accept);
    panel.appendChild(row);
  }
  for (const partial of model.partials[pos] ?? []) {
    const row = el("div", "candidate partial");
    row.appendChild(el("span", "cand-text", `(partial) ${partial.text}`));
    panel.appendChild(row);
  }
  return panel;
}

function renderNotices(model: CanvasModel): void {
  const root = $("notices");
  root.replaceChildren();
  for (const notice of model.notices) {
    const row = el("div", `notice ${notice.kind}`, notice.message);
    const close = el("button", "dismiss", "×");
    close.addEventListener("click", () => {
      app.model = { ...app.model, notices: app.model.notices.filter((n) => n.id !== notice.id) };
      render(app.model);
    });
    row.appendChild(close);
    root.appendChild(row);
  }
}

function renderHistory(model: CanvasModel): void {
  const root = $("history");
  root.replaceChildren();
  for (const line of historyTimeline(model.session)) {
    root.appendChild(el("li", "history-entry", line));
  }
}

function render(model: CanvasModel): void {
  renderCells(model);
  renderNotices(model);
  renderHistory(model);
  $("story-preview").textContent = app.story;
}

app.subscribe(render);

$("new-session").addEventListener("click", () => {
  const seed = Number((document.getElementById("seed") as HTMLInputElement).value || "0");
  void app.start(seed).then(() => {
    const text = ($("seed-input") as HTMLInputElement).value.trim();
    if (text) void app.setStory([text]);
  });
});

$("replay").addEventListener("click", () => {
  void app.replay().then((story) => {
    $("story-preview").textContent = `replayed: ${story}`;
  });
});

$("export").addEventListener("click", () => {
  const blob = new Blob([JSON.stringify(app.exportState(), null, 2)], {
    type: "application/json",
  });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = `session-${app.session?.id ?? "export"}.json`;
  a.click();
});
