"""Interactive session state: a story canvas of text/blank cells, per-blank
frame selections, candidate lists, and an append-only event history that can
be replayed deterministically against the same artifacts and seed.

Sessions persist as JSON files; writes are serialized per session id.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .decoding import InfillOptions, InfillTask, infill
from .suggest import SUGGESTION_SOURCE, suggest_frames
from .workflows import annotate_frames, neighbor_frames


class SessionError(ValueError):
    pass


@dataclass
class SessionState:
    id: str
    seed: int = 0
    cells: list[dict] = field(default_factory=list)
    candidates: dict[str, list[dict]] = field(default_factory=dict)
    history: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "seed": self.seed,
            "cells": self.cells,
            "candidates": self.candidates,
            "history": self.history,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SessionState":
        return cls(
            id=data["id"],
            seed=int(data.get("seed", 0)),
            cells=list(data.get("cells", [])),
            candidates=dict(data.get("candidates", {})),
            history=list(data.get("history", [])),
        )

    def sentences(self) -> list[str]:
        return [c["text"] if c["kind"] == "text" else "[blank]" for c in self.cells]

    def story(self) -> str:
        return " ".join(c["text"] for c in self.cells if c["kind"] == "text")


def _text_cell(text: str) -> dict:
    return {"kind": "text", "text": text, "frames": []}


def _blank_cell(frames: Sequence[str] = ()) -> dict:
    return {"kind": "blank", "text": None, "frames": list(frames)}


def apply_event(rt, state: SessionState, event: dict, record: bool = True) -> dict:
    """Execute one canvas event against the runtime, mutate the state, and
    append the event to history. Returns the event result payload."""
    etype = event.get("type")
    result: dict[str, Any] = {}
    if etype == "set_story":
        state.cells = [_text_cell(s) for s in event["sentences"]]
        state.candidates = {}
    elif etype == "insert_blank":
        pos = int(event["position"])
        if not 0 <= pos <= len(state.cells):
            raise SessionError(f"position {pos} out of range")
        state.cells.insert(pos, _blank_cell(event.get("frames", ())))
    elif etype == "set_frames":
        cell = _cell_at(state, int(event["position"]))
        cell["frames"] = list(event.get("frames", ()))
    elif etype == "suggest":
        pos = int(event["position"])
        if 0 <= pos < len(state.cells) and state.cells[pos]["kind"] == "blank":
            sentences = state.sentences()
            left = annotate_frames(rt, sentences[pos - 1]) if pos > 0 else []
            right = (
                annotate_frames(rt, sentences[pos + 1]) if pos + 1 < len(sentences) else []
            )
        else:
            left, right = neighbor_frames(rt, state.sentences(), pos)
        ranked = suggest_frames(rt.suggestion, left, right, int(event.get("k", 5)))
        result = {
            "frames": [{"id": fid, "score": score} for fid, score in ranked],
            "suggestion_source": SUGGESTION_SOURCE,
        }
    elif etype == "request_candidates":
        pos = int(event["position"])
        cell = _cell_at(state, pos)
        if cell["kind"] != "blank":
            raise SessionError(f"cell {pos} is not a blank")
        opts = InfillOptions(**event.get("options", {}))
        task = InfillTask.create(state.sentences(), [pos], [cell["frames"]])
        blank_result = infill(task, rt.frame_index, rt.vocab, rt.scorer, opts)[0]
        cands = [
            {
                "id": i,
                "text": c.text,
                "logprob": c.logprob,
                "satisfied": list(c.satisfied),
                "frames": list(cell["frames"]),
                "options": event.get("options", {}),
            }
            for i, c in enumerate(blank_result.candidates)
        ]
        state.candidates[str(pos)] = cands
        result = {"candidates": cands, "search_failed": blank_result.search_failed}
        if blank_result.search_failed:
            result["partials"] = [
                {"text": c.text, "logprob": c.logprob, "satisfied": list(c.satisfied)}
                for c in blank_result.partials
            ]
    elif etype == "accept":
        pos = int(event["position"])
        cell = _cell_at(state, pos)
        stored = state.candidates.get(str(pos), [])
        cid = int(event["candidate"])
        if not 0 <= cid < len(stored):
            raise SessionError(f"candidate {cid} not available for cell {pos}")
        cell["kind"] = "text"
        cell["text"] = stored[cid]["text"]
        result = {"text": cell["text"]}
    else:
        raise SessionError(f"unknown event type {etype!r}")
    if record:
        state.history.append({"event": event, "result_kind": etype})
    return result


def _cell_at(state: SessionState, pos: int) -> dict:
    if not 0 <= pos < len(state.cells):
        raise SessionError(f"position {pos} out of range")
    return state.cells[pos]


def replay(rt, state: SessionState) -> SessionState:
    """Re-execute the history on a fresh state; deterministic given the same
    artifacts and seed."""
    fresh = SessionState(id=state.id, seed=state.seed)
    for entry in state.history:
        apply_event(rt, fresh, entry["event"], record=True)
    return fresh


class SessionStore:
    """JSON-file-backed store with single-writer semantics per session."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        safe = "".join(c for c in session_id if c.isalnum() or c in "-_")
        if safe != session_id or not safe:
            raise SessionError(f"invalid session id {session_id!r}")
        return self.directory / f"{safe}.json"

    def create(self, seed: int = 0) -> SessionState:
        state = SessionState(id=uuid.uuid4().hex, seed=seed)
        self.save(state)
        return state

    def save(self, state: SessionState) -> None:
        path = self._path(state.id)
        path.write_text(json.dumps(state.to_json(), ensure_ascii=False, indent=2))

    def get(self, session_id: str) -> SessionState:
        path = self._path(session_id)
        if not path.exists():
            raise SessionError(f"no such session {session_id!r}")
        return SessionState.from_json(json.loads(path.read_text()))

    def import_state(self, data: dict) -> SessionState:
        state = SessionState.from_json(data)
        if not state.id:
            state.id = uuid.uuid4().hex
        self.save(state)
        return state
