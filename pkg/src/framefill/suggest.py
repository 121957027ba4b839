"""Statistical frame suggestion from co-occurrence counts.

Counts frame transitions between adjacent sentences of the annotated corpus;
suggestions for a position score each inventory frame by its smoothed
conditional probability given the neighbours' frames, backing off to marginal
frequency when no neighbour is annotated. A statistical stand-in with the
same interface a neural suggester would use ("suggestion_source" names it in
responses).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .dataprep import AnnotatedStory

SUGGESTION_SOURCE = "frame-cooccurrence-v1"


class SuggestError(ValueError):
    pass


@dataclass
class SuggestionModel:
    inventory: tuple[str, ...]
    marginal: dict[str, int]
    forward: dict[str, dict[str, int]]   # frame at i -> counts of frames at i+1
    backward: dict[str, dict[str, int]]  # frame at i -> counts of frames at i-1
    smoothing: float = 0.5
    total: int = field(init=False)

    def __post_init__(self):
        self.total = sum(self.marginal.values())
        if self.total == 0:
            raise SuggestError("suggestion model has no frame observations")

    def _marginal_prob(self, fid: str) -> float:
        v = len(self.inventory)
        return (self.marginal.get(fid, 0) + self.smoothing) / (self.total + self.smoothing * v)

    def _conditional(self, table: dict[str, dict[str, int]], given: str, fid: str) -> float:
        row = table.get(given, {})
        denom = sum(row.values())
        return (row.get(fid, 0) + self.smoothing * self._marginal_prob(fid) * len(self.inventory)) / (
            denom + self.smoothing * len(self.inventory)
        )

    def score(self, fid: str, left: Sequence[str], right: Sequence[str]) -> float:
        evidence = []
        for g in left:
            evidence.append(self._conditional(self.forward, g, fid))
        for g in right:
            evidence.append(self._conditional(self.backward, g, fid))
        if not evidence:
            return self._marginal_prob(fid)
        return sum(evidence) / len(evidence)


def train_suggestion_model(
    stories: Sequence[AnnotatedStory], inventory: Sequence[str], smoothing: float = 0.5
) -> SuggestionModel:
    marginal: dict[str, int] = {}
    forward: dict[str, dict[str, int]] = {}
    backward: dict[str, dict[str, int]] = {}
    for story in stories:
        for i, frames in enumerate(story.frames):
            for fid in frames:
                marginal[fid] = marginal.get(fid, 0) + 1
            if i + 1 < len(story.frames):
                for a in frames:
                    for b in story.frames[i + 1]:
                        forward.setdefault(a, {})[b] = forward.setdefault(a, {}).get(b, 0) + 1
                        backward.setdefault(b, {})[a] = backward.setdefault(b, {}).get(a, 0) + 1
    return SuggestionModel(tuple(inventory), marginal, forward, backward, smoothing)


def suggest_frames(
    model: SuggestionModel,
    left_frames: Sequence[str],
    right_frames: Sequence[str],
    k: int,
    exclude: Sequence[str] = (),
) -> list[tuple[str, float]]:
    """Top-k distinct frames for a position given its neighbours' frames.
    Deterministic: ties break on frame id."""
    if model is None:
        raise SuggestError("suggestion model not trained")
    banned = set(exclude)
    scored = [
        (fid, model.score(fid, left_frames, right_frames))
        for fid in model.inventory
        if fid not in banned
    ]
    scored.sort(key=lambda x: (-x[1], x[0]))
    return scored[: max(k, 0)]
