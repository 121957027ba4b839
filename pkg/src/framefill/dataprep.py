"""Training/eval example construction from an annotated story corpus.

Examples follow the infilling-by-language-modeling layout: the context with
[blank] markers, a [sep], then each gold infill terminated by [sep]. The
frame-guided variants prefix each infill with frame id tokens: S picks one
frame, M samples a geometrically-sized set, A lists all parsed frames.
Ordered variants list frames by gold first-trigger position; unordered ones
sample the order uniformly.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from random import Random
from typing import Iterable, Sequence

from .lexicon import FrameIndex

log = logging.getLogger(__name__)

VARIANTS = ("ILM", "S", "M", "A")
GEOMETRIC_P = 0.4
FRAME_SLOTS = 5
NO_FRAME = "[no_frame]"


class DataprepError(ValueError):
    pass


def masked_context(sentences: Sequence[str], blanks: Iterable[int]) -> str:
    blankset = set(blanks)
    return " ".join("[blank]" if i in blankset else s for i, s in enumerate(sentences))


def sample_geometric(rng: Random, p: float = GEOMETRIC_P) -> int:
    """Geometric draw with support {1, 2, ...} and mean 1/p."""
    return 1 + int(math.log(1.0 - rng.random()) / math.log(1.0 - p))


@dataclass(frozen=True)
class AnnotatedStory:
    sentences: tuple[str, ...]
    frames: tuple[tuple[str, ...], ...]
    spans: tuple[tuple[tuple[str, int], ...], ...] | None = None
    title: str | None = None

    def __post_init__(self):
        if len(self.sentences) != len(self.frames):
            raise DataprepError("frames must align with sentences")
        if self.spans is not None and len(self.spans) != len(self.sentences):
            raise DataprepError("spans must align with sentences")


@dataclass(frozen=True)
class FflExample:
    context: str
    blank_indices: tuple[int, ...]
    frames_per_blank: tuple[tuple[str, ...], ...]
    infills: tuple[str, ...]
    variant: str
    ordered: bool
    order_policy: str
    slots: int | None = None
    truncated: bool = False

    @property
    def surface(self) -> str:
        segments = []
        for frames, infill in zip(self.frames_per_blank, self.infills):
            frames = list(frames)
            if self.slots is not None:
                frames = frames[: self.slots]
                frames += [NO_FRAME] * (self.slots - len(frames))
            prefix = " ".join(frames)
            segments.append((prefix + " " if prefix else "") + infill)
        return self.context + " [sep] " + " [sep] ".join(segments) + " [sep]"

    def metadata(self) -> dict:
        return {
            "variant": self.variant,
            "ordered": self.ordered,
            "order_policy": self.order_policy,
            "blanks": list(self.blank_indices),
            "frames": [list(f) for f in self.frames_per_blank],
            "slots": self.slots,
            "truncated": self.truncated,
        }


def _trigger_order(frames: Sequence[str], story: AnnotatedStory, sentence: int) -> tuple[list[str], str]:
    if story.spans is not None:
        offsets = {fid: off for fid, off in story.spans[sentence]}
        if all(f in offsets for f in frames):
            return sorted(frames, key=lambda f: (offsets[f], f)), "spans"
    # annotation order as provided in the file
    order = [f for f in story.frames[sentence] if f in set(frames)]
    return order, "file"


def _pick_frames(
    story: AnnotatedStory, sentence: int, variant: str, ordered: bool, rng: Random
) -> tuple[list[str], str] | None:
    available = list(story.frames[sentence])
    if variant == "ILM":
        return [], "none"
    if not available:
        return None  # unproducible for this sentence
    if variant == "S":
        chosen = [rng.choice(available)]
    elif variant == "M":
        g = sample_geometric(rng)
        chosen = rng.sample(available, min(g, len(available)))
    elif variant == "A":
        chosen = list(available)
    else:
        raise DataprepError(f"unknown variant {variant!r}")
    if ordered:
        return _trigger_order(chosen, story, sentence)
    shuffled = list(chosen)
    rng.shuffle(shuffled)
    return shuffled, "sampled"


def make_example(
    story: AnnotatedStory,
    blank_indices: Sequence[int],
    variant: str,
    rng: Random,
    ordered: bool = False,
) -> FflExample | None:
    """Build one example, or None when the variant needs frames and a blank
    sentence has no annotation (skip signal, not an error)."""
    if variant not in VARIANTS:
        raise DataprepError(f"variant must be one of {VARIANTS}")
    blanks = sorted(set(blank_indices))
    if not blanks:
        raise DataprepError("at least one blank index is required")
    for b in blanks:
        if not 0 <= b < len(story.sentences):
            raise DataprepError(f"blank index {b} out of range")
    frames_per_blank: list[tuple[str, ...]] = []
    policies: set[str] = set()
    for b in blanks:
        picked = _pick_frames(story, b, variant, ordered, rng)
        if picked is None:
            return None
        frames, policy = picked
        frames_per_blank.append(tuple(frames))
        policies.add(policy)
    return FflExample(
        context=masked_context(story.sentences, blanks),
        blank_indices=tuple(blanks),
        frames_per_blank=tuple(frames_per_blank),
        infills=tuple(story.sentences[b] for b in blanks),
        variant=variant,
        ordered=ordered,
        order_policy="+".join(sorted(policies)),
    )


def pad_frame_slots(example: FflExample, slots: int = FRAME_SLOTS) -> FflExample:
    """Pad every infill's frame prefix to exactly `slots` tokens with
    [no_frame]; overfull prefixes are truncated with a logged warning."""
    truncated = False
    for frames in example.frames_per_blank:
        if len(frames) > slots:
            truncated = True
            log.warning(
                "example has %d frame tokens, truncating to %d slots", len(frames), slots
            )
    return replace(example, slots=slots, truncated=truncated)


def slice_context(
    story: AnnotatedStory, blank_index: int, rng: Random
) -> tuple[AnnotatedStory, int]:
    """Random contiguous slice (length 1..n) that contains the blank
    sentence; returns the sliced story and the blank's new index."""
    n = len(story.sentences)
    if not 0 <= blank_index < n:
        raise DataprepError(f"blank index {blank_index} out of range")
    length = rng.randint(1, n)
    lo = max(0, blank_index - length + 1)
    hi = min(blank_index, n - length)
    start = rng.randint(lo, hi)
    sliced = AnnotatedStory(
        sentences=story.sentences[start : start + length],
        frames=story.frames[start : start + length],
        spans=story.spans[start : start + length] if story.spans is not None else None,
        title=story.title,
    )
    return sliced, blank_index - start


def strip_titles(record: dict) -> AnnotatedStory | None:
    """Drop the title field of a raw corpus record; None for empty records."""
    if not record or not record.get("sentences"):
        return None
    spans = record.get("spans")
    return AnnotatedStory(
        sentences=tuple(record["sentences"]),
        frames=tuple(tuple(f) for f in record.get("frames", [[]] * len(record["sentences"]))),
        spans=tuple(tuple((fid, off) for fid, off in s) for s in spans) if spans else None,
        title=None,
    )


def load_stories(
    path: str | Path, frame_index: FrameIndex | None = None
) -> list[AnnotatedStory]:
    """Read the JSON-lines corpus; unknown frame ids are logged and dropped."""
    stories: list[AnnotatedStory] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataprepError(f"{path}: line {lineno}: {e.msg}") from e
            story = strip_titles(record)
            if story is None:
                continue
            if frame_index is not None:
                kept = []
                for sent_frames in story.frames:
                    known = tuple(fid for fid in sent_frames if fid in frame_index)
                    for fid in sent_frames:
                        if fid not in frame_index:
                            log.warning("%s line %d: dropping unknown frame %s", path, lineno, fid)
                    kept.append(known)
                story = replace(story, frames=tuple(kept))
            stories.append(story)
    return stories


def generate_examples(
    stories: Sequence[AnnotatedStory],
    variant: str,
    rng: Random,
    ordered: bool = False,
    blanks: str = "each",
    slots: int | None = None,
) -> list[FflExample]:
    """Deterministic corpus sweep: `blanks="each"` emits one example per
    (story, blank position); `"all"` masks every sentence at once."""
    out: list[FflExample] = []
    for story in stories:
        if blanks == "all":
            positions: list[Sequence[int]] = [range(len(story.sentences))]
        else:
            positions = [[i] for i in range(len(story.sentences))]
        for pos in positions:
            ex = make_example(story, pos, variant, rng, ordered=ordered)
            if ex is None:
                continue
            if slots is not None:
                ex = pad_frame_slots(ex, slots)
            out.append(ex)
    return out


def write_examples(
    examples: Sequence[FflExample], text_path: str | Path, meta_path: str | Path
) -> None:
    """Plain-text one example per line, plus a JSON-lines metadata sidecar."""
    with open(text_path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(ex.surface + "\n")
    with open(meta_path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(json.dumps(ex.metadata(), ensure_ascii=False) + "\n")
