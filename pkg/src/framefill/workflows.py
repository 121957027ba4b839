"""Interactive use-case flows over the core decode machinery: lexical frame
annotation (the parser substitute), diverse candidate generation around a
position, and counterfactual story rewriting."""

from __future__ import annotations

from random import Random
from typing import Sequence

from .decoding import BlankResult, InfillOptions, InfillTask, infill
from .evaluation import first_trigger_offset, lexical_trigger_check
from .runtime import RuntimeContext
from .suggest import suggest_frames

COUNTERFACTUAL_POLICY = "per-sentence sample of min(2, available) parsed frames"


def annotate_frames(rt: RuntimeContext, text: str) -> list[str]:
    """Frames lexically triggered by the text, in first-trigger order."""
    hits = []
    for fr in rt.frames:
        if lexical_trigger_check(text, fr, rt.vocab):
            off = first_trigger_offset(text, fr)
            hits.append((off if off is not None else 1 << 30, fr.id))
    return [fid for _, fid in sorted(hits)]


def neighbor_frames(rt: RuntimeContext, sentences: Sequence[str], position: int
                    ) -> tuple[list[str], list[str]]:
    """Annotated frames of the sentences flanking an insertion index."""
    left: list[str] = []
    right: list[str] = []
    if position - 1 >= 0 and position - 1 < len(sentences):
        left = annotate_frames(rt, sentences[position - 1])
    if position < len(sentences):
        right = annotate_frames(rt, sentences[position])
    return left, right


def diverse_candidates(
    rt: RuntimeContext,
    sentences: Sequence[str],
    position: int,
    k: int,
    options: InfillOptions | None = None,
    per_frame: int = 3,
) -> list[dict]:
    """Suggest the top-k frames for a new sentence at `position`, then run a
    separate constrained search per suggested frame."""
    options = options or InfillOptions()
    left, right = neighbor_frames(rt, sentences, position)
    suggested = suggest_frames(rt.suggestion, left, right, k)
    augmented = list(sentences[:position]) + ["[blank]"] + list(sentences[position:])
    groups: list[dict] = []
    for fid, score in suggested:
        task = InfillTask.create(augmented, [position], [[fid]])
        opts = InfillOptions(**{**options.__dict__, "num_candidates": per_frame})
        result = infill(task, rt.frame_index, rt.vocab, rt.scorer, opts)[0]
        groups.append({
            "frame": fid,
            "suggestion_score": score,
            "candidates": result.candidates,
            "search_failed": result.search_failed,
        })
    return groups


def counterfactual_rewrite(
    rt: RuntimeContext,
    sentences: Sequence[str],
    replace_index: int,
    replacement: str,
    frames_per_sentence: Sequence[Sequence[str]] | None = None,
    seed: int = 0,
    options: InfillOptions | None = None,
) -> dict:
    """Replace one sentence and rewrite everything after it, conditioned on a
    sampled subset of the frames parsed from the original continuation.
    Frames may be supplied by the caller; otherwise they come from the
    lexical annotator."""
    options = options or InfillOptions()
    if not 0 <= replace_index < len(sentences):
        raise ValueError(f"replace_index {replace_index} out of range")
    following = list(range(replace_index + 1, len(sentences)))
    if frames_per_sentence is None:
        frames_per_sentence = [annotate_frames(rt, sentences[j]) for j in following]
    if len(frames_per_sentence) != len(following):
        raise ValueError("frames_per_sentence must cover every rewritten sentence")
    rng = Random(seed)
    sampled = [
        rng.sample(list(frames), min(2, len(frames))) for frames in frames_per_sentence
    ]
    base = list(sentences)
    base[replace_index] = replacement
    rewritten = list(base)
    results: list[BlankResult] = []
    if following:
        task = InfillTask.create(base, following, sampled)
        results = infill(task, rt.frame_index, rt.vocab, rt.scorer, options)
        for res in results:
            chosen = res.candidates[0] if res.candidates else (
                res.partials[0] if res.partials else None
            )
            if chosen is not None:
                rewritten[res.blank] = chosen.text
    return {
        "sentences": rewritten,
        "rewrites": results,
        "parsed_frames": [list(f) for f in frames_per_sentence],
        "sampled_frames": [list(s) for s in sampled],
        "metadata": {"sampling_policy": COUNTERFACTUAL_POLICY, "seed": seed},
    }
