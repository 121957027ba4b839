"""Frame-fidelity metrics via a lexical trigger oracle, and the perplexity
evaluation harness.

The trigger oracle asks only whether some LU variant of a frame occurs
token-aligned in the text, so it overestimates fidelity relative to a
sense-aware parser; reports label their numbers "lexical fidelity"
accordingly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from random import Random
from typing import Sequence

import regex as re

from .bpe import BpeVocabulary, encode, tokenize_constraint
from .constraints import word_char_tables
from .dataprep import FflExample, pad_frame_slots
from .lexicon import Frame, FrameIndex
from .scoring import Scorer, ScorerError, perplexity

MASKINGS = ("infill_only", "plus_special", "five_slot")


class EvalError(ValueError):
    pass


def _contains_at_word_edges(
    ids: Sequence[int],
    needle: Sequence[int],
    starts_word: frozenset[int],
    ends_word: frozenset[int],
) -> bool:
    # token-aligned occurrence whose surface sits on word boundaries: a
    # variant's BPE split can align inside a longer word ("bake" in "bakery"),
    # which must not count as a trigger
    n = len(needle)
    if n == 0 or n > len(ids):
        return False
    needle = list(needle)
    first_in_word = needle[0] in starts_word
    for i in range(len(ids) - n + 1):
        if list(ids[i : i + n]) != needle:
            continue
        left_ok = not first_in_word or i == 0 or ids[i - 1] not in ends_word
        right_ok = i + n == len(ids) or ids[i + n] not in starts_word
        if left_ok and right_ok:
            return True
    return False


def lexical_trigger_check(text: str, frame: Frame, vocab: BpeVocabulary) -> bool:
    """True iff the tokenization of `text` contains a token-aligned,
    word-boundary-clean occurrence of any LU variant surface form."""
    if not text:
        return False
    ids = encode(text, vocab)
    starts_word, ends_word = word_char_tables(vocab)
    for variant in sorted(frame.variant_map()):
        forms = tokenize_constraint(variant, vocab)
        capitalized = variant[0].upper() + variant[1:]
        bare_cap = encode(capitalized, vocab)
        if bare_cap and bare_cap not in forms:
            forms.append(bare_cap)
        for seq in forms:
            if _contains_at_word_edges(ids, seq, starts_word, ends_word):
                return True
    return False


def first_trigger_offset(text: str, frame: Frame) -> int | None:
    """Character offset of the earliest word-boundary occurrence of any LU
    variant, or None. Used to derive gold trigger spans for annotations."""
    best: int | None = None
    lowered = text.lower()
    for variant in frame.variant_map():
        pattern = r"(?<![\p{L}\p{N}])" + re.escape(variant) + r"(?![\p{L}\p{N}])"
        m = re.search(pattern, lowered)
        if m and (best is None or m.start() < best):
            best = m.start()
    return best


@dataclass
class FidelityReport:
    targets: list[tuple[str, ...]]
    matched: list[tuple[str, ...]]
    recall: float
    perfect_recall: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "metric": "lexical fidelity",
                "recall": self.recall,
                "perfect_recall": self.perfect_recall,
                "examples": [
                    {"targets": list(t), "matched": list(m)}
                    for t, m in zip(self.targets, self.matched)
                ],
            },
            indent=2,
        )

    def to_table(self) -> str:
        rows = [
            ("Lexical fidelity", "Recall", "Perfect Recall"),
            ("all examples", f"{self.recall:.3f}", f"{self.perfect_recall:.3f}"),
        ]
        return render_table(rows)


def fidelity(
    outputs: Sequence[tuple[str, Sequence[str]]],
    frame_index: FrameIndex,
    vocab: BpeVocabulary,
) -> FidelityReport:
    """Recall over target frames and the rate of perfectly matched sets."""
    if not outputs:
        raise EvalError("fidelity needs at least one output")
    targets: list[tuple[str, ...]] = []
    matched: list[tuple[str, ...]] = []
    hit = 0
    total = 0
    perfect = 0
    for text, frame_ids in outputs:
        frame_ids = tuple(frame_ids)
        got = tuple(
            fid for fid in frame_ids
            if lexical_trigger_check(text, frame_index.resolve(fid), vocab)
        )
        targets.append(frame_ids)
        matched.append(got)
        hit += len(got)
        total += len(frame_ids)
        if len(got) == len(frame_ids):
            perfect += 1
    return FidelityReport(
        targets=targets,
        matched=matched,
        recall=hit / total if total else 0.0,
        perfect_recall=perfect / len(outputs),
    )


def sample_frame_subsets(
    frame_sets: Sequence[Sequence[str]], size: int, seed: int
) -> list[tuple[str, ...]]:
    """Fixed-size target subsets for evaluating fewer-frame conditioning
    against multi-frame targets. The seed is required: subset sampling is
    part of the evaluation definition."""
    rng = Random(seed)
    out = []
    for frames in frame_sets:
        frames = list(frames)
        k = min(size, len(frames))
        out.append(tuple(rng.sample(frames, k)) if k else ())
    return out


def _masks(ids: Sequence[int], vocab: BpeVocabulary, masking: str) -> list[bool]:
    sep = vocab.special_id("[sep]")
    try:
        first_sep = ids.index(sep)
    except ValueError:
        first_sep = len(ids)
    special = [vocab.is_special(t) for t in ids]
    if masking == "infill_only":
        return [(i > first_sep and not special[i]) for i in range(len(ids))]
    if masking in ("plus_special", "five_slot"):
        return [(i > first_sep and not special[i]) or special[i] for i in range(len(ids))]
    raise EvalError(f"unknown masking {masking!r}")


def eval_ppl_suite(
    scorer: Scorer,
    examples: Sequence[FflExample],
    vocab: BpeVocabulary,
    maskings: Sequence[str] = MASKINGS,
    slots: int = 5,
) -> dict[str, float | None]:
    """Perplexity per masking regime over the example set. A row with no
    included tokens reports None rather than failing."""
    out: dict[str, float | None] = {}
    for masking in maskings:
        exs = [pad_frame_slots(ex, slots) for ex in examples] if masking == "five_slot" else examples
        seqs = [encode(ex.surface, vocab) for ex in exs]
        masks = [_masks(seq, vocab, masking) for seq in seqs]
        if not any(any(m) for m in masks):
            out[masking] = None
            continue
        try:
            out[masking] = perplexity(scorer, seqs, masks)
        except ScorerError:
            out[masking] = None
    return out


def render_table(rows: Sequence[Sequence[str]]) -> str:
    """Aligned-column text table (first row is the header)."""
    if not rows:
        return ""
    widths = [max(len(str(r[c])) for r in rows) for c in range(len(rows[0]))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(str(v).ljust(w) for v, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_ppl_report(tables: dict[str, dict[str, float | None]]) -> str:
    """Rows are maskings, columns are dataset regimes."""
    regimes = list(tables)
    label = {
        "infill_only": "Infill Text",
        "plus_special": "  + Sp Toks",
        "five_slot": "  w/ 5 Fr Slots",
    }
    rows: list[Sequence[str]] = [["Perplexity"] + regimes]
    for masking in MASKINGS:
        row = [label.get(masking, masking)]
        for regime in regimes:
            val = tables[regime].get(masking)
            row.append("-" if val is None else f"{val:.2f}")
        rows.append(row)
    return render_table(rows)
