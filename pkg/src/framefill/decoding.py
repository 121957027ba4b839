"""Beam search with Dynamic Beam Allocation over the constraint automaton,
plus the sentence-infilling decode protocol built on it.

Per step, every live hypothesis proposes its top-scoring continuations plus
all constraint-advancing tokens; candidates are bucketed into banks by number
of satisfied constraint sets and the beam is divided among banks, so progress
toward full satisfaction always holds slots. A hypothesis may only emit a
terminator once every constraint set is satisfied, which makes satisfaction a
hard guarantee on finished hypotheses.

decode() is a pure function of (request, scorer); concurrent decodes share
the immutable suite and scorer.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .bpe import BpeVocabulary, decode as bpe_decode, encode as bpe_encode
from .constraints import (
    ConstraintState,
    ConstraintSuite,
    Mode,
    advance,
    build_suite,
    forced_tokens,
    initial_state,
)
from .dataprep import masked_context
from .lexicon import FrameIndex
from .scoring import Scorer


class DecodeError(ValueError):
    pass


class RequestError(DecodeError):
    pass


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[int, ...]
    logprob: float
    cstate: ConstraintState
    finished: bool = False
    # set when the final token completed a constraint: the next token must
    # not extend that word's surface
    boundary_guard: bool = False


@dataclass(frozen=True)
class DecodeRequest:
    prefix: tuple[int, ...]
    suite: ConstraintSuite
    terminators: frozenset[int]
    beam_size: int = 20
    max_new_tokens: int = 48
    length_penalty: float = 0.0
    top_k: int | None = None

    def __post_init__(self):
        if self.beam_size < 1:
            raise RequestError("beam_size must be >= 1")
        if len(self.suite) and self.max_new_tokens < len(self.suite):
            raise RequestError(
                f"max_new_tokens={self.max_new_tokens} cannot satisfy "
                f"{len(self.suite)} constraint sets"
            )
        if not self.terminators:
            raise RequestError("at least one terminator token is required")


@dataclass
class DecodeResult:
    finished: list[Hypothesis]
    partials: list[Hypothesis]

    @property
    def success(self) -> bool:
        return bool(self.finished)

    @property
    def best(self) -> Hypothesis:
        if not self.finished:
            raise DecodeError("search failed: no finished hypothesis")
        return self.finished[0]


def ranking_score(hyp: Hypothesis, length_penalty: float) -> float:
    if length_penalty == 0.0:
        return hyp.logprob
    return hyp.logprob / (max(len(hyp.tokens), 1) ** length_penalty)


def _rank(hyps: list[Hypothesis], length_penalty: float) -> list[Hypothesis]:
    return sorted(
        hyps, key=lambda h: (-ranking_score(h, length_penalty), len(h.tokens), h.tokens)
    )


def _allocate(bank_sizes: dict[int, int], num_banks: int, beam: int) -> dict[int, int]:
    """Beam slots per bank: an even split with the remainder going to the
    highest banks; unfilled allocations carry to the adjacent lower bank, and
    anything still left fills back upward."""
    base, rem = divmod(beam, num_banks)
    alloc = {b: base + (1 if b >= num_banks - rem else 0) for b in range(num_banks)}
    take: dict[int, int] = {}
    carry = 0
    for b in range(num_banks - 1, -1, -1):
        want = alloc[b] + carry
        take[b] = min(want, bank_sizes.get(b, 0))
        carry = want - take[b]
    if carry:
        for b in range(num_banks):
            spare = bank_sizes.get(b, 0) - take[b]
            grab = min(carry, spare)
            take[b] += grab
            carry -= grab
            if not carry:
                break
    return take


def decode(
    request: DecodeRequest,
    scorer: Scorer,
    trace: list[dict] | None = None,
) -> DecodeResult:
    suite = request.suite
    n = len(suite)
    beam = request.beam_size
    top_k = request.top_k if request.top_k is not None else beam
    vocab_size = scorer.vocabulary_size
    token_order = np.arange(vocab_size)

    live: list[Hypothesis] = [Hypothesis((), 0.0, initial_state(suite))]
    finished: list[Hypothesis] = []
    prefix = list(request.prefix)

    for step in range(request.max_new_tokens):
        if not live:
            break
        # (total logprob, parent index, token, next state or None, is terminator)
        candidates: list[tuple[float, int, int, ConstraintState | None, bool]] = []
        for hi, hyp in enumerate(live):
            row = scorer.score(prefix + list(hyp.tokens))
            k = min(top_k, vocab_size)
            order = np.lexsort((token_order, -row))
            forced = forced_tokens(hyp.cstate, suite)
            complete = hyp.cstate.satisfied_count == n
            proposed = [int(t) for t in order[:k]]
            top_set = set(proposed)
            proposed.extend(t for t in sorted(forced) if t not in top_set)
            for tok in proposed:
                if tok in request.terminators:
                    if not complete:
                        continue  # hard finish rule
                    candidates.append((hyp.logprob + float(row[tok]), hi, tok, None, True))
                    continue
                if hyp.boundary_guard and tok in suite.word_start_ids:
                    continue
                if not hyp.cstate.active and tok not in forced:
                    # cannot change match state: defer building the new state
                    candidates.append((hyp.logprob + float(row[tok]), hi, tok, None, False))
                else:
                    nstate = advance(hyp.cstate, tok, suite)
                    candidates.append((hyp.logprob + float(row[tok]), hi, tok, nstate, False))
        if not candidates:
            break

        banks: dict[int, list[tuple]] = {}
        for cand in candidates:
            lp, hi, tok, nstate, is_term = cand
            count = (nstate or live[hi].cstate).satisfied_count
            banks.setdefault(count, []).append(cand)
        for bucket in banks.values():
            bucket.sort(key=lambda c: (-c[0], c[2], c[1]))

        take = _allocate({b: len(c) for b, c in banks.items()}, n + 1, beam)
        if trace is not None:
            selected = sum(take.values())
            trace.append({
                "step": step,
                "bank_sizes": {b: len(c) for b, c in sorted(banks.items())},
                "allocation": {b: t for b, t in sorted(take.items()) if t},
                "pruned": len(candidates) - selected,
                "live": len(live),
                "finished": len(finished),
            })

        new_live: list[Hypothesis] = []
        for b in sorted(banks, reverse=True):
            for lp, hi, tok, nstate, is_term in banks[b][: take.get(b, 0)]:
                parent = live[hi]
                if is_term:
                    finished.append(
                        Hypothesis(parent.tokens + (tok,), lp, parent.cstate, finished=True)
                    )
                    continue
                if nstate is None:
                    # deferred no-op advance: mirrors advance() when nothing
                    # was active and the token opened no match
                    st = parent.cstate
                    nstate = ConstraintState(
                        completed_mask=st.completed_mask,
                        active=(),
                        window=(),
                        prev_ends_word=tok in suite.word_end_ids,
                        position=st.position + 1,
                    )
                new_live.append(
                    Hypothesis(
                        parent.tokens + (tok,),
                        lp,
                        nstate,
                        boundary_guard=nstate.satisfied_count > parent.cstate.satisfied_count,
                    )
                )
        new_live.sort(key=lambda h: (-h.logprob, h.tokens))
        live = new_live[:beam]

    return DecodeResult(
        finished=_rank(finished, request.length_penalty),
        partials=_rank(live, request.length_penalty),
    )


def sample_unconstrained(
    prefix: Sequence[int],
    scorer: Scorer,
    terminators: frozenset[int],
    max_new_tokens: int,
    rng,
) -> list[int]:
    """Ancestral sampling baseline; no constraint machinery."""
    out: list[int] = []
    for _ in range(max_new_tokens):
        probs = np.exp(scorer.score(list(prefix) + out))
        probs = probs / probs.sum()
        tok = int(rng.choices(range(len(probs)), weights=probs)[0])
        out.append(tok)
        if tok in terminators:
            break
    return out


@dataclass(frozen=True)
class InfillTask:
    """Context sentences with blank positions and per-blank frame sequences."""

    sentences: tuple[str, ...]
    blanks: tuple[int, ...]
    frames: tuple[tuple[str, ...], ...]

    @classmethod
    def create(
        cls,
        sentences: Sequence[str],
        blanks: Sequence[int],
        frames: Sequence[Sequence[str]] | None = None,
    ) -> "InfillTask":
        blanks = tuple(blanks)
        if not blanks:
            raise RequestError("an infill task needs at least one blank")
        if len(set(blanks)) != len(blanks):
            raise RequestError("duplicate blank indices")
        for b in blanks:
            if not 0 <= b < len(sentences):
                raise RequestError(f"blank index {b} out of range")
        if frames is None:
            frames = [()] * len(blanks)
        if len(frames) != len(blanks):
            raise RequestError("frames must align with blanks")
        return cls(tuple(sentences), blanks, tuple(tuple(f) for f in frames))


@dataclass
class InfillOptions:
    mode: Mode = Mode.UNORDERED
    beam_size: int = 20
    max_new_tokens: int = 48
    num_candidates: int = 5
    length_penalty: float = 0.0
    top_k: int | None = None
    frame_prompt: bool = False


@dataclass
class InfillCandidate:
    text: str
    tokens: tuple[int, ...]
    logprob: float
    score: float
    satisfied: tuple[str, ...]


@dataclass
class BlankResult:
    blank: int
    candidates: list[InfillCandidate]
    search_failed: bool
    partials: list[InfillCandidate] = field(default_factory=list)


def _satisfied_frames(tokens: Sequence[int], suite: ConstraintSuite) -> tuple[str, ...]:
    st = initial_state(suite)
    for tok in tokens:
        st = advance(st, tok, suite)
    out = []
    for i, trie in enumerate(suite.tries):
        if st.completed_mask >> i & 1 and trie.frame is not None:
            out.append(trie.frame.id)
    return tuple(out)


def _candidate(hyp: Hypothesis, suite: ConstraintSuite, vocab: BpeVocabulary,
               terminators: frozenset[int], length_penalty: float) -> InfillCandidate:
    body = tuple(t for t in hyp.tokens if t not in terminators)
    return InfillCandidate(
        text=bpe_decode(body, vocab).strip(),
        tokens=hyp.tokens,
        logprob=hyp.logprob,
        score=ranking_score(hyp, length_penalty),
        satisfied=_satisfied_frames(hyp.tokens, suite),
    )


def infill(
    task: InfillTask,
    frame_index: FrameIndex,
    vocab: BpeVocabulary,
    scorer: Scorer,
    options: InfillOptions | None = None,
    trace: list[dict] | None = None,
) -> list[BlankResult]:
    """Decode every blank left to right; each later blank is conditioned on
    the chosen text (and, when prompting, the frame tokens) of earlier ones."""
    options = options or InfillOptions()
    task = InfillTask.create(task.sentences, task.blanks, task.frames)
    sep = vocab.special_id("[sep]")
    terminators = frozenset({sep, vocab.special_id("[eos]")})
    ordered_blanks = sorted(range(len(task.blanks)), key=lambda i: task.blanks[i])

    prefix = tuple(bpe_encode(masked_context(task.sentences, task.blanks) + " [sep]", vocab))
    results: list[BlankResult] = []
    for bi in ordered_blanks:
        blank = task.blanks[bi]
        frame_ids = task.frames[bi]
        frames = [frame_index.resolve(fid) for fid in frame_ids]
        suite = build_suite(frames, options.mode, vocab)
        if options.frame_prompt and frame_ids:
            prompt = " " + " ".join(fr.id for fr in frames)
            prefix = prefix + tuple(bpe_encode(prompt, vocab))
        request = DecodeRequest(
            prefix=prefix,
            suite=suite,
            terminators=terminators,
            beam_size=options.beam_size,
            max_new_tokens=options.max_new_tokens,
            length_penalty=options.length_penalty,
            top_k=options.top_k,
        )
        result = decode(request, scorer, trace=trace)
        cands = [
            _candidate(h, suite, vocab, terminators, options.length_penalty)
            for h in result.finished[: options.num_candidates]
        ]
        partials = [
            _candidate(h, suite, vocab, terminators, options.length_penalty)
            for h in result.partials[: options.num_candidates]
        ]
        results.append(BlankResult(blank, cands, not result.success, partials))
        # feed the top choice (or best partial) into subsequent prefixes
        feed = result.finished[0] if result.success else (
            result.partials[0] if result.partials else None
        )
        if feed is not None:
            tokens = feed.tokens
            if not feed.finished:
                tokens = tokens + (sep,)
            prefix = prefix + tokens
    return sorted(results, key=lambda r: r.blank)


@dataclass
class DiversifiedCandidate:
    combination: int
    rank: int
    candidate: InfillCandidate


@dataclass
class DiversifiedResult:
    candidates: list[DiversifiedCandidate]
    failed_combinations: list[int]


def decode_diversified(
    request: DecodeRequest,
    scorer: Scorer,
    plan: "SubsetPlan",
    vocab: BpeVocabulary,
    num_candidates: int = 8,
) -> DiversifiedResult:
    """Run one constrained search per LU-subset combination and interleave
    the results round-robin (all top-1s in combination order, then top-2s),
    dropping duplicate token sequences."""
    from .diversify import restricted_frames  # local import to avoid a cycle

    suites = [
        build_suite(restricted_frames(plan, combo), request.suite.mode, vocab)
        for combo in plan.combinations
    ]
    per_combo: list[list[Hypothesis]] = []
    failed: list[int] = []
    for ci, suite in enumerate(suites):
        result = decode(replace(request, suite=suite), scorer)
        per_combo.append(result.finished)
        if not result.success:
            failed.append(ci)

    out: list[DiversifiedCandidate] = []
    seen: set[tuple[int, ...]] = set()
    rank = 0
    while len(out) < num_candidates:
        emitted = False
        for ci, hyps in enumerate(per_combo):
            if rank < len(hyps):
                emitted = True
                hyp = hyps[rank]
                if hyp.tokens in seen:
                    continue
                seen.add(hyp.tokens)
                out.append(DiversifiedCandidate(
                    ci, rank,
                    _candidate(hyp, suites[ci], vocab, request.terminators,
                               request.length_penalty),
                ))
                if len(out) >= num_candidates:
                    break
        if not emitted:
            break
        rank += 1
    return DiversifiedResult(out, failed)
