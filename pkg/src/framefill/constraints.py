"""List-of-tries constraint automaton.

One trie per frame holds the token sequences of every LU variant surface
form; a suite tracks per-hypothesis satisfaction under ordered or unordered
semantics. Matching is greedy consumption: the automaton follows the longest
current match and recovers from dead ends by re-matching the longest viable
suffix (unwinding). Completed tries are never pruned from the output space;
their tokens simply stop changing state.

Tries are immutable after build and shareable; states are small values copied
per hypothesis.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

from .bpe import BpeVocabulary, UnknownTokenId, decode, tokenize_constraint
from .lexicon import Frame, LexicalUnit

ROOT = 0


class ConstraintError(ValueError):
    pass


class Mode(str, Enum):
    ORDERED = "ordered"
    UNORDERED = "unordered"


class ConstraintTrie:
    """Arena-backed token trie; terminals carry the LU that produced them."""

    __slots__ = ("children", "terminal", "lu_label", "frame")

    def __init__(self, frame: Frame | None = None):
        self.children: list[dict[int, int]] = [{}]
        self.terminal: list[bool] = [False]
        self.lu_label: list[LexicalUnit | None] = [None]
        self.frame = frame

    def insert(self, seq: Sequence[int], label: LexicalUnit | None = None) -> None:
        if not seq:
            raise ConstraintError("cannot insert a zero-length constraint path")
        node = ROOT
        for tok in seq:
            nxt = self.children[node].get(tok)
            if nxt is None:
                nxt = len(self.children)
                self.children[node][tok] = nxt
                self.children.append({})
                self.terminal.append(False)
                self.lu_label.append(None)
            node = nxt
        if not self.terminal[node]:
            self.terminal[node] = True
            self.lu_label[node] = label

    @classmethod
    def from_sequences(
        cls,
        seqs: Iterable[Sequence[int]],
        labels: Iterable[LexicalUnit | None] | None = None,
        frame: Frame | None = None,
    ) -> "ConstraintTrie":
        trie = cls(frame)
        labels = list(labels) if labels is not None else None
        for i, seq in enumerate(seqs):
            trie.insert(seq, labels[i] if labels else None)
        return trie

    def walk(self, seq: Sequence[int], start: int = ROOT) -> int | None:
        node = start
        for tok in seq:
            node = self.children[node].get(tok)
            if node is None:
                return None
        return node

    def paths(self) -> list[tuple[tuple[int, ...], LexicalUnit | None]]:
        out: list[tuple[tuple[int, ...], LexicalUnit | None]] = []
        stack: list[tuple[int, tuple[int, ...]]] = [(ROOT, ())]
        while stack:
            node, prefix = stack.pop()
            if self.terminal[node]:
                out.append((prefix, self.lu_label[node]))
            for tok in sorted(self.children[node], reverse=True):
                stack.append((self.children[node][tok], prefix + (tok,)))
        return out


@dataclass(frozen=True)
class ConstraintSuite:
    tries: tuple[ConstraintTrie, ...]
    mode: Mode
    # token ids whose decoded surface starts / ends with a word character;
    # empty tables disable the word-boundary opening guard (toy suites)
    word_start_ids: frozenset[int] = frozenset()
    word_end_ids: frozenset[int] = frozenset()

    def __len__(self) -> int:
        return len(self.tries)


@dataclass(frozen=True)
class ConstraintState:
    """Per-hypothesis matching progress. `completed_mask` is a bitset over
    tries; `active` holds (trie index, node) partial matches, all sharing one
    window of emitted tokens."""

    completed_mask: int = 0
    active: tuple[tuple[int, int], ...] = ()
    window: tuple[int, ...] = ()
    prev_ends_word: bool = False
    position: int = 0

    @property
    def satisfied_count(self) -> int:
        return self.completed_mask.bit_count()

    @property
    def completed(self) -> frozenset[int]:
        return frozenset(i for i in range(self.completed_mask.bit_length())
                         if self.completed_mask >> i & 1)

    @property
    def global_pointer(self) -> int | None:
        return self.active[0][0] if self.active else None

    @property
    def match_start(self) -> int | None:
        return self.position - len(self.window) if self.active else None

    def is_complete(self, suite: ConstraintSuite) -> bool:
        return self.satisfied_count == len(suite.tries)


def initial_state(suite: ConstraintSuite) -> ConstraintState:
    return ConstraintState()


def next_possible_sets(state: ConstraintState, suite: ConstraintSuite) -> tuple[int, ...]:
    """Trie indices eligible to be matched next: the lowest uncompleted index
    under ordered mode, all uncompleted indices under unordered mode."""
    pending = tuple(i for i in range(len(suite.tries)) if not state.completed_mask >> i & 1)
    if not pending:
        return ()
    if suite.mode is Mode.ORDERED:
        return pending[:1]
    return pending


def _complete(state: ConstraintState, trie_idx: int, ends_word: bool) -> ConstraintState:
    return ConstraintState(
        completed_mask=state.completed_mask | (1 << trie_idx),
        active=(),
        window=(),
        prev_ends_word=ends_word,
        position=state.position + 1,
    )


def _open_matches(
    suite: ConstraintSuite,
    allowed: tuple[int, ...],
    token: int,
    prev_ends_word: bool,
) -> list[tuple[int, int]]:
    # opening mid-word would let an LU glue onto the previous word's surface
    if prev_ends_word and token in suite.word_start_ids:
        return []
    opened = []
    for i in allowed:
        child = suite.tries[i].children[ROOT].get(token)
        if child is not None:
            opened.append((i, child))
    return opened


def advance(state: ConstraintState, token: int, suite: ConstraintSuite) -> ConstraintState:
    """Feed one emitted token through the automaton. Total and deterministic;
    completed bits are never unset."""
    ends_word = token in suite.word_end_ids
    n = len(suite.tries)
    if n == 0 or state.satisfied_count == n:
        return replace(state, active=(), window=(),
                       prev_ends_word=ends_word, position=state.position + 1)

    if state.active:
        extended = []
        for trie_idx, node in state.active:
            child = suite.tries[trie_idx].children[node].get(token)
            if child is not None:
                extended.append((trie_idx, child))
        if extended:
            terminal_hits = [ti for ti, nd in extended if suite.tries[ti].terminal[nd]]
            if terminal_hits:
                return _complete(state, min(terminal_hits), ends_word)
            return ConstraintState(
                completed_mask=state.completed_mask,
                active=tuple(extended),
                window=state.window + (token,),
                prev_ends_word=ends_word,
                position=state.position + 1,
            )
        return _unwind(state, state.window + (token,), suite, ends_word)

    allowed = next_possible_sets(state, suite)
    opened = _open_matches(suite, allowed, token, state.prev_ends_word)
    if not opened:
        return replace(state, prev_ends_word=ends_word, position=state.position + 1)
    terminal_hits = [ti for ti, nd in opened if suite.tries[ti].terminal[nd]]
    if terminal_hits:
        return _complete(state, min(terminal_hits), ends_word)
    return ConstraintState(
        completed_mask=state.completed_mask,
        active=tuple(opened),
        window=(token,),
        prev_ends_word=ends_word,
        position=state.position + 1,
    )


def _unwind(
    state: ConstraintState,
    window: tuple[int, ...],
    suite: ConstraintSuite,
    ends_word: bool,
) -> ConstraintState:
    """All partial matches died: re-match the longest suffix of the emitted
    match region (including the breaking token) that is still a path prefix
    of a next-possible trie."""
    allowed = next_possible_sets(state, suite)
    for start in range(1, len(window)):
        if window[start - 1] in suite.word_end_ids and window[start] in suite.word_start_ids:
            continue
        suffix = window[start:]
        matches = []
        for i in allowed:
            node = suite.tries[i].walk(suffix)
            if node is not None:
                matches.append((i, node))
        if matches:
            terminal_hits = [ti for ti, nd in matches if suite.tries[ti].terminal[nd]]
            if terminal_hits:
                return _complete(state, min(terminal_hits), ends_word)
            return ConstraintState(
                completed_mask=state.completed_mask,
                active=tuple(matches),
                window=suffix,
                prev_ends_word=ends_word,
                position=state.position + 1,
            )
    return ConstraintState(
        completed_mask=state.completed_mask,
        active=(),
        window=(),
        prev_ends_word=ends_word,
        position=state.position + 1,
    )


def forced_tokens(state: ConstraintState, suite: ConstraintSuite) -> frozenset[int]:
    """Tokens that advance constraint progress from this state: continuations
    of active matches, or admissible openers of next-possible tries."""
    if state.active:
        out: set[int] = set()
        for trie_idx, node in state.active:
            out.update(suite.tries[trie_idx].children[node])
        return frozenset(out)
    out = set()
    for i in next_possible_sets(state, suite):
        out.update(suite.tries[i].children[ROOT])
    if state.prev_ends_word:
        out -= suite.word_start_ids
    return frozenset(out)


def word_char_tables(vocab: BpeVocabulary) -> tuple[frozenset[int], frozenset[int]]:
    """Per-id flags for surfaces starting/ending with a word character."""
    cached = getattr(vocab, "_word_char_tables", None)
    if cached is not None:
        return cached
    starts: set[int] = set()
    ends: set[int] = set()
    for i in range(vocab.size):
        try:
            s = decode([i], vocab)
        except UnknownTokenId:
            continue
        if s and (s[0].isalnum()):
            starts.add(i)
        if s and (s[-1].isalnum()):
            ends.add(i)
    cached = (frozenset(starts), frozenset(ends))
    vocab._word_char_tables = cached
    return cached


def build_suite(
    frames: Sequence[Frame], mode: Mode | str, vocab: BpeVocabulary
) -> ConstraintSuite:
    """One trie per frame, in the given order, containing every tokenized
    surface form of every LU variant."""
    mode = Mode(mode)
    tries: list[ConstraintTrie] = []
    for fr in frames:
        trie = ConstraintTrie(fr)
        count = 0
        for variant, lu in sorted(fr.variant_map().items()):
            for seq in tokenize_constraint(variant, vocab):
                trie.insert(seq, lu)
                count += 1
        if count == 0:
            raise ConstraintError(f"frame {fr.name!r} has no tokenizable lexical units")
        tries.append(trie)
    starts, ends = word_char_tables(vocab)
    return ConstraintSuite(tuple(tries), mode, starts, ends)


def suite_debug_dump(suite: ConstraintSuite, vocab: BpeVocabulary) -> dict:
    """JSON-friendly view of the suite (paths with decoded surfaces)."""
    tries = []
    for trie in suite.tries:
        paths = []
        for ids, lu in sorted(trie.paths()):
            paths.append({
                "ids": list(ids),
                "surface": decode(ids, vocab),
                "lu": lu.lemma if lu else None,
            })
        tries.append({
            "frame": trie.frame.id if trie.frame else None,
            "paths": paths,
        })
    return {"mode": suite.mode.value, "tries": tries}
