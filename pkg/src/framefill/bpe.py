"""Byte-level BPE tokenization over the GPT-2 byte scheme.

Constraints and scorer inputs share one token space, so the vocabulary also
carries the special control tokens ([blank], [sep], [eos], [no_frame]) and one
id per frame. Special ids live in a dedicated range above the BPE ids and are
matched literally in input text.

Anti-property, relied on nowhere downstream: encode(a) need not be a prefix
of encode(a + b). Constraint matching operates on decoder-emitted ids only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import regex as re

# GPT-2 pre-tokenizer: contractions, letter runs, digit runs, punctuation
# runs, then whitespace. Merges never cross these boundaries.
_PRETOKEN_RE = re.compile(
    r"""'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+"""
)

CORE_SPECIALS = ("[blank]", "[sep]", "[eos]", "[no_frame]")


class TokenizerError(ValueError):
    pass


class UnknownTokenId(TokenizerError):
    def __init__(self, token_id: int):
        super().__init__(f"unknown token id {token_id}")
        self.token_id = token_id


@lru_cache(maxsize=1)
def bytes_to_unicode() -> dict[int, str]:
    """Bijection of the 256 byte values onto printable unicode codepoints."""
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, (chr(c) for c in cs)))


@lru_cache(maxsize=1)
def unicode_to_bytes() -> dict[str, int]:
    return {v: k for k, v in bytes_to_unicode().items()}


@dataclass
class BpeVocabulary:
    """Immutable-after-load token inventory: BPE tokens plus special ids."""

    token_to_id: dict[str, int]
    merges: list[tuple[str, str]]
    special_tokens: dict[str, int]
    id_to_token: dict[int, str] = field(init=False, repr=False)
    ranks: dict[tuple[str, str], int] = field(init=False, repr=False)
    _special_by_id: dict[int, str] = field(init=False, repr=False)
    _special_re: "re.Pattern | None" = field(init=False, repr=False)

    def __post_init__(self):
        if len(set(self.token_to_id.values())) != len(self.token_to_id):
            raise TokenizerError("token_to_id is not injective")
        for left, right in self.merges:
            if left + right not in self.token_to_id:
                raise TokenizerError(f"merge target {left + right!r} missing from vocab")
        overlap = set(self.special_tokens.values()) & set(self.token_to_id.values())
        if overlap:
            raise TokenizerError(f"special ids collide with BPE ids: {sorted(overlap)}")
        self.id_to_token = {i: t for t, i in self.token_to_id.items()}
        self.ranks = {pair: i for i, pair in enumerate(self.merges)}
        self._special_by_id = {i: t for t, i in self.special_tokens.items()}
        if self.special_tokens:
            alts = sorted(self.special_tokens, key=len, reverse=True)
            self._special_re = re.compile("|".join(re.escape(a) for a in alts))
        else:
            self._special_re = None

    @property
    def size(self) -> int:
        """Total id space size (max id + 1), the scorer vocabulary size."""
        ids = list(self.token_to_id.values()) + list(self.special_tokens.values())
        return max(ids) + 1 if ids else 0

    def special_id(self, name: str) -> int:
        try:
            return self.special_tokens[name]
        except KeyError:
            raise TokenizerError(f"unknown special token {name!r}") from None

    def is_special(self, token_id: int) -> bool:
        return token_id in self._special_by_id

    def token_text(self, token_id: int) -> str:
        """Decoded surface text of a single id."""
        return decode([token_id], self)


def _merge_word(symbols: list[str], ranks: dict[tuple[str, str], int]) -> list[str]:
    # In-place greedy merging: repeatedly apply the lowest-ranked adjacent
    # pair, rewriting all its non-overlapping occurrences left to right.
    while len(symbols) > 1:
        best_rank = None
        best_pair = None
        for i in range(len(symbols) - 1):
            r = ranks.get((symbols[i], symbols[i + 1]))
            if r is not None and (best_rank is None or r < best_rank):
                best_rank = r
                best_pair = (symbols[i], symbols[i + 1])
        if best_pair is None:
            break
        first, second = best_pair
        merged = first + second
        i = 0
        while i < len(symbols) - 1:
            if symbols[i] == first and symbols[i + 1] == second:
                symbols[i : i + 2] = [merged]
            else:
                i += 1
    return symbols


def _encode_plain(text: str, vocab: BpeVocabulary) -> list[int]:
    byte_enc = bytes_to_unicode()
    out: list[int] = []
    for piece in _PRETOKEN_RE.findall(text):
        symbols = [byte_enc[b] for b in piece.encode("utf-8")]
        for sym in _merge_word(symbols, vocab.ranks):
            out.append(vocab.token_to_id[sym])
    return out


def encode(text: str, vocab: BpeVocabulary) -> list[int]:
    """Tokenize text; literal special-token substrings map to their ids."""
    if not text:
        return []
    if vocab._special_re is None:
        return _encode_plain(text, vocab)
    out: list[int] = []
    pos = 0
    for m in vocab._special_re.finditer(text):
        out.extend(_encode_plain(text[pos : m.start()], vocab))
        out.append(vocab.special_tokens[m.group()])
        pos = m.end()
    out.extend(_encode_plain(text[pos:], vocab))
    return out


def decode(ids: Sequence[int], vocab: BpeVocabulary) -> str:
    byte_dec = unicode_to_bytes()
    parts: list[str] = []
    buf = bytearray()
    for i in ids:
        special = vocab._special_by_id.get(i)
        if special is not None:
            if buf:
                parts.append(buf.decode("utf-8", errors="replace"))
                buf = bytearray()
            parts.append(special)
            continue
        token = vocab.id_to_token.get(i)
        if token is None:
            raise UnknownTokenId(i)
        buf.extend(byte_dec[c] for c in token)
    if buf:
        parts.append(buf.decode("utf-8", errors="replace"))
    return "".join(parts)


def tokenize_constraint(surface: str, vocab: BpeVocabulary) -> list[list[int]]:
    """Token sequences under which an LU variant can occur in running text:
    with a leading space, bare, and space + sentence-initial capitalization.
    """
    surface = surface.strip()
    if not surface:
        return []
    capitalized = surface[0].upper() + surface[1:]
    forms = [" " + surface, surface, " " + capitalized]
    seqs: list[list[int]] = []
    seen: set[tuple[int, ...]] = set()
    for form in forms:
        ids = tuple(encode(form, vocab))
        if ids and ids not in seen:
            seen.add(ids)
            seqs.append(list(ids))
    return seqs


def train_bpe(
    texts: Iterable[str], num_merges: int, min_frequency: int = 2
) -> tuple[dict[str, int], list[tuple[str, str]]]:
    """Learn a small merge table from a corpus (fixture utility, not a tuned
    tokenizer learner). Byte tokens take ids 0..255, merged tokens follow in
    merge order."""
    byte_enc = bytes_to_unicode()
    word_freqs: dict[tuple[str, ...], int] = {}
    for text in texts:
        for piece in _PRETOKEN_RE.findall(text):
            key = tuple(byte_enc[b] for b in piece.encode("utf-8"))
            word_freqs[key] = word_freqs.get(key, 0) + 1

    splits = {w: list(w) for w in word_freqs}
    merges: list[tuple[str, str]] = []
    for _ in range(num_merges):
        pair_freqs: dict[tuple[str, str], int] = {}
        for word, freq in word_freqs.items():
            split = splits[word]
            for i in range(len(split) - 1):
                pair = (split[i], split[i + 1])
                pair_freqs[pair] = pair_freqs.get(pair, 0) + freq
        if not pair_freqs:
            break
        # deterministic tie-break on the pair itself
        best, best_freq = max(pair_freqs.items(), key=lambda kv: (kv[1], kv[0]))
        if best_freq < min_frequency:
            break
        merges.append(best)
        first, second = best
        merged = first + second
        for word in word_freqs:
            split = splits[word]
            i = 0
            while i < len(split) - 1:
                if split[i] == first and split[i + 1] == second:
                    split[i : i + 2] = [merged]
                else:
                    i += 1

    token_to_id = {byte_enc[b]: b for b in range(256)}
    next_id = 256
    for left, right in merges:
        token = left + right
        if token not in token_to_id:
            token_to_id[token] = next_id
            next_id += 1
    return token_to_id, merges


def build_vocabulary(
    token_to_id: dict[str, int],
    merges: list[tuple[str, str]],
    special_names: Sequence[str],
) -> BpeVocabulary:
    """Attach special tokens in a reserved id range above the BPE ids."""
    next_id = max(token_to_id.values(), default=-1) + 1
    specials: dict[str, int] = {}
    for name in special_names:
        if name not in specials:
            specials[name] = next_id
            next_id += 1
    return BpeVocabulary(dict(token_to_id), list(merges), specials)


def save_vocabulary(vocab: BpeVocabulary, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "vocab.json", "w", encoding="utf-8") as f:
        json.dump(vocab.token_to_id, f, ensure_ascii=False, indent=0, sort_keys=True)
    with open(directory / "merges.txt", "w", encoding="utf-8") as f:
        for left, right in vocab.merges:
            f.write(f"{left} {right}\n")
    with open(directory / "specials.json", "w", encoding="utf-8") as f:
        json.dump(vocab.special_tokens, f, ensure_ascii=False, indent=0)


def load_vocabulary(directory: str | Path) -> BpeVocabulary:
    directory = Path(directory)
    try:
        with open(directory / "vocab.json", encoding="utf-8") as f:
            token_to_id = json.load(f)
    except json.JSONDecodeError as e:
        raise TokenizerError(f"vocab.json: {e}") from e
    merges: list[tuple[str, str]] = []
    with open(directory / "merges.txt", encoding="utf-8") as f:
        for lineno, line in enumerate(f):
            line = line.rstrip("\n")
            if lineno == 0 and line.startswith("#version"):
                continue
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 2:
                raise TokenizerError(f"merges.txt line {lineno + 1}: expected two symbols")
            merges.append((parts[0], parts[1]))
    specials_path = directory / "specials.json"
    specials: dict[str, int] = {}
    if specials_path.exists():
        with open(specials_path, encoding="utf-8") as f:
            specials = {k: int(v) for k, v in json.load(f).items()}
    return BpeVocabulary(token_to_id, merges, specials)
