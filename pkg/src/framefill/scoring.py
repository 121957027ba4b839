"""Next-token scoring behind one contract: score(prefix) -> log-prob vector
over the full id space, exp-summing to 1.

Three implementations: a fixed-table scorer for tests, an interpolated
absolute-discount n-gram model over BPE tokens (the desk-scale language
model), and an HTTP client for external scorers. Models are immutable after
training/loading and safe for concurrent score() calls.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import httpx
import numpy as np

MAGIC = b"FFNG"
FORMAT_VERSION = 1


class ScorerError(Exception):
    pass


class RemoteTransportError(ScorerError):
    """Connection-level failure; safe to retry."""

    retryable = True


class RemoteProtocolError(ScorerError):
    """The remote answered, but not with a usable score vector."""

    retryable = False


class Scorer(Protocol):
    vocabulary_size: int

    def score(self, prefix: Sequence[int]) -> np.ndarray: ...


def log_normalize(weights: Sequence[float]) -> np.ndarray:
    """Positive weights -> normalized log-prob row."""
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w <= 0):
        raise ScorerError("weights must be strictly positive")
    return np.log(w) - math.log(w.sum())


def _check_normalized(row: np.ndarray) -> np.ndarray:
    total = float(np.exp(row).sum())
    if abs(total - 1.0) > 1e-6:
        raise ScorerError(f"log-prob row sums to {total}, expected 1")
    return row


class TableScorer:
    """Markov-1 fixed table: one stored log-prob row per last-token context,
    with the `None` row covering the sequence start and unseen contexts."""

    def __init__(self, rows: dict[int | None, Sequence[float]]):
        if None not in rows:
            raise ScorerError("TableScorer requires a default row under key None")
        self.rows = {k: _check_normalized(np.asarray(v, dtype=np.float64)) for k, v in rows.items()}
        sizes = {len(r) for r in self.rows.values()}
        if len(sizes) != 1:
            raise ScorerError("all rows must share one vocabulary size")
        self.vocabulary_size = sizes.pop()

    @classmethod
    def uniform(cls, vocabulary_size: int) -> "TableScorer":
        return cls({None: np.full(vocabulary_size, -math.log(vocabulary_size))})

    def score(self, prefix: Sequence[int]) -> np.ndarray:
        last = prefix[-1] if len(prefix) else None
        row = self.rows.get(last)
        if row is None:
            row = self.rows[None]
        return row


@dataclass
class NGramModel:
    """Interpolated absolute-discount n-gram model. `counts` maps a context
    tuple (length < order) to its successor counts; the backoff chain ends in
    the uniform distribution, so every returned row normalizes exactly."""

    order: int
    vocabulary_size: int
    discount: float
    counts: dict[tuple[int, ...], dict[int, int]]
    _dist_cache: dict[tuple[int, ...], np.ndarray] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self):
        if self.order < 1:
            raise ScorerError("order must be >= 1")
        if not (0.0 < self.discount < 1.0):
            raise ScorerError("discount must be in (0, 1)")

    def _distribution(self, ctx: tuple[int, ...]) -> np.ndarray:
        cached = self._dist_cache.get(ctx)
        if cached is not None:
            return cached
        if ctx:
            lower = self._distribution(ctx[1:])
        else:
            lower = np.full(self.vocabulary_size, 1.0 / self.vocabulary_size)
            successors = self.counts.get((), {})
            if successors:
                total = sum(successors.values())
                lam = self.discount * len(successors) / total
                dist = lam * lower
                for tok, c in successors.items():
                    dist[tok] += (c - self.discount) / total
                self._dist_cache[()] = dist
                return dist
            self._dist_cache[()] = lower
            return lower
        successors = self.counts.get(ctx)
        if not successors:
            # unseen context: fall through to the lower order entirely
            self._dist_cache[ctx] = lower
            return lower
        total = sum(successors.values())
        lam = self.discount * len(successors) / total
        dist = lam * lower
        for tok, c in successors.items():
            dist[tok] += (c - self.discount) / total
        self._dist_cache[ctx] = dist
        return dist

    def score(self, prefix: Sequence[int]) -> np.ndarray:
        ctx = tuple(prefix[-(self.order - 1):]) if self.order > 1 and len(prefix) else ()
        return np.log(self._distribution(ctx))


def train_ngram(
    corpus: Sequence[Sequence[int]],
    order: int,
    vocabulary_size: int,
    discount: float = 0.75,
) -> NGramModel:
    if order < 1:
        raise ScorerError("order must be >= 1")
    corpus = [seq for seq in corpus if len(seq)]
    if not corpus:
        raise ScorerError("training corpus is empty")
    counts: dict[tuple[int, ...], dict[int, int]] = {}
    for seq in corpus:
        for t, tok in enumerate(seq):
            if tok >= vocabulary_size:
                raise ScorerError(f"token id {tok} outside vocabulary of {vocabulary_size}")
            for k in range(1, order + 1):
                if t - (k - 1) < 0:
                    continue
                ctx = tuple(seq[t - k + 1 : t])
                bucket = counts.setdefault(ctx, {})
                bucket[tok] = bucket.get(tok, 0) + 1
    return NGramModel(order, vocabulary_size, discount, counts)


def perplexity(
    scorer: Scorer,
    sequences: Sequence[Sequence[int]],
    masks: Sequence[Sequence[bool]],
) -> float:
    """exp(-mean log-prob) over tokens whose mask flag is set."""
    total = 0.0
    included = 0
    for seq, mask in zip(sequences, masks):
        if len(seq) != len(mask):
            raise ScorerError("mask length does not match sequence length")
        for t, keep in enumerate(mask):
            if keep:
                total += float(scorer.score(seq[:t])[seq[t]])
                included += 1
    if included == 0:
        raise ScorerError("perplexity undefined: no tokens included by the mask")
    return math.exp(-total / included)


class RemoteScorer:
    """Client for an external scorer speaking the POST /score wire protocol.
    Shares one connection pool; safe for concurrent callers."""

    def __init__(
        self,
        base_url: str,
        vocabulary_size: int,
        client: httpx.Client | None = None,
        timeout: float = 30.0,
    ):
        self.vocabulary_size = vocabulary_size
        self._client = client or httpx.Client(base_url=base_url, timeout=timeout)
        self._base_url = base_url

    def score(self, prefix: Sequence[int]) -> np.ndarray:
        try:
            resp = self._client.post("/score", json={"prefix": list(prefix)})
        except httpx.TransportError as e:
            raise RemoteTransportError(f"scorer at {self._base_url}: {e}") from e
        if resp.status_code != 200:
            raise RemoteProtocolError(f"scorer returned HTTP {resp.status_code}")
        try:
            payload = resp.json()
            logprobs = payload["logprobs"]
        except (ValueError, KeyError) as e:
            raise RemoteProtocolError(f"malformed scorer response: {e}") from e
        if len(logprobs) != self.vocabulary_size:
            raise RemoteProtocolError(
                f"scorer returned {len(logprobs)} logprobs, expected {self.vocabulary_size}"
            )
        return np.asarray(logprobs, dtype=np.float64)

    def close(self) -> None:
        self._client.close()


def save_ngram(model: NGramModel, path: str | Path) -> None:
    """Versioned binary format: magic, u32 version/order/vocab, f64 discount,
    then contexts sorted for byte-determinism (all integers little-endian)."""
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<III", FORMAT_VERSION, model.order, model.vocabulary_size))
        f.write(struct.pack("<d", model.discount))
        f.write(struct.pack("<Q", len(model.counts)))
        for ctx in sorted(model.counts):
            successors = model.counts[ctx]
            f.write(struct.pack("<B", len(ctx)))
            f.write(struct.pack(f"<{len(ctx)}I", *ctx) if ctx else b"")
            f.write(struct.pack("<I", len(successors)))
            for tok in sorted(successors):
                f.write(struct.pack("<IQ", tok, successors[tok]))


def load_ngram(path: str | Path) -> NGramModel:
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise ScorerError(f"{path}: not an n-gram model file")
        version, order, vocab_size = struct.unpack("<III", f.read(12))
        if version != FORMAT_VERSION:
            raise ScorerError(f"{path}: unsupported format version {version}")
        (discount,) = struct.unpack("<d", f.read(8))
        (n_contexts,) = struct.unpack("<Q", f.read(8))
        counts: dict[tuple[int, ...], dict[int, int]] = {}
        for _ in range(n_contexts):
            (ctx_len,) = struct.unpack("<B", f.read(1))
            ctx = struct.unpack(f"<{ctx_len}I", f.read(4 * ctx_len)) if ctx_len else ()
            (n_entries,) = struct.unpack("<I", f.read(4))
            successors: dict[int, int] = {}
            for _ in range(n_entries):
                tok, count = struct.unpack("<IQ", f.read(12))
                successors[tok] = count
            counts[ctx] = successors
    return NGramModel(order, vocab_size, discount, counts)
