"""Diversified constraint construction: partition each frame's LUs into
embedding clusters and enumerate one-subset-per-frame combinations, so a
separate constrained search can run per combination.

Clustering is agglomerative with Ward linkage on Euclidean distance over the
LU lemma embeddings; variants follow their lemma's subset.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np
from sklearn.cluster import AgglomerativeClustering

from .lexicon import EmbeddingTable, Frame, LexicalUnit


class DiversifyError(ValueError):
    pass


@dataclass(frozen=True)
class SubsetPolicy:
    """Cluster counts: k for a lone frame; for multiple frames, the largest
    LU set gets `multi_primary`, the second largest `multi_secondary`, and
    the rest stay whole."""

    single_k: int = 8
    multi_primary: int = 4
    multi_secondary: int = 2


@dataclass(frozen=True)
class SubsetPlan:
    frames: tuple[Frame, ...]
    subsets: tuple[tuple[tuple[LexicalUnit, ...], ...], ...]
    combinations: tuple[tuple[int, ...], ...]

    def describe(self) -> dict:
        return {
            "frames": [
                {
                    "frame": fr.id,
                    "subsets": [
                        [lu.lemma for lu in subset] for subset in self.subsets[i]
                    ],
                }
                for i, fr in enumerate(self.frames)
            ],
            "combinations": [list(c) for c in self.combinations],
        }


def cluster_lus(
    frame: Frame,
    k: int,
    embeddings: EmbeddingTable,
    seed: int = 0,
) -> list[tuple[LexicalUnit, ...]]:
    """Partition the frame's LUs into k subsets by agglomerative clustering
    of lemma embeddings. Deterministic given the inputs (the seed is accepted
    for interface uniformity; the linkage itself has no randomness).
    Unembeddable LUs join the largest cluster; k is clamped to the number of
    embeddable LUs."""
    if k < 1:
        raise DiversifyError("k must be >= 1")
    embeddable = [lu for lu in frame.lexical_units if embeddings.get(lu.lemma) is not None]
    rest = [lu for lu in frame.lexical_units if embeddings.get(lu.lemma) is None]
    if not embeddable:
        raise DiversifyError(f"frame {frame.name!r} has no embeddable lexical units")
    k = min(k, len(embeddable))
    if k == 1:
        return [tuple(frame.lexical_units)]
    matrix = np.stack([embeddings.get(lu.lemma) for lu in embeddable])
    labels = AgglomerativeClustering(n_clusters=k, linkage="ward").fit_predict(matrix)
    groups: dict[int, list[LexicalUnit]] = {}
    for lu, label in zip(embeddable, labels):
        groups.setdefault(int(label), []).append(lu)
    # order clusters by first appearance in the frame's LU order
    ordered = sorted(groups.values(), key=lambda g: frame.lexical_units.index(g[0]))
    if rest:
        largest = max(range(len(ordered)), key=lambda i: (len(ordered[i]), -i))
        ordered[largest] = ordered[largest] + rest
    return [tuple(g) for g in ordered]


def plan_subsets(
    frames: Sequence[Frame],
    embeddings: EmbeddingTable,
    policy: SubsetPolicy | None = None,
    seed: int = 0,
) -> SubsetPlan:
    """Assign per-frame cluster counts by the policy (ties in LU-set size
    broken by request order) and enumerate subset combinations in
    lexicographic subset-index order."""
    if not frames:
        raise DiversifyError("plan_subsets needs at least one frame")
    policy = policy or SubsetPolicy()
    ks = [1] * len(frames)
    if len(frames) == 1:
        ks[0] = policy.single_k
    else:
        by_size = sorted(range(len(frames)),
                         key=lambda i: (-len(frames[i].lexical_units), i))
        ks[by_size[0]] = policy.multi_primary
        ks[by_size[1]] = policy.multi_secondary
    subsets = tuple(
        tuple(cluster_lus(fr, k, embeddings, seed)) for fr, k in zip(frames, ks)
    )
    combos = tuple(product(*(range(len(s)) for s in subsets)))
    return SubsetPlan(tuple(frames), subsets, combos)


def restricted_frames(plan: SubsetPlan, combination: Sequence[int]) -> list[Frame]:
    """The frames of one combination, each restricted to its chosen subset."""
    out = []
    for i, fr in enumerate(plan.frames):
        chosen = plan.subsets[i][combination[i]]
        out.append(Frame(fr.name, tuple(chosen)))
    return out
