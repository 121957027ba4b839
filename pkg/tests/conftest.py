import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from framefill.bpe import CORE_SPECIALS, build_vocabulary, train_bpe
from framefill.runtime import load_runtime

TINY_CORPUS = [
    "He bought fruit.",
    "Charles went shopping.",
    "Then he left.",
    "She baked a cake.",
    "They worked together every evening.",
    "in cahoots with the baker",
    "The buyer paid quickly and left the store.",
] * 2


@pytest.fixture(scope="session")
def tiny_vocab():
    token_to_id, merges = train_bpe(TINY_CORPUS, num_merges=120)
    return build_vocabulary(
        token_to_id, merges, list(CORE_SPECIALS) + ["[Food]", "[Commerce_buy]"]
    )


@pytest.fixture(scope="session")
def rt():
    """Bundled artifacts: lexicon, corpus, vocab, n-gram scorer, embeddings."""
    return load_runtime()
