"""Loaded-artifact bundle shared by the service and CLI. Everything here is
read-only after load and safe to share across requests."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .bpe import BpeVocabulary, encode, load_vocabulary
from .config import AppConfig
from .dataprep import AnnotatedStory, generate_examples, load_stories
from .lexicon import EmbeddingTable, Frame, FrameIndex, load_embeddings, load_lexicon
from .scoring import NGramModel, load_ngram, train_ngram
from .suggest import SuggestionModel, train_suggestion_model


def asset_path(name: str = "") -> Path:
    root = Path(str(resources.files("framefill") / "assets"))
    return root / name if name else root


@dataclass
class RuntimeContext:
    config: AppConfig
    frames: list[Frame]
    frame_index: FrameIndex
    vocab: BpeVocabulary
    scorer: NGramModel
    stories: list[AnnotatedStory]
    embeddings: EmbeddingTable
    suggestion: SuggestionModel


def default_scorer(
    stories: list[AnnotatedStory],
    vocab: BpeVocabulary,
    order: int,
    discount: float,
) -> NGramModel:
    """Train the bundled language model on infilling-formatted sequences
    (one example per story/blank position, no frame tokens)."""
    from random import Random

    examples = generate_examples(stories, "ILM", Random(0))
    corpus = [encode(ex.surface, vocab) for ex in examples]
    return train_ngram(corpus, order, vocab.size, discount)


def load_runtime(config: AppConfig | None = None) -> RuntimeContext:
    config = config or AppConfig()
    lexicon_path = config.lexicon or asset_path("lexicon.json")
    vocab_dir = config.vocab_dir or asset_path()
    stories_path = config.stories or asset_path("stories.jsonl")
    embeddings_path = config.embeddings or asset_path("embeddings.txt")

    frames = load_lexicon(lexicon_path)
    frame_index = FrameIndex(frames)
    vocab = load_vocabulary(vocab_dir)
    stories = load_stories(stories_path, frame_index)
    if config.ngram:
        scorer = load_ngram(config.ngram)
    else:
        scorer = default_scorer(stories, vocab, config.ngram_order, config.discount)
    lu_vocab = {lu.lemma for fr in frames for lu in fr.lexical_units}
    embeddings = load_embeddings(embeddings_path, lu_vocab)
    suggestion = train_suggestion_model(stories, frame_index.ids())
    return RuntimeContext(
        config=config,
        frames=frames,
        frame_index=frame_index,
        vocab=vocab,
        scorer=scorer,
        stories=stories,
        embeddings=embeddings,
        suggestion=suggestion,
    )
