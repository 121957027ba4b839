"""Frame-guided text infilling: lexicon, BPE tokenization, trie constraints,
constrained beam search, diversification, data formatting, and evaluation."""

__version__ = "0.1.0"
