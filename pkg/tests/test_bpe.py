import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from framefill.bpe import (
    BpeVocabulary,
    CORE_SPECIALS,
    TokenizerError,
    UnknownTokenId,
    build_vocabulary,
    bytes_to_unicode,
    decode,
    encode,
    load_vocabulary,
    save_vocabulary,
    tokenize_constraint,
    train_bpe,
)

from oracles.bpe_reference import reference_encode

FIXTURES = json.loads((Path(__file__).parent / "fixtures" / "bpe_fixtures.json").read_text())


def test_byte_map_is_bijective():
    m = bytes_to_unicode()
    assert len(m) == 256
    assert len(set(m.values())) == 256


def test_encode_empty(tiny_vocab):
    assert encode("", tiny_vocab) == []


def test_decode_empty(tiny_vocab):
    assert decode([], tiny_vocab) == ""


def test_special_token_passthrough(tiny_vocab):
    assert encode("[sep]", tiny_vocab) == [tiny_vocab.special_id("[sep]")]


def test_specials_inside_text(tiny_vocab):
    ids = encode("He bought [sep] fruit.", tiny_vocab)
    assert ids.count(tiny_vocab.special_id("[sep]")) == 1
    assert decode(ids, tiny_vocab) == "He bought [sep] fruit."


def test_roundtrip_simple(tiny_vocab):
    s = "He bought fruit."
    assert decode(encode(s, tiny_vocab), tiny_vocab) == s


def test_unknown_id_is_named(tiny_vocab):
    with pytest.raises(UnknownTokenId, match="999999"):
        decode([999999], tiny_vocab)


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=64).filter(lambda s: "[" not in s))
def test_roundtrip_property(tiny_vocab, s):
    assert decode(encode(s, tiny_vocab), tiny_vocab) == s


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=48).filter(lambda s: "[" not in s))
def test_encode_matches_reference(tiny_vocab, s):
    assert encode(s, tiny_vocab) == reference_encode(
        s, tiny_vocab.token_to_id, tiny_vocab.merges
    )


def test_constraint_surface_forms(tiny_vocab):
    seqs = tokenize_constraint("bake", tiny_vocab)
    decoded = [decode(s, tiny_vocab) for s in seqs]
    assert decoded == [" bake", "bake", " Bake"]


def test_constraint_multiword(tiny_vocab):
    seqs = tokenize_constraint("in cahoots", tiny_vocab)
    assert encode(" in cahoots", tiny_vocab) in [list(s) for s in seqs]


def test_constraint_empty_surface(tiny_vocab):
    assert tokenize_constraint("", tiny_vocab) == []
    assert tokenize_constraint("   ", tiny_vocab) == []


def test_constraint_dedup_capitalized(tiny_vocab):
    # an already-capitalized surface has only two distinct forms
    seqs = tokenize_constraint("Bake", tiny_vocab)
    assert len(seqs) == 2


def test_vocabulary_invariants(tiny_vocab):
    # injective ids, merge targets present, specials outside BPE range
    for left, right in tiny_vocab.merges:
        assert left + right in tiny_vocab.token_to_id
    bpe_ids = set(tiny_vocab.token_to_id.values())
    assert not bpe_ids & set(tiny_vocab.special_tokens.values())


def test_vocabulary_rejects_collisions():
    token_to_id, merges = train_bpe(["ab ab ab"], 2)
    with pytest.raises(TokenizerError, match="collide"):
        BpeVocabulary(token_to_id, merges, {"[sep]": 0})


def test_save_load_roundtrip(tiny_vocab, tmp_path):
    save_vocabulary(tiny_vocab, tmp_path)
    loaded = load_vocabulary(tmp_path)
    assert loaded.token_to_id == tiny_vocab.token_to_id
    assert loaded.merges == tiny_vocab.merges
    assert loaded.special_tokens == tiny_vocab.special_tokens
    s = "She baked a cake."
    assert encode(s, loaded) == encode(s, tiny_vocab)


def test_load_tolerates_version_header(tiny_vocab, tmp_path):
    save_vocabulary(tiny_vocab, tmp_path)
    merges = (tmp_path / "merges.txt").read_text()
    (tmp_path / "merges.txt").write_text("#version: 0.2\n" + merges)
    assert load_vocabulary(tmp_path).merges == tiny_vocab.merges


def test_frozen_oracle_fixtures():
    """Tokenizations of the fixture strings, frozen from the reference
    implementation before the build, must match the shipped vocabulary."""
    from framefill.runtime import asset_path

    vocab = load_vocabulary(asset_path())
    assert len(FIXTURES) == 20
    for fx in FIXTURES:
        assert encode(fx["text"], vocab) == fx["ids"], fx["text"]
