import json

import numpy as np
import pytest

from framefill.lexicon import (
    EmbeddingTable,
    Frame,
    FrameIndex,
    LexicalUnit,
    LexiconError,
    Pos,
    expand_variants,
    load_embeddings,
    load_lexicon,
    save_lexicon,
)


def lu(lemma, pos, variants=()):
    return LexicalUnit.create(lemma, pos, variants)


def write_lexicon(tmp_path, payload):
    p = tmp_path / "lex.json"
    p.write_text(json.dumps(payload))
    return p


def test_load_apply_heat(tmp_path):
    p = write_lexicon(tmp_path, {"frames": [{
        "name": "Apply_heat",
        "lexical_units": [{"lemma": w, "pos": "v"} for w in ["fry", "bake", "boil", "broil"]],
    }]})
    frames = load_lexicon(p)
    assert len(frames) == 1
    fr = frames[0]
    assert fr.id == "[Apply_heat]"
    lemmas = {u.lemma for u in fr.lexical_units}
    assert {"fry", "bake", "boil", "broil"} <= lemmas


def test_load_empty(tmp_path):
    assert load_lexicon(write_lexicon(tmp_path, {"frames": []})) == []


def test_duplicate_frame_rejected(tmp_path):
    p = write_lexicon(tmp_path, {"frames": [
        {"name": "Food", "lexical_units": [{"lemma": "fruit", "pos": "n"}]},
        {"name": "Food", "lexical_units": [{"lemma": "bread", "pos": "n"}]},
    ]})
    with pytest.raises(LexiconError, match="duplicate frame"):
        load_lexicon(p)


def test_parse_error_names_line(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"frames": [\n  {"name": }\n]}')
    with pytest.raises(LexiconError, match="line"):
        load_lexicon(p)


def test_missing_field_named(tmp_path):
    p = write_lexicon(tmp_path, {"frames": [{"lexical_units": []}]})
    with pytest.raises(LexiconError, match=r"frames\[0\].*name"):
        load_lexicon(p)


def test_frame_id_underscores():
    fr = Frame("Dinner party", (lu("feast", "v"),))
    assert fr.id == "[Dinner_party]"


def test_duplicate_lu_rejected():
    with pytest.raises(LexiconError, match="duplicate LU"):
        Frame("F", (lu("bake", "v"), lu("bake", "v")))


@pytest.mark.parametrize("lemma,pos,expected", [
    ("bake", "v", {"bake", "bakes", "baked", "baking"}),
    ("fry", "v", {"fry", "fries", "fried", "frying"}),
    ("in cahoots", "a", {"in cahoots"}),
    ("stop", "v", {"stop", "stops", "stopped", "stopping"}),
    ("lunch", "n", {"lunch", "lunches"}),
    ("conspiracy", "n", {"conspiracy", "conspiracies"}),
    ("team up", "v", {"team up", "teams up", "teamed up", "teaming up"}),
])
def test_inflection(lemma, pos, expected):
    assert expected <= expand_variants(lu(lemma, pos)).variants


def test_expand_preserves_supplied_variants():
    expanded = expand_variants(lu("buy", "v", ["bought"]))
    assert "bought" in expanded.variants


def test_expand_unknown_pos_is_lemma_only():
    assert expand_variants(lu("zorp", "other")).variants == frozenset({"zorp"})


def test_expand_idempotent():
    one = expand_variants(lu("carry", "v"))
    assert expand_variants(one).variants == one.variants


def test_variant_map_collision_keeps_first(caplog):
    fr = Frame("F", (lu("bake", "v", ["roast"]), lu("roast", "v")))
    with caplog.at_level("WARNING"):
        vm = fr.variant_map()
    assert vm["roast"].lemma == "bake"
    assert any("claimed" in r.message for r in caplog.records)


def test_lexicon_roundtrip_fixed_point(tmp_path):
    p = write_lexicon(tmp_path, {"frames": [
        {"name": "Apply_heat",
         "lexical_units": [{"lemma": "bake", "pos": "v"}, {"lemma": "fry", "pos": "v"}]},
        {"name": "Collaboration",
         "lexical_units": [{"lemma": "team up", "pos": "v", "variants": ["teamed up"]}]},
    ]})
    frames = load_lexicon(p)
    out = tmp_path / "roundtrip.json"
    save_lexicon(frames, out)
    again = load_lexicon(out)
    assert again == frames
    save_lexicon(again, out)
    assert load_lexicon(out) == again


def write_embeddings(tmp_path, rows):
    p = tmp_path / "emb.txt"
    p.write_text("\n".join(rows) + "\n")
    return p


def test_embeddings_lookup(tmp_path):
    p = write_embeddings(tmp_path, ["conspire 1.0 2.0 3.0", "other 0.0 0.0 1.0"])
    table = load_embeddings(p, {"conspire"})
    assert table.dimension == 3
    assert np.allclose(table.get("Conspire"), [1.0, 2.0, 3.0])
    assert "other" not in table.entries


def test_embeddings_multiword_mean(tmp_path):
    p = write_embeddings(tmp_path, ["team 1.0 0.0", "up 0.0 1.0"])
    table = load_embeddings(p, {"team up"})
    assert np.allclose(table.get("team up"), [0.5, 0.5])


def test_embeddings_empty_vocabulary(tmp_path):
    p = write_embeddings(tmp_path, ["word 1.0 2.0"])
    table = load_embeddings(p, set())
    assert table.entries == {}


def test_embeddings_records_misses(tmp_path):
    p = write_embeddings(tmp_path, ["team 1.0 0.0"])
    table = load_embeddings(p, {"team up", "skedaddle"})
    assert "skedaddle" in table.missing
    assert "team up" in table


def test_embeddings_dimension_mismatch(tmp_path):
    p = write_embeddings(tmp_path, ["a 1.0 2.0", "b 1.0"])
    with pytest.raises(LexiconError, match="line 2"):
        load_embeddings(p, {"a", "b"})


def test_frame_index_resolution(rt):
    fr = rt.frame_index.resolve("[Apply_heat]")
    assert fr.name == "Apply_heat"
    assert rt.frame_index.resolve("Apply_heat") is fr
    with pytest.raises(LexiconError, match="unknown frame"):
        rt.frame_index.resolve("[Nope]")
