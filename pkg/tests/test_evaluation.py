import math
import random
from random import Random

import pytest
import regex as re

from framefill.bpe import encode
from framefill.dataprep import AnnotatedStory, make_example
from framefill.evaluation import (
    EvalError,
    eval_ppl_suite,
    fidelity,
    first_trigger_offset,
    lexical_trigger_check,
    render_ppl_report,
    render_table,
    sample_frame_subsets,
)
from framefill.lexicon import Frame, LexicalUnit
from framefill.scoring import ScorerError, TableScorer, log_normalize


def naive_boundary_scan(text, frame):
    """Plain substring scanner with word-boundary rules."""
    lowered = text.lower()
    for variant in frame.variant_map():
        for m in re.finditer(re.escape(variant), lowered):
            before = lowered[m.start() - 1] if m.start() > 0 else " "
            after = lowered[m.end()] if m.end() < len(lowered) else " "
            if not (before.isalnum() or after.isalnum()):
                return True
    return False


class TestTriggerCheck:
    def test_bought_triggers_commerce_buy(self, rt):
        fr = rt.frame_index.resolve("[Commerce_buy]")
        assert lexical_trigger_check("He bought fruit.", fr, rt.vocab)

    def test_empty_text_false(self, rt):
        fr = rt.frame_index.resolve("[Commerce_buy]")
        assert not lexical_trigger_check("", fr, rt.vocab)

    def test_substring_not_word_is_ignored(self, rt):
        fr = rt.frame_index.resolve("[Apply_heat]")
        assert not lexical_trigger_check("The bakery opened.", fr, rt.vocab)
        assert lexical_trigger_check("She will bake bread.", fr, rt.vocab)

    def test_agreement_with_naive_scanner(self, rt):
        rng = random.Random(17)
        frame = Frame("Synthetic", (LexicalUnit.create("blick", "v"),))
        words = ["blick", "blicked", "blicks", "the", "cat", "blicker", "ablick", "sat"]
        for _ in range(300):
            text = " ".join(rng.choice(words) for _ in range(rng.randint(0, 8)))
            if rng.random() < 0.3:
                text = text.capitalize() + "."
            assert lexical_trigger_check(text, frame, rt.vocab) == naive_boundary_scan(
                text, frame
            ), text

    def test_first_trigger_offset(self, rt):
        fr = rt.frame_index.resolve("[Food]")
        assert first_trigger_offset("The cake and the bread.", fr) == 4
        assert first_trigger_offset("Nothing here.", fr) is None


class TestFidelity:
    def test_mixed_arithmetic(self, rt):
        outputs = [
            ("He bought fruit.", ["[Commerce_buy]", "[Food]"]),      # 2/2
            ("Nothing to see here?", ["[Apply_heat]"]),              # 0/1
            ("She baked bread.", ["[Apply_heat]"]),                  # 1/1
        ]
        report = fidelity(outputs, rt.frame_index, rt.vocab)
        assert report.recall == pytest.approx(3 / 4)
        assert report.perfect_recall == pytest.approx(2 / 3)

    def test_all_matched(self, rt):
        outputs = [("He bought fruit.", ["[Commerce_buy]"])]
        report = fidelity(outputs, rt.frame_index, rt.vocab)
        assert report.recall == 1.0 and report.perfect_recall == 1.0

    def test_none_matched(self, rt):
        outputs = [("Hello there.", ["[Commerce_buy]"])]
        report = fidelity(outputs, rt.frame_index, rt.vocab)
        assert report.recall == 0.0 and report.perfect_recall == 0.0

    def test_permutation_invariant(self, rt):
        outputs = [
            ("He bought fruit.", ["[Commerce_buy]"]),
            ("She baked bread.", ["[Apply_heat]", "[Food]"]),
            ("xyz", ["[Motion]"]),
        ]
        a = fidelity(outputs, rt.frame_index, rt.vocab)
        b = fidelity(list(reversed(outputs)), rt.frame_index, rt.vocab)
        assert (a.recall, a.perfect_recall) == (b.recall, b.perfect_recall)

    def test_empty_rejected(self, rt):
        with pytest.raises(EvalError):
            fidelity([], rt.frame_index, rt.vocab)

    def test_report_json_labels_lexical(self, rt):
        report = fidelity([("He bought fruit.", ["[Food]"])], rt.frame_index, rt.vocab)
        assert "lexical fidelity" in report.to_json()


class TestSubsetSampling:
    def test_seed_required_and_deterministic(self):
        sets = [["[A]", "[B]", "[C]"], ["[D]"]]
        one = sample_frame_subsets(sets, 2, seed=5)
        two = sample_frame_subsets(sets, 2, seed=5)
        other = sample_frame_subsets(sets, 2, seed=6)
        assert one == two
        assert len(one[0]) == 2 and len(one[1]) == 1
        assert one != other or True  # different seeds may coincide; sizes must not
        with pytest.raises(TypeError):
            sample_frame_subsets(sets, 2)  # seed is a required parameter


STORY = AnnotatedStory(
    sentences=("Charles went shopping.", "He bought fruit.", "Then he left."),
    frames=((), ("[Commerce_buy]", "[Food]"), ()),
)


class TestPplSuite:
    def test_uniform_scorer_all_cells_vocab_size(self, rt):
        sc = TableScorer.uniform(rt.vocab.size)
        examples = [make_example(STORY, [1], v, Random(0)) for v in ("ILM", "A")]
        table = eval_ppl_suite(sc, examples, rt.vocab)
        for masking, value in table.items():
            assert value == pytest.approx(rt.vocab.size), masking

    def test_hand_computed_fixture(self, tiny_vocab):
        # four-token sequence under a hand-built table: PPL from summed logs
        ids = encode("He bought fruit.", tiny_vocab)
        assert len(ids) >= 3
        sc = TableScorer.uniform(tiny_vocab.size)
        ex = make_example(STORY, [1], "ILM", Random(0))
        seq = encode(ex.surface, tiny_vocab)
        mask = [False] * len(seq)
        sep = tiny_vocab.special_id("[sep]")
        first_sep = seq.index(sep)
        marked = [i for i in range(first_sep + 1, len(seq)) if seq[i] != sep][:4]
        for i in marked:
            mask[i] = True
        from framefill.scoring import perplexity

        expected = math.exp(-sum(math.log(1 / tiny_vocab.size) for _ in marked) / len(marked))
        assert perplexity(sc, [seq], [mask]) == pytest.approx(expected, abs=1e-9)

    def test_masking_rows_differ_when_specials_deterministic(self, rt):
        # a scorer that strongly prefers [sep] makes special tokens cheap,
        # separating the infill-only and +special rows
        size = rt.vocab.size
        weights = [1.0] * size
        weights[rt.vocab.special_id("[sep]")] = 500.0
        sc = TableScorer({None: log_normalize(weights)})
        examples = [make_example(STORY, [1], "ILM", Random(0))]
        table = eval_ppl_suite(sc, examples, rt.vocab)
        assert table["infill_only"] != pytest.approx(table["plus_special"])
        assert table["plus_special"] > 0

    def test_five_slot_padding_applied(self, rt):
        sc = TableScorer.uniform(rt.vocab.size)
        examples = [make_example(STORY, [1], "A", Random(0))]
        table = eval_ppl_suite(sc, examples, rt.vocab)
        assert table["five_slot"] is not None

    def test_empty_mask_reports_none(self, rt):
        sc = TableScorer.uniform(rt.vocab.size)
        table = eval_ppl_suite(sc, [], rt.vocab)
        assert all(v is None for v in table.values())

    def test_train_ppl_below_heldout_on_corpus(self, rt):
        from framefill.dataprep import generate_examples
        from framefill.scoring import perplexity, train_ngram

        examples = generate_examples(rt.stories, "ILM", Random(0))
        split = int(len(examples) * 0.8)
        train = [encode(ex.surface, rt.vocab) for ex in examples[:split]]
        held = [encode(ex.surface, rt.vocab) for ex in examples[split:]]
        model = train_ngram(train, 3, rt.vocab.size)
        ppl_train = perplexity(model, train, [[True] * len(s) for s in train])
        ppl_held = perplexity(model, held, [[True] * len(s) for s in held])
        assert ppl_train < ppl_held


def test_render_table_alignment():
    out = render_table([("a", "bb"), ("ccc", "d")])
    lines = out.splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("-")


def test_render_ppl_report():
    out = render_ppl_report({"one_masked": {"infill_only": 3.5, "plus_special": None,
                                            "five_slot": 2.0}})
    assert "Infill Text" in out and "3.50" in out and "-" in out
