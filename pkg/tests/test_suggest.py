import pytest

from framefill.dataprep import AnnotatedStory
from framefill.suggest import SuggestError, SuggestionModel, suggest_frames, train_suggestion_model


def story(frame_rows):
    return AnnotatedStory(
        sentences=tuple("x." for _ in frame_rows),
        frames=tuple(tuple(r) for r in frame_rows),
    )


def test_empty_context_backs_off_to_marginal():
    stories = [story([["[A]", "[A]"], ["[B]"]]), story([["[A]"], ["[C]"]])]
    model = train_suggestion_model(stories, ["[A]", "[B]", "[C]"])
    ranked = suggest_frames(model, [], [], 3)
    assert ranked[0][0] == "[A]"
    assert len(ranked) == 3


def test_k_larger_than_inventory_returns_all():
    model = train_suggestion_model([story([["[A]"], ["[B]"]])], ["[A]", "[B]"])
    assert len(suggest_frames(model, [], [], 99)) == 2


def test_b_always_follows_a_ranks_first():
    rows = [[["[A]"], ["[B]"]] for _ in range(30)]
    rows += [[["[C]"], ["[D]"]] for _ in range(5)]
    stories = [story(r) for r in rows]
    model = train_suggestion_model(stories, ["[A]", "[B]", "[C]", "[D]"])
    ranked = suggest_frames(model, ["[A]"], [], 4)
    assert ranked[0][0] == "[B]"
    # and looking left from a [B] sentence, [A] should dominate
    ranked_back = suggest_frames(model, [], ["[B]"], 4)
    assert ranked_back[0][0] == "[A]"


def test_exclude_filters():
    model = train_suggestion_model([story([["[A]"], ["[B]"]])], ["[A]", "[B]"])
    ranked = suggest_frames(model, [], [], 5, exclude=["[A]"])
    assert all(fid != "[A]" for fid, _ in ranked)


def test_deterministic_tiebreak():
    model = train_suggestion_model([story([["[A]"], ["[B]"]])], ["[Z]", "[Y]", "[A]", "[B]"])
    one = suggest_frames(model, [], [], 4)
    two = suggest_frames(model, [], [], 4)
    assert one == two


def test_empty_counts_rejected():
    with pytest.raises(SuggestError):
        SuggestionModel(("[A]",), {}, {}, {})


def test_bundled_suggestions_are_sane(rt):
    from framefill.workflows import neighbor_frames

    left, right = neighbor_frames(rt, ["Alice went to the store one morning."], 1)
    ranked = suggest_frames(rt.suggestion, left, right, 5)
    assert len(ranked) == 5
    assert all(fid.startswith("[") for fid, _ in ranked)
    scores = [s for _, s in ranked]
    assert scores == sorted(scores, reverse=True)
