import math
import random
import threading

import httpx
import numpy as np
import pytest

from framefill.constraints import ConstraintSuite, Mode
from framefill.decoding import DecodeRequest, decode
from framefill.scoring import (
    NGramModel,
    RemoteProtocolError,
    RemoteScorer,
    RemoteTransportError,
    ScorerError,
    TableScorer,
    load_ngram,
    log_normalize,
    perplexity,
    save_ngram,
    train_ngram,
)


def random_corpus(rng, vocab, n_seqs=40, length=25):
    return [[rng.randrange(vocab) for _ in range(length)] for _ in range(n_seqs)]


class TestTableScorer:
    def test_uniform_logprobs(self):
        sc = TableScorer.uniform(10)
        assert np.allclose(sc.score([]), math.log(0.1))
        assert np.allclose(sc.score([3, 4]), math.log(0.1))

    def test_stored_rows_returned(self):
        sc = TableScorer({None: log_normalize([1, 1]), 0: log_normalize([3, 1])})
        assert np.allclose(np.exp(sc.score([0])), [0.75, 0.25])
        assert np.allclose(np.exp(sc.score([1])), [0.5, 0.5])  # falls back

    def test_requires_default_row(self):
        with pytest.raises(ScorerError):
            TableScorer({0: log_normalize([1, 1])})

    def test_rejects_unnormalized(self):
        with pytest.raises(ScorerError):
            TableScorer({None: np.array([-0.1, -0.1])})


class TestNGram:
    def test_order1_counts(self):
        m = train_ngram([[0, 1]], order=1, vocabulary_size=2, discount=0.5)
        p = np.exp(m.score([]))
        assert abs(p[0] - p[1]) < 1e-12
        assert abs(p.sum() - 1) < 1e-9

    def test_empty_corpus_rejected(self):
        with pytest.raises(ScorerError, match="empty"):
            train_ngram([], order=2, vocabulary_size=4)

    def test_bad_order_rejected(self):
        with pytest.raises(ScorerError, match="order"):
            train_ngram([[0]], order=0, vocabulary_size=2)

    def test_normalization_property(self):
        rng = random.Random(0)
        m = train_ngram(random_corpus(rng, 12), order=3, vocabulary_size=12)
        for _ in range(50):
            prefix = [rng.randrange(12) for _ in range(rng.randrange(6))]
            assert abs(np.exp(m.score(prefix)).sum() - 1) < 1e-6

    def test_unseen_context_backs_off(self):
        rng = random.Random(1)
        corpus = random_corpus(rng, 6, n_seqs=5, length=10)
        m3 = train_ngram(corpus, order=3, vocabulary_size=8)
        # tokens 6,7 never occur, so the context is unseen at every order
        assert np.allclose(m3.score([6, 7]), m3.score([7]))

    def test_training_ppl_nonincreasing_in_order(self):
        rng = random.Random(2)
        corpus = random_corpus(rng, 10)
        masks = [[True] * len(s) for s in corpus]
        ppls = [
            perplexity(train_ngram(corpus, k, 10), corpus, masks) for k in (1, 2, 3, 4)
        ]
        assert all(a >= b - 1e-9 for a, b in zip(ppls, ppls[1:]))

    def test_train_vs_heldout(self):
        rng = random.Random(3)
        corpus = random_corpus(rng, 8, n_seqs=60)
        train, held = corpus[:45], corpus[45:]
        m = train_ngram(train, order=3, vocabulary_size=8)
        ppl_train = perplexity(m, train, [[True] * len(s) for s in train])
        ppl_held = perplexity(m, held, [[True] * len(s) for s in held])
        assert ppl_train < ppl_held


class TestPerplexity:
    def test_uniform_equals_vocab_size(self):
        sc = TableScorer.uniform(10)
        assert perplexity(sc, [[0, 1, 2]], [[True, True, True]]) == pytest.approx(10.0)

    def test_single_token_half_prob(self):
        sc = TableScorer({None: log_normalize([1, 1])})
        ppl = perplexity(sc, [[0, 1, 1]], [[False, True, False]])
        assert ppl == pytest.approx(2.0)

    def test_mask_length_mismatch(self):
        with pytest.raises(ScorerError, match="mask"):
            perplexity(TableScorer.uniform(4), [[0, 1]], [[True]])

    def test_empty_mask_undefined(self):
        with pytest.raises(ScorerError, match="undefined"):
            perplexity(TableScorer.uniform(4), [[0, 1]], [[False, False]])


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        rng = random.Random(4)
        m = train_ngram(random_corpus(rng, 9), order=3, vocabulary_size=9, discount=0.6)
        path = tmp_path / "model.ffng"
        save_ngram(m, path)
        loaded = load_ngram(path)
        assert loaded.order == m.order
        assert loaded.discount == m.discount
        assert loaded.counts == m.counts
        prefix = [1, 2, 3]
        assert np.allclose(loaded.score(prefix), m.score(prefix))

    def test_bytes_deterministic(self, tmp_path):
        rng = random.Random(4)
        m = train_ngram(random_corpus(rng, 9), order=2, vocabulary_size=9)
        a, b = tmp_path / "a.ffng", tmp_path / "b.ffng"
        save_ngram(m, a)
        save_ngram(m, b)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ScorerError, match="n-gram"):
            load_ngram(p)


def _local_model():
    rng = random.Random(7)
    return train_ngram(random_corpus(rng, 6, n_seqs=20, length=12), 2, 6)


def _mock_transport(model):
    def handler(request: httpx.Request) -> httpx.Response:
        import json

        prefix = json.loads(request.content)["prefix"]
        return httpx.Response(200, json={"logprobs": list(model.score(prefix))})

    return httpx.MockTransport(handler)


class TestRemoteScorer:
    def test_echo_fixture(self):
        model = _local_model()
        client = httpx.Client(transport=_mock_transport(model), base_url="http://scorer")
        remote = RemoteScorer("http://scorer", model.vocabulary_size, client=client)
        assert np.allclose(remote.score([1, 2]), model.score([1, 2]))

    def test_transport_error_is_retryable(self):
        def fail(request):
            raise httpx.ConnectError("boom")

        client = httpx.Client(transport=httpx.MockTransport(fail), base_url="http://scorer")
        remote = RemoteScorer("http://scorer", 6, client=client)
        with pytest.raises(RemoteTransportError) as exc:
            remote.score([])
        assert exc.value.retryable

    def test_protocol_error_distinct(self):
        client = httpx.Client(
            transport=httpx.MockTransport(lambda r: httpx.Response(200, json={"nope": 1})),
            base_url="http://scorer",
        )
        remote = RemoteScorer("http://scorer", 6, client=client)
        with pytest.raises(RemoteProtocolError) as exc:
            remote.score([])
        assert not exc.value.retryable

    def test_wrong_length_is_protocol_error(self):
        client = httpx.Client(
            transport=httpx.MockTransport(
                lambda r: httpx.Response(200, json={"logprobs": [0.0, 0.0]})
            ),
            base_url="http://scorer",
        )
        remote = RemoteScorer("http://scorer", 6, client=client)
        with pytest.raises(RemoteProtocolError, match="expected 6"):
            remote.score([])

    def test_decoder_identical_under_remote(self):
        """Remote and local scorers are interchangeable behind the contract."""
        model = _local_model()
        client = httpx.Client(transport=_mock_transport(model), base_url="http://scorer")
        remote = RemoteScorer("http://scorer", model.vocabulary_size, client=client)
        req = DecodeRequest(
            prefix=(0,),
            suite=ConstraintSuite((), Mode.UNORDERED),
            terminators=frozenset({5}),
            beam_size=4,
            max_new_tokens=6,
        )
        local_result = decode(req, model)
        remote_result = decode(req, remote)
        assert [h.tokens for h in local_result.finished] == [
            h.tokens for h in remote_result.finished
        ]

    def test_concurrent_scoring(self):
        model = _local_model()
        client = httpx.Client(transport=_mock_transport(model), base_url="http://scorer")
        remote = RemoteScorer("http://scorer", model.vocabulary_size, client=client)
        errors = []

        def work():
            try:
                for _ in range(20):
                    remote.score([1, 2, 3])
            except Exception as e:  # pragma: no cover
                errors.append(e)

        threads = [threading.Thread(target=work) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
