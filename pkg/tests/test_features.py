import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from presti.errors import EmptyCorpus, NegativeTarget
from presti.features import (
    PAD_FLOOR,
    Vocabulary,
    build_vocabulary,
    encode_sequence,
    invert_target,
    tfidf_fit,
    tfidf_transform,
    tokenize,
    transform_target,
)


class TestTokenize:
    def test_simple_message(self):
        assert tokenize("Fix NPE in Parser") == ["fix", "npe", "in", "parser"]

    def test_empty(self):
        assert tokenize("") == []

    def test_issue_key_kept_whole(self):
        assert tokenize("JCR-2092: remove old SameNode interface") == [
            "jcr-2092",
            "remove",
            "old",
            "samenode",
            "interface",
        ]

    def test_underscore_splits(self):
        assert tokenize("fix_typo") == ["fix", "typo"]


class TestTfidf:
    def test_hand_computed_idf(self):
        fitter = tfidf_fit(["a b", "a c"])
        # df(a)=2, df(b)=1: idf(a)=ln(3/3)+1, idf(b)=ln(3/2)+1
        assert fitter.idf[fitter.columns["a"]] == pytest.approx(1.0)
        assert fitter.idf[fitter.columns["b"]] == pytest.approx(math.log(3 / 2) + 1, abs=1e-12)
        assert fitter.idf[fitter.columns["c"]] == pytest.approx(math.log(3 / 2) + 1, abs=1e-12)

    def test_rows_l2_normalized(self):
        fitter = tfidf_fit(["a b b", "a c", "d d d"])
        matrix = fitter.transform(["a b b", "a c", "d d d"])
        norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1))).ravel()
        assert np.allclose(norms, 1.0)

    def test_empty_message_is_zero_vector(self):
        fitter = tfidf_fit(["a b", "a c"])
        assert tfidf_transform(fitter, "").nnz == 0

    def test_unseen_tokens_are_zero_vector(self):
        fitter = tfidf_fit(["a b", "a c"])
        assert tfidf_transform(fitter, "zzz qqq").nnz == 0

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpus):
            tfidf_fit([])


class TestTargetTransform:
    def test_zero(self):
        assert transform_target(0.0) == 0.0
        assert invert_target(0.0) == 0.0

    def test_e_minus_one_maps_to_one(self):
        assert transform_target(math.e - 1) == pytest.approx(1.0, abs=1e-12)

    def test_satd_mean_roundtrip(self):
        y = 131.5
        assert invert_target(transform_target(y)) == pytest.approx(y, rel=1e-9)

    def test_negative_rejected(self):
        with pytest.raises(NegativeTarget):
            transform_target(-0.5)

    def test_invert_clamps_below_zero(self):
        assert invert_target(-3.0) == 0.0

    @given(st.floats(min_value=0.0, max_value=1e9, allow_nan=False))
    @settings(max_examples=200)
    def test_roundtrip_identity(self, y):
        assert invert_target(transform_target(y)) == pytest.approx(y, rel=1e-9, abs=1e-9)

    @given(st.floats(min_value=0.0, max_value=1e9), st.floats(min_value=0.0, max_value=1e9))
    def test_strictly_monotone(self, a, b):
        if a < b:
            assert transform_target(a) < transform_target(b)


class TestVocabularyAndEncoding:
    def test_reserved_indices(self):
        vocab = build_vocabulary(["alpha beta", "beta gamma"])
        assert vocab.lookup("nope") == 1
        assert min(vocab.index.values()) == 2
        indices = sorted(vocab.index.values())
        assert indices == list(range(2, 2 + len(indices)))

    def test_min_freq_cutoff(self):
        vocab = build_vocabulary(["a a b", "a c"], min_freq=2)
        assert "a" in vocab.index
        assert "b" not in vocab.index

    def test_empty_padded_to_floor(self):
        vocab = build_vocabulary(["alpha"])
        assert encode_sequence([], vocab) == [0] * PAD_FLOOR

    def test_three_tokens_padded_to_floor(self):
        vocab = build_vocabulary(["alpha beta gamma"])
        ids = encode_sequence(["alpha", "beta", "gamma"], vocab)
        assert len(ids) == PAD_FLOOR
        assert ids[3:] == [0, 0]
        assert all(i >= 2 for i in ids[:3])

    def test_truncates_to_max_len(self):
        vocab = build_vocabulary(["tok"])
        ids = encode_sequence(["tok"] * 200, vocab, max_len=100)
        assert len(ids) == 100

    @given(st.lists(st.sampled_from(["a", "b", "c", "zz"]), max_size=30))
    def test_length_floor_always_holds(self, tokens):
        vocab = build_vocabulary(["a b c"])
        assert len(encode_sequence(tokens, vocab)) >= PAD_FLOOR

    def test_save_load_roundtrip(self, tmp_path):
        vocab = build_vocabulary(["alpha beta gamma", "beta delta"])
        path = tmp_path / "vocab.tsv"
        vocab.save(path)
        loaded = Vocabulary.load(path)
        assert loaded.index == vocab.index
