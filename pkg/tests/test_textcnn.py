import numpy as np
import pytest

from presti.errors import NonFiniteLoss, SequenceTooShort
from presti.textcnn import CnnHyper, TextCnn, _pad_batch

TOY_HYPER = CnnHyper(
    embed_dim=4, window_sizes=(1, 2), filters_per_window=2, dropout=0.0, seed=3
)


def _finite_difference_check(model, sequences, targets, eps=1e-6):
    loss, grads = model.loss_and_gradients(sequences, targets)
    assert np.isfinite(loss)
    worst = 0.0
    for key, param in model.params.items():
        grad = grads[key]
        it = np.nditer(param, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            original = param[idx]
            param[idx] = original + eps
            loss_plus, _ = model.loss_and_gradients(sequences, targets)
            param[idx] = original - eps
            loss_minus, _ = model.loss_and_gradients(sequences, targets)
            param[idx] = original
            fd = (loss_plus - loss_minus) / (2 * eps)
            denom = max(1e-8, abs(fd) + abs(grad[idx]))
            worst = max(worst, abs(fd - grad[idx]) / denom)
    return worst


class TestArchitecture:
    def test_pooled_feature_length_with_default_hyper(self):
        hyper = CnnHyper(seed=1)
        model = TextCnn(vocab_size=30, hyper=hyper)
        sequence = list(range(2, 9))  # length 7
        feat, _, argmax = model.pooled_features(sequence)
        assert feat.shape == (5 * 200,)
        assert set(argmax) == {1, 2, 3, 4, 5}

    def test_window_sizes_sorted_and_validated(self):
        assert CnnHyper(window_sizes=(3, 1, 2)).window_sizes == (1, 2, 3)
        with pytest.raises(ValueError):
            CnnHyper(window_sizes=())
        with pytest.raises(ValueError):
            CnnHyper(filters_per_window=0)

    def test_sequence_below_window_rejected(self):
        model = TextCnn(vocab_size=10, hyper=TOY_HYPER)
        with pytest.raises(SequenceTooShort):
            model.fit([[2]], np.array([1.0]))

    def test_padding_independence(self):
        # a sequence's prediction must not depend on batch padding
        model = TextCnn(vocab_size=12, hyper=TOY_HYPER)
        short = [2, 3, 4, 5, 6]
        long = [7, 8, 9, 10, 11, 2, 3, 4]
        alone = model.predict_log([short])[0]
        batched = model.predict_log([short, long])[0]
        assert alone == pytest.approx(batched, abs=1e-12)


class TestGradients:
    def test_regression_gradients_match_finite_differences(self):
        model = TextCnn(vocab_size=6, hyper=TOY_HYPER, task="regression")
        worst = _finite_difference_check(model, [[2, 3, 4], [5, 2, 0]], np.array([1.3, 0.2]))
        assert worst < 1e-4

    def test_classification_gradients_match_finite_differences(self):
        model = TextCnn(vocab_size=6, hyper=TOY_HYPER, n_outputs=3, task="classification")
        worst = _finite_difference_check(model, [[2, 3, 4], [5, 2, 0]], np.array([0, 2]))
        assert worst < 1e-4


class TestTraining:
    def test_constant_targets_learn_the_constant(self):
        hyper = CnnHyper(
            embed_dim=8,
            window_sizes=(1, 2, 3, 4, 5),
            filters_per_window=4,
            dropout=0.0,
            epochs=400,
            batch_size=8,
            learning_rate=5e-3,
            seed=1,
        )
        model = TextCnn(vocab_size=10, hyper=hyper)
        rng = np.random.default_rng(0)
        sequences = [list(rng.integers(2, 10, size=6)) for _ in range(24)]
        targets = np.full(24, 2.5)
        model.fit(sequences, targets)
        assert np.abs(model.predict_log(sequences) - 2.5).max() < 1e-2

    def test_same_seed_identical_predictions(self):
        hyper = CnnHyper(
            embed_dim=6, filters_per_window=3, dropout=0.5, epochs=3, batch_size=4, seed=9
        )
        rng = np.random.default_rng(1)
        sequences = [list(rng.integers(2, 15, size=7)) for _ in range(12)]
        targets = rng.uniform(0, 3, size=12)

        def train():
            return TextCnn(vocab_size=15, hyper=hyper).fit(sequences, targets)

        first = train().predict_log(sequences)
        second = train().predict_log(sequences)
        assert np.array_equal(first, second)

    def test_non_finite_loss_detected(self):
        hyper = CnnHyper(
            embed_dim=4,
            window_sizes=(1,),
            filters_per_window=2,
            dropout=0.0,
            epochs=1,
            seed=0,
        )
        model = TextCnn(vocab_size=5, hyper=hyper)
        with pytest.raises(NonFiniteLoss):
            model.fit([[2, 3, 4, 2, 3]], np.array([np.inf]))

    def test_loss_history_finite_and_decreasing_overall(self):
        hyper = CnnHyper(
            embed_dim=8, filters_per_window=4, dropout=0.0, epochs=30, batch_size=8,
            learning_rate=5e-3, seed=2,
        )
        rng = np.random.default_rng(4)
        sequences = [list(rng.integers(2, 10, size=6)) for _ in range(32)]
        targets = rng.uniform(0, 2, size=32)
        model = TextCnn(vocab_size=10, hyper=hyper).fit(sequences, targets)
        assert all(np.isfinite(l) for l in model.loss_history)
        assert model.loss_history[-1] < model.loss_history[0]


class TestStateRoundtrip:
    def test_save_restore_predicts_identically(self):
        hyper = CnnHyper(embed_dim=6, filters_per_window=3, dropout=0.0, epochs=2, seed=5)
        rng = np.random.default_rng(2)
        sequences = [list(rng.integers(2, 12, size=6)) for _ in range(10)]
        targets = rng.uniform(0, 2, size=10)
        model = TextCnn(vocab_size=12, hyper=hyper).fit(sequences, targets)
        clone = TextCnn.from_state(model.get_state())
        assert np.array_equal(model.predict_log(sequences), clone.predict_log(sequences))


def test_pad_batch_shapes():
    ids, lengths = _pad_batch([[2, 3], [4, 5, 6, 7]])
    assert ids.shape == (2, 4)
    assert lengths.tolist() == [2, 4]
    assert ids[0].tolist() == [2, 3, 0, 0]
