import numpy as np
import pytest

from presti.errors import DegenerateCorpus
from presti.satd import (
    CLASS_ORDER,
    SatdLabel,
    load_patterns,
    model_detect,
    rule_detect,
    train_satd_classifier,
)
from presti.textcnn import CnnHyper


class TestSatdLabel:
    def test_satd_requires_type(self):
        with pytest.raises(ValueError):
            SatdLabel(is_satd=True)

    def test_non_satd_rejects_type(self):
        with pytest.raises(ValueError):
            SatdLabel(is_satd=False, debt_type="Test")


class TestRuleDetect:
    def test_todo_is_code_design(self):
        label = rule_detect("remove dead code as noted in TODO")
        assert (label.is_satd, label.debt_type, label.source) == (True, "CodeDesign", "Rule")

    def test_no_pattern(self):
        label = rule_detect("bump version")
        assert (label.is_satd, label.debt_type) == (False, None)

    def test_javadoc_is_documentation(self):
        label = rule_detect("add missing javadoc for parser")
        assert (label.is_satd, label.debt_type) == (True, "Documentation")

    def test_priority_test_over_code_design(self):
        # matches both "add tests" (test) and "refactor" (code_design)
        label = rule_detect("refactor helper and add tests")
        assert label.debt_type == "Test"

    def test_phrase_must_be_contiguous(self):
        assert not rule_detect("work is now in steady progress").is_satd

    def test_deterministic_and_total(self):
        messages = ["", "typo", "wip: parser", "修复", "a" * 5000]
        for message in messages:
            assert rule_detect(message) == rule_detect(message)

    def test_custom_pattern_file(self, tmp_path):
        path = tmp_path / "patterns.txt"
        path.write_text("test\tneeds coverage\n", encoding="utf-8")
        patterns = load_patterns(path)
        assert rule_detect("parser needs coverage", patterns).debt_type == "Test"
        assert not rule_detect("remove dead code", patterns).is_satd


def _planted_classifier_corpus(n_per_class=40, seed=0):
    rng = np.random.default_rng(seed)
    vocab = {
        None: ["release", "version", "bump", "tag", "publish"],
        "CodeDesign": ["grime", "rework", "entangle", "spaghetti", "rot"],
        "Documentation": ["scribe", "manual", "chapter", "glossary", "margin"],
        "Requirement": ["mandate", "clause", "stipulate", "charter", "decree"],
        "Test": ["harness", "assertion", "coverage", "flake", "suite"],
    }
    corpus = []
    for debt_type, words in vocab.items():
        for _ in range(n_per_class):
            message = " ".join(rng.choice(words, size=6))
            label = SatdLabel(is_satd=debt_type is not None, debt_type=debt_type)
            corpus.append((message, label))
    order = rng.permutation(len(corpus))
    return [corpus[i] for i in order]


_FAST_HYPER = CnnHyper(
    embed_dim=16,
    filters_per_window=8,
    dropout=0.2,
    epochs=30,
    batch_size=16,
    learning_rate=5e-3,
    seed=13,
)


class TestClassifier:
    def test_disjoint_vocabulary_high_accuracy(self):
        corpus = _planted_classifier_corpus()
        train, held_out = corpus[:160], corpus[160:]
        model = train_satd_classifier(train, _FAST_HYPER)
        hits = sum(
            model_detect(model, message) == SatdLabel(
                is_satd=label.is_satd, debt_type=label.debt_type, source="Model"
            )
            for message, label in held_out
        )
        accuracy = hits / len(held_out)
        assert accuracy >= 0.9

    def test_accuracy_beats_majority_class(self):
        corpus = _planted_classifier_corpus()
        train, held_out = corpus[:160], corpus[160:]
        model = train_satd_classifier(train, _FAST_HYPER)
        majority = max(
            sum(1 for _, l in held_out if l.debt_type == t) for t in CLASS_ORDER[1:]
        ) / len(held_out)
        hits = sum(
            model_detect(model, m).debt_type == l.debt_type
            for m, l in held_out
            if l.is_satd
        )
        satd_total = sum(1 for _, l in held_out if l.is_satd)
        assert hits / satd_total > majority

    def test_single_class_rejected(self):
        corpus = [("x y z", SatdLabel(is_satd=False))] * 5
        with pytest.raises(DegenerateCorpus):
            train_satd_classifier(corpus, _FAST_HYPER)

    def test_retrain_same_seed_identical(self):
        corpus = _planted_classifier_corpus(n_per_class=10)
        first = train_satd_classifier(corpus, _FAST_HYPER)
        second = train_satd_classifier(corpus, _FAST_HYPER)
        probe = [m for m, _ in corpus[:20]]
        assert [model_detect(first, m) for m in probe] == [
            model_detect(second, m) for m in probe
        ]

    def test_empty_message_is_non_satd(self):
        corpus = _planted_classifier_corpus(n_per_class=10)
        model = train_satd_classifier(corpus, _FAST_HYPER)
        label = model_detect(model, "")
        assert label == SatdLabel(is_satd=False, source="Model")

    def test_label_invariant_on_all_outputs(self):
        corpus = _planted_classifier_corpus(n_per_class=10)
        model = train_satd_classifier(corpus, _FAST_HYPER)
        for message in ["grime rot", "coverage suite", "release bump", "unusual words here"]:
            label = model_detect(model, message)
            assert label.is_satd == (label.debt_type is not None)
