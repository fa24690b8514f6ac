"""Trace trained CNN predictions back to the input n-grams that produced them."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyCorpus, UntrainedModel
from .features import PAD_INDEX, Vocabulary
from .textcnn import TextCnn

LOW_EFFORT = "LowEffort"
HIGH_EFFORT = "HighEffort"

#: Contributions kept per message before corpus-level aggregation.
TOP_PER_MESSAGE = 5


@dataclass
class KeywordEntry:
    ngram: str
    n: int
    score: float
    count: int


@dataclass
class KeywordReport:
    direction: str
    target: str
    entries: list[KeywordEntry]

    def as_dict(self) -> dict:
        return {
            "direction": self.direction,
            "target": self.target,
            "entries": [
                {"ngram": e.ngram, "n": e.n, "score": e.score, "count": e.count}
                for e in self.entries
            ],
        }


def _ngram_tokens(sequence: list[int], position: int, window: int, vocab: Vocabulary) -> list[int]:
    return sequence[position : position + window]


def attribute(
    model: TextCnn, sequence: list[int], vocab: Vocabulary
) -> list[tuple[str, int, float]]:
    """(ngram text, window size, contribution) per pooled feature.

    Contribution is pooled activation times output weight; the argmax position
    of each filter names the n-gram. Padding-only n-grams are dropped.
    """
    if not model.trained:
        raise UntrainedModel("attribution requires a trained model")
    feat, _, argmax = model.pooled_features(sequence)
    out_w = model.params["out_w"][0]
    results: list[tuple[str, int, float]] = []
    n_filters = model.hyper.filters_per_window
    for wi, w in enumerate(model.hyper.window_sizes):
        positions = argmax[w]
        for f in range(n_filters):
            j = wi * n_filters + f
            token_ids = _ngram_tokens(sequence, int(positions[f]), w, vocab)
            words = [vocab.token_of(t) for t in token_ids if t != PAD_INDEX]
            if not words:
                continue
            results.append((" ".join(words), w, float(feat[j] * out_w[j])))
    return results


def aggregate_keywords(
    model: TextCnn,
    corpus: list[list[int]],
    vocab: Vocabulary,
    direction: str,
    k: int,
    target: str = "",
) -> KeywordReport:
    """Aggregate each message's strongest contributions into a corpus-level ranking."""
    if not corpus:
        raise EmptyCorpus("keyword aggregation needs a non-empty corpus")
    if direction not in (LOW_EFFORT, HIGH_EFFORT):
        raise ValueError(f"unknown direction {direction!r}")
    want_positive = direction == HIGH_EFFORT
    scores: dict[tuple[str, int], float] = {}
    counts: dict[tuple[str, int], int] = {}
    for sequence in corpus:
        contributions = attribute(model, sequence, vocab)
        signed = [
            (ngram, n, value)
            for ngram, n, value in contributions
            if (value > 0) == want_positive and value != 0.0
        ]
        signed.sort(key=lambda item: abs(item[2]), reverse=True)
        for ngram, n, value in signed[:TOP_PER_MESSAGE]:
            key = (ngram, n)
            scores[key] = scores.get(key, 0.0) + abs(value)
            counts[key] = counts.get(key, 0) + 1
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    entries = [
        KeywordEntry(ngram=key[0], n=key[1], score=score, count=counts[key])
        for key, score in ranked[: max(0, k)]
    ]
    return KeywordReport(direction=direction, target=target, entries=entries)
