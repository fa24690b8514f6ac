"""Text featurization: tokenization, TF-IDF, target transforms, sequence encoding."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import EmptyCorpus, NegativeTarget

# Issue keys like "jcr-2092" survive as single tokens; everything else splits
# on non-alphanumeric (underscore included).
_TOKEN_RE = re.compile(r"[^\W\d_]+-\d+|[^\W_]+", re.UNICODE)

#: Largest convolution window; every encoded sequence is padded to at least this.
PAD_FLOOR = 5

PAD_INDEX = 0
UNK_INDEX = 1


def tokenize(message: str) -> list[str]:
    """Lowercase and split a message into tokens."""
    return _TOKEN_RE.findall(message.lower())


@dataclass
class Vocabulary:
    """Token-to-index map with reserved padding (0) and unknown (1) slots."""

    index: dict[str, int]
    min_freq: int = 1

    def __len__(self) -> int:
        return len(self.index) + 2

    @property
    def size(self) -> int:
        return len(self)

    def lookup(self, token: str) -> int:
        return self.index.get(token, UNK_INDEX)

    def token_of(self, idx: int) -> str:
        if idx == PAD_INDEX:
            return "<pad>"
        if idx == UNK_INDEX:
            return "<unk>"
        return self._reverse()[idx]

    def _reverse(self) -> dict[int, str]:
        if not hasattr(self, "_rev"):
            self._rev = {i: t for t, i in self.index.items()}
        return self._rev

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for token, idx in sorted(self.index.items(), key=lambda kv: kv[1]):
                fh.write(f"{token}\t{idx}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        index: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                token, idx = line.rstrip("\n").split("\t")
                index[token] = int(idx)
        return cls(index=index)


def build_vocabulary(corpus: list[str], min_freq: int = 1) -> Vocabulary:
    """Build a dense vocabulary from tokenized messages, indices starting at 2."""
    if not corpus:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    counts: dict[str, int] = {}
    order: dict[str, int] = {}
    for message in corpus:
        for tok in tokenize(message):
            counts[tok] = counts.get(tok, 0) + 1
            order.setdefault(tok, len(order))
    kept = [t for t, c in counts.items() if c >= min_freq]
    kept.sort(key=order.__getitem__)
    return Vocabulary(index={t: i + 2 for i, t in enumerate(kept)}, min_freq=min_freq)


def encode_sequence(tokens: list[str], vocab: Vocabulary, max_len: int = 100) -> list[int]:
    """Map tokens to indices, truncate to max_len, pad to at least PAD_FLOOR."""
    ids = [vocab.lookup(t) for t in tokens[:max_len]]
    if len(ids) < PAD_FLOOR:
        ids.extend([PAD_INDEX] * (PAD_FLOOR - len(ids)))
    return ids


@dataclass
class TfidfModel:
    """Fitted TF-IDF weights: tf = raw count, idf = ln((1+N)/(1+df)) + 1, rows L2-normalized."""

    columns: dict[str, int]
    idf: np.ndarray
    n_docs: int = 0

    @property
    def n_features(self) -> int:
        return len(self.columns)

    def transform(self, messages: list[str]) -> sparse.csr_matrix:
        rows: list[int] = []
        cols: list[int] = []
        vals: list[float] = []
        for r, message in enumerate(messages):
            counts: dict[int, int] = {}
            for tok in tokenize(message):
                c = self.columns.get(tok)
                if c is not None:
                    counts[c] = counts.get(c, 0) + 1
            weights = {c: tf * self.idf[c] for c, tf in counts.items()}
            norm = math.sqrt(sum(w * w for w in weights.values()))
            if norm > 0:
                for c, w in sorted(weights.items()):
                    rows.append(r)
                    cols.append(c)
                    vals.append(w / norm)
        return sparse.csr_matrix(
            (vals, (rows, cols)), shape=(len(messages), self.n_features), dtype=np.float64
        )

    def transform_one(self, message: str) -> sparse.csr_matrix:
        return self.transform([message])


def tfidf_fit(corpus: list[str]) -> TfidfModel:
    """Fit document frequencies over the corpus."""
    if not corpus:
        raise EmptyCorpus("TF-IDF requires a non-empty corpus")
    df: dict[str, int] = {}
    order: dict[str, int] = {}
    for message in corpus:
        seen = set(tokenize(message))
        for tok in seen:
            df[tok] = df.get(tok, 0) + 1
        for tok in tokenize(message):
            order.setdefault(tok, len(order))
    tokens = sorted(df, key=order.__getitem__)
    columns = {t: i for i, t in enumerate(tokens)}
    n = len(corpus)
    idf = np.array(
        [math.log((1 + n) / (1 + df[t])) + 1.0 for t in tokens], dtype=np.float64
    )
    return TfidfModel(columns=columns, idf=idf, n_docs=n)


def tfidf_transform(fitter: TfidfModel, message: str) -> sparse.csr_matrix:
    return fitter.transform_one(message)


def transform_target(y: float) -> float:
    """ln(1+y), exact at 0."""
    if y < 0:
        raise NegativeTarget(f"target must be non-negative, got {y}")
    return math.log1p(y)


def invert_target(z: float) -> float:
    """Inverse of transform_target, clamped at 0."""
    return max(0.0, math.expm1(z))


def transform_targets(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < 0):
        raise NegativeTarget("targets must be non-negative")
    return np.log1p(y)


def invert_targets(z: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, np.expm1(np.asarray(z, dtype=np.float64)))
