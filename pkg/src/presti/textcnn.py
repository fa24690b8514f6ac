"""Convolutional text model trained with manual backpropagation.

Architecture: trainable embedding -> per-window-size 1D convolutions ->
max-pool over positions -> concatenated feature vector -> ReLU -> dropout
(train only) -> linear head. The regression head is a single value trained
with mean squared error in log space; the classification head is a softmax
over class scores trained with cross-entropy.

Max-pool argmax positions are kept alongside pooled activations so that
prediction contributions can be traced back to input n-grams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteLoss, SequenceTooShort

_NEG_INF = -1e30


@dataclass
class CnnHyper:
    embed_dim: int = 300
    window_sizes: tuple[int, ...] = (1, 2, 3, 4, 5)
    filters_per_window: int = 200
    dropout: float = 0.5
    learning_rate: float = 1e-3
    epochs: int = 30
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.window_sizes:
            raise ValueError("window_sizes must be non-empty")
        if self.filters_per_window < 1:
            raise ValueError("filters_per_window must be >= 1")
        self.window_sizes = tuple(sorted(self.window_sizes))

    @property
    def n_features(self) -> int:
        return len(self.window_sizes) * self.filters_per_window


def _pad_batch(sequences: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.array([len(s) for s in sequences], dtype=np.int64)
    max_len = int(lengths.max())
    ids = np.zeros((len(sequences), max_len), dtype=np.int64)
    for i, seq in enumerate(sequences):
        ids[i, : len(seq)] = seq
    return ids, lengths


class _Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float) -> None:
        self.lr = lr
        self.beta1 = 0.9
        self.beta2 = 0.999
        self.eps = 1e-8
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        correct1 = 1.0 - self.beta1**self.t
        correct2 = 1.0 - self.beta2**self.t
        for key, grad in grads.items():
            m = self.m[key]
            v = self.v[key]
            m *= self.beta1
            m += (1 - self.beta1) * grad
            v *= self.beta2
            v += (1 - self.beta2) * grad * grad
            params[key] -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + self.eps)


class TextCnn:
    """Shared network body with a regression or classification head."""

    def __init__(
        self,
        vocab_size: int,
        hyper: CnnHyper,
        n_outputs: int = 1,
        task: str = "regression",
    ) -> None:
        if task not in ("regression", "classification"):
            raise ValueError(f"unknown task {task!r}")
        self.vocab_size = vocab_size
        self.hyper = hyper
        self.n_outputs = n_outputs
        self.task = task
        self.trained = False
        self.loss_history: list[float] = []
        rng = np.random.default_rng(hyper.seed)
        self.params: dict[str, np.ndarray] = {
            "embedding": rng.uniform(-0.05, 0.05, size=(vocab_size, hyper.embed_dim))
        }
        for w in hyper.window_sizes:
            fan_in = w * hyper.embed_dim
            bound = np.sqrt(6.0 / (fan_in + hyper.filters_per_window))
            self.params[f"conv_w{w}"] = rng.uniform(
                -bound, bound, size=(hyper.filters_per_window, fan_in)
            )
            self.params[f"conv_b{w}"] = np.zeros(hyper.filters_per_window)
        out_bound = np.sqrt(6.0 / (hyper.n_features + n_outputs))
        self.params["out_w"] = rng.uniform(-out_bound, out_bound, size=(n_outputs, hyper.n_features))
        self.params["out_b"] = np.zeros(n_outputs)
        self._rng = rng

    # --- forward / backward ------------------------------------------------

    def _forward(
        self,
        ids: np.ndarray,
        lengths: np.ndarray,
        train: bool = False,
    ) -> tuple[np.ndarray, dict]:
        hyper = self.hyper
        emb = self.params["embedding"][ids]  # (B, L, D)
        batch, max_len, _ = emb.shape
        pooled_parts = []
        cache: dict = {"ids": ids, "lengths": lengths, "emb": emb, "windows": {}}
        for w in hyper.window_sizes:
            n_pos = max_len - w + 1
            if n_pos < 1 or int(lengths.min()) < w:
                raise SequenceTooShort(
                    f"sequence length below window size {w}"
                )
            stacked = np.concatenate(
                [emb[:, i : i + n_pos, :] for i in range(w)], axis=2
            )  # (B, P, w*D)
            conv = stacked @ self.params[f"conv_w{w}"].T + self.params[f"conv_b{w}"]
            valid = lengths - w + 1  # every sequence is at least PAD_FLOOR long
            mask = np.arange(n_pos)[None, :] >= valid[:, None]
            conv = np.where(mask[:, :, None], _NEG_INF, conv)
            argmax = conv.argmax(axis=1)  # (B, F)
            pooled = np.take_along_axis(conv, argmax[:, None, :], axis=1)[:, 0, :]
            cache["windows"][w] = {"stacked": stacked, "argmax": argmax, "n_pos": n_pos}
            pooled_parts.append(pooled)
        pooled_all = np.concatenate(pooled_parts, axis=1)  # (B, n_features)
        feat = np.maximum(pooled_all, 0.0)
        if train and hyper.dropout > 0.0:
            keep = self._rng.random(feat.shape) >= hyper.dropout
            feat_dropped = feat * keep / (1.0 - hyper.dropout)
            cache["drop_mask"] = keep
        else:
            feat_dropped = feat
            cache["drop_mask"] = None
        out = feat_dropped @ self.params["out_w"].T + self.params["out_b"]
        cache["pooled"] = pooled_all
        cache["feat_dropped"] = feat_dropped
        return out, cache

    def _backward(self, cache: dict, d_out: np.ndarray) -> dict[str, np.ndarray]:
        hyper = self.hyper
        grads: dict[str, np.ndarray] = {}
        feat_dropped = cache["feat_dropped"]
        grads["out_w"] = d_out.T @ feat_dropped
        grads["out_b"] = d_out.sum(axis=0)
        d_feat = d_out @ self.params["out_w"]
        if cache["drop_mask"] is not None:
            d_feat = d_feat * cache["drop_mask"] / (1.0 - hyper.dropout)
        d_pooled = d_feat * (cache["pooled"] > 0.0)
        emb = cache["emb"]
        d_emb = np.zeros_like(emb)
        n_filters = hyper.filters_per_window
        for wi, w in enumerate(hyper.window_sizes):
            wcache = cache["windows"][w]
            d_pool_w = d_pooled[:, wi * n_filters : (wi + 1) * n_filters]  # (B, F)
            argmax = wcache["argmax"]
            stacked = wcache["stacked"]
            n_pos = wcache["n_pos"]
            # route pooled gradients to argmax positions, then one GEMM per direction
            d_conv = np.zeros((emb.shape[0], n_pos, n_filters))
            np.put_along_axis(d_conv, argmax[:, None, :], d_pool_w[:, None, :], axis=1)
            flat_dconv = d_conv.reshape(-1, n_filters)
            flat_stacked = stacked.reshape(-1, stacked.shape[2])
            grads[f"conv_w{w}"] = flat_dconv.T @ flat_stacked
            grads[f"conv_b{w}"] = d_pool_w.sum(axis=0)
            d_stacked = (flat_dconv @ self.params[f"conv_w{w}"]).reshape(stacked.shape)
            dim = hyper.embed_dim
            for i in range(w):
                d_emb[:, i : i + n_pos, :] += d_stacked[:, :, i * dim : (i + 1) * dim]
        d_embedding = np.zeros_like(self.params["embedding"])
        np.add.at(d_embedding, cache["ids"].reshape(-1), d_emb.reshape(-1, emb.shape[2]))
        grads["embedding"] = d_embedding
        return grads

    def _loss_and_dout(self, out: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
        batch = out.shape[0]
        if self.task == "regression":
            diff = out[:, 0] - targets
            loss = float(np.mean(diff**2))
            d_out = np.zeros_like(out)
            d_out[:, 0] = 2.0 * diff / batch
            return loss, d_out
        shifted = out - out.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        probs = exp / exp.sum(axis=1, keepdims=True)
        idx = (np.arange(batch), targets.astype(np.int64))
        loss = float(-np.mean(np.log(probs[idx] + 1e-12)))
        d_out = probs.copy()
        d_out[idx] -= 1.0
        return loss, d_out / batch

    def loss_and_gradients(
        self, sequences: list[list[int]], targets: np.ndarray
    ) -> tuple[float, dict[str, np.ndarray]]:
        """Single dropout-free pass; the entry point the finite-difference check uses."""
        ids, lengths = _pad_batch(sequences)
        out, cache = self._forward(ids, lengths, train=False)
        loss, d_out = self._loss_and_dout(out, np.asarray(targets))
        return loss, self._backward(cache, d_out)

    # --- training / prediction ---------------------------------------------

    def fit(self, sequences: list[list[int]], targets: np.ndarray) -> "TextCnn":
        hyper = self.hyper
        max_window = max(hyper.window_sizes)
        for seq in sequences:
            if len(seq) < max_window:
                raise SequenceTooShort(
                    f"sequence of length {len(seq)} below largest window {max_window}"
                )
        targets = np.asarray(targets, dtype=np.float64)
        n = len(sequences)
        self._rng = np.random.default_rng(hyper.seed + 1)
        optimizer = _Adam(self.params, hyper.learning_rate)
        all_ids, all_lengths = _pad_batch(sequences)
        for epoch in range(hyper.epochs):
            order = self._rng.permutation(n)
            epoch_loss = 0.0
            n_batches = 0
            for start in range(0, n, hyper.batch_size):
                batch_idx = order[start : start + hyper.batch_size]
                ids = all_ids[batch_idx]
                lengths = all_lengths[batch_idx]
                out, cache = self._forward(ids, lengths, train=True)
                loss, d_out = self._loss_and_dout(out, targets[batch_idx])
                if not np.isfinite(loss):
                    raise NonFiniteLoss(
                        f"non-finite loss at epoch {epoch}, batch {n_batches}: {loss}"
                    )
                grads = self._backward(cache, d_out)
                optimizer.step(self.params, grads)
                epoch_loss += loss
                n_batches += 1
            self.loss_history.append(epoch_loss / max(1, n_batches))
        self.trained = True
        return self

    def _predict_raw(self, sequences: list[list[int]]) -> np.ndarray:
        outputs = np.empty((len(sequences), self.n_outputs))
        batch = 256
        for start in range(0, len(sequences), batch):
            chunk = sequences[start : start + batch]
            ids, lengths = _pad_batch(chunk)
            out, _ = self._forward(ids, lengths, train=False)
            outputs[start : start + len(chunk)] = out
        return outputs

    def predict_log(self, sequences: list[list[int]]) -> np.ndarray:
        """Log-space predictions (regression head)."""
        return self._predict_raw(sequences)[:, 0]

    def predict_scores(self, sequences: list[list[int]]) -> np.ndarray:
        """Raw class scores (classification head)."""
        return self._predict_raw(sequences)

    def pooled_features(self, sequence: list[int]) -> tuple[np.ndarray, np.ndarray, dict[int, np.ndarray]]:
        """Prediction ingredients for one sequence: relu features, raw output, argmax per window."""
        ids, lengths = _pad_batch([sequence])
        out, cache = self._forward(ids, lengths, train=False)
        feat = np.maximum(cache["pooled"][0], 0.0)
        argmax = {w: cache["windows"][w]["argmax"][0] for w in self.hyper.window_sizes}
        return feat, out[0], argmax

    # --- serialization -------------------------------------------------------

    def get_state(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "n_outputs": self.n_outputs,
            "task": self.task,
            "trained": self.trained,
            "hyper": {
                "embed_dim": self.hyper.embed_dim,
                "window_sizes": list(self.hyper.window_sizes),
                "filters_per_window": self.hyper.filters_per_window,
                "dropout": self.hyper.dropout,
                "learning_rate": self.hyper.learning_rate,
                "epochs": self.hyper.epochs,
                "batch_size": self.hyper.batch_size,
                "seed": self.hyper.seed,
            },
            "params": {k: v.copy() for k, v in self.params.items()},
        }

    @classmethod
    def from_state(cls, state: dict) -> "TextCnn":
        hyper = CnnHyper(**{**state["hyper"], "window_sizes": tuple(state["hyper"]["window_sizes"])})
        model = cls(state["vocab_size"], hyper, n_outputs=state["n_outputs"], task=state["task"])
        for key, value in state["params"].items():
            model.params[key] = np.asarray(value, dtype=np.float64)
        model.trained = state["trained"]
        return model
